"""Independent brute-force oracles for checking the solvers.

These deliberately avoid the library's code paths: the QP oracle enumerates
simplex faces, the bisection oracle is a plain loop, and the gradient oracle
uses central finite differences.
"""

import itertools

import numpy as np


def simplex_qp_oracle(Q, b):
    """Exact minimizer of w'Qw - 2 b'w over the probability simplex.

    Enumerates every face, solves the equality-constrained stationarity
    system on it, and keeps the best feasible candidate. The global optimum
    lies in the relative interior of some face, so it is always enumerated.
    """
    Q = np.asarray(Q, dtype=float)
    b = np.asarray(b, dtype=float)
    k = Q.shape[0]
    best_w, best_val = None, np.inf
    for r in range(1, k + 1):
        for support in itertools.combinations(range(k), r):
            s = list(support)
            kkt = np.zeros((r + 1, r + 1))
            kkt[:r, :r] = 2.0 * Q[np.ix_(s, s)]
            kkt[:r, r] = 1.0
            kkt[r, :r] = 1.0
            rhs = np.concatenate([2.0 * b[s], [1.0]])
            sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            if not np.allclose(kkt @ sol, rhs, atol=1e-9):
                continue
            w_s = sol[:r]
            if np.any(w_s < -1e-12):
                continue
            w = np.zeros(k)
            w[s] = np.clip(w_s, 0.0, None)
            w /= w.sum()
            val = float(w @ Q @ w - 2.0 * (b @ w))
            if val < best_val:
                best_val, best_w = val, w
    return best_w, best_val


def projection_oracle(v):
    """Exact simplex projection via the QP oracle; returns (w, ||w - v||^2)."""
    v = np.asarray(v, dtype=float)
    w, val = simplex_qp_oracle(np.eye(len(v)), v)
    return w, val + float(v @ v)


def matching_oracle(x1, xc, vdiag=None, ridge=0.0):
    """Exact simplex least-squares via the QP oracle.

    Returns (w, objective) with the objective the V-weighted squared
    residual plus the ridge term.
    """
    x1 = np.asarray(x1, dtype=float)
    xc = np.asarray(xc, dtype=float)
    if vdiag is None:
        vdiag = np.ones(x1.size)
    vdiag = np.asarray(vdiag, dtype=float)
    Q = (xc * vdiag) @ xc.T + ridge * np.eye(xc.shape[0])
    b = xc @ (vdiag * x1)
    w, val = simplex_qp_oracle(Q, b)
    return w, val + float(x1 @ (vdiag * x1))


def bisect_epsilon_oracle(w0, residuals, lo, hi, tol=1e-10):
    """Plain bisection for the tilted weighted-residual root."""
    w0 = np.asarray(w0, dtype=float)
    r = np.asarray(residuals, dtype=float)

    def f(eps):
        u = eps * r
        z = w0 * np.exp(u - u.max())
        z = z / z.sum()
        return float(z @ r)

    f_lo, f_hi = f(lo), f(hi)
    assert f_lo <= 0.0 <= f_hi, "oracle bracket must straddle the root"
    for _ in range(500):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) <= tol:
            return mid
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def finite_difference_grads(loss_fn, params, eps=1e-5):
    """Central-difference gradients of a scalar loss over a list of arrays."""
    grads = []
    for index, param in enumerate(params):
        param = np.atleast_1d(np.asarray(param, dtype=float))
        grad = np.zeros_like(param)
        it = np.nditer(param, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            bumped = [np.array(p, dtype=float) for p in params]
            bumped_param = np.atleast_1d(bumped[index])
            bumped_param[idx] += eps
            bumped[index] = bumped_param if np.ndim(params[index]) else float(bumped_param[0])
            up = loss_fn(bumped)
            bumped_param[idx] -= 2 * eps
            bumped[index] = bumped_param if np.ndim(params[index]) else float(bumped_param[0])
            down = loss_fn(bumped)
            grad[idx] = (up - down) / (2 * eps)
            it.iternext()
        grads.append(grad if np.ndim(params[index]) else float(grad[0]))
    return grads
