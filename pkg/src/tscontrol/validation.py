"""Small input-validation helpers shared across modules."""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatchError,
    LengthMismatchError,
    NonFiniteInputError,
)


def as_float_array(values, name: str = "array", ndim: int | None = None) -> np.ndarray:
    """Coerce to a float64 ndarray, optionally enforcing dimensionality."""
    arr = np.asarray(values, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise DimensionMismatchError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    return arr


def check_finite(arr: np.ndarray, name: str = "array") -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInputError(f"{name} contains NaN or infinite values")
    return arr


def check_same_length(a: np.ndarray, b: np.ndarray, what: str = "vectors") -> None:
    if len(a) != len(b):
        raise LengthMismatchError(f"{what} have mismatched lengths: {len(a)} vs {len(b)}")


def check_simplex(w: np.ndarray, atol: float = 1e-8, name: str = "weights") -> np.ndarray:
    """Verify nonnegativity and unit sum of a weight vector."""
    w = as_float_array(w, name, ndim=1)
    check_finite(w, name)
    if w.size == 0:
        raise LengthMismatchError(f"{name} must be nonempty")
    if np.any(w < -atol):
        raise ValueError(f"{name} has negative entries (min {w.min()})")
    total = float(w.sum())
    if abs(total - 1.0) > atol:
        raise ValueError(f"{name} must sum to 1 (got {total})")
    return w


def derive_seed(base_seed: int, *path: int) -> int:
    """Derive an independent child seed from a base seed and an integer path.

    Uses numpy's SeedSequence entropy mixing (a splitmix-style hash), so
    distinct paths give statistically independent streams and the mapping is
    stable across runs and processes.
    """
    entropy = [int(base_seed) & 0xFFFFFFFF] + [int(p) & 0xFFFFFFFF for p in path]
    seq = np.random.SeedSequence(entropy)
    return int(seq.generate_state(1, dtype=np.uint32)[0])


# Fixed stream tags for derive_seed so different consumers never collide.
SEED_STREAM_MODEL = 1
SEED_STREAM_BINARIZE = 2
SEED_STREAM_CROSSFIT = 3
SEED_STREAM_PANEL = 4
SEED_STREAM_HORIZON = 5
SEED_STREAM_FOLD = 6
