import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tscontrol.panel import PanelDataset


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def midpoint_panel():
    """Treated unit is the exact average of the two controls pre-treatment."""
    controls = np.array(
        [
            [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            [3.0, 2.0, 5.0, 2.0, 9.0, 0.0],
        ]
    )
    treated = controls.mean(axis=0)
    outcomes = np.vstack([treated, controls])
    return PanelDataset(outcomes=outcomes, treated_index=0, t0=4)


@pytest.fixture
def twin_panel():
    """Treated unit is identical to the second control everywhere."""
    outcomes = np.array(
        [
            [2.0, 4.0, 1.0, 7.0, 3.0],
            [5.0, 0.0, 2.0, 1.0, 8.0],
            [2.0, 4.0, 1.0, 7.0, 3.0],
            [9.0, 9.0, 9.0, 9.0, 9.0],
        ]
    )
    return PanelDataset(outcomes=outcomes, treated_index=0, t0=3)


def make_linear_panel(rng, n_controls=8, t0=4, n_post=2, coef=None):
    """Panel whose outcomes are exactly linear in a 2-dim covariate vector."""
    n = n_controls + 1
    T = t0 + n_post
    Z = rng.uniform(0, 1, size=(n, 2))
    coef = np.array([1.5, -2.0]) if coef is None else np.asarray(coef)
    times = np.arange(1, T + 1)
    outcomes = (Z @ coef)[:, None] + 0.25 * times[None, :]
    return PanelDataset(outcomes=outcomes, covariates=Z, treated_index=0, t0=t0)
