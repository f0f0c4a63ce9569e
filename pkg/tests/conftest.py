import numpy as np
import pytest

from difftrace import linalg


@pytest.fixture(autouse=True, scope="session")
def verify_matrix_solves():
    # Re-verify the matrix-equation residual contract after every solve in
    # the whole suite.
    linalg.CHECK_SOLVES = True
    yield
    linalg.CHECK_SOLVES = False


def random_spd(p, rng, cond=10.0):
    """Well-conditioned random SPD matrix with eigenvalues in [1, cond]."""
    q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    return (q * rng.uniform(1.0, cond, p)) @ q.T


def random_psd(p, rng, rank=None):
    """Random PSD matrix, optionally rank-deficient."""
    rank = rank or p
    a = rng.standard_normal((p, rank))
    return a @ a.T / rank


@pytest.fixture
def spd_factory():
    return random_spd


@pytest.fixture
def psd_factory():
    return random_psd
