"""Dense symmetric matrix kernels used by the difference-network solver.

Everything here is a pure function of its inputs; no shared mutable state.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

# Eigenvalues of nominally PSD inputs may dip slightly below zero in floating
# point; values in [-PSD_TOL, 0) are clamped, anything lower is rejected.
PSD_TOL = 1e-8

# When True, every solve_axb_plus_gx call re-verifies its residual contract.
# Enabled by the test suite; off by default to keep the solver hot loop lean.
CHECK_SOLVES = False


class SolverError(RuntimeError):
    """Numerical failure inside a solve (factorization breakdown, divergence)."""


class EigenPair(NamedTuple):
    """Eigendecomposition U diag(values) U^T with eigenvalues in descending order."""

    values: np.ndarray
    vectors: np.ndarray


def check_square(a, name: str = "matrix") -> np.ndarray:
    """Validate a finite square 2-d array and return it as float64."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_symmetric(a, name: str = "matrix") -> np.ndarray:
    """Validate and symmetrize by averaging with the transpose."""
    a = check_square(a, name)
    return (a + a.T) / 2.0


def sym_eig(a, name: str = "matrix") -> EigenPair:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""
    a = check_square(a, name)
    try:
        values, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as err:
        raise SolverError(f"eigendecomposition of {name} failed: {err}") from err
    return EigenPair(values[::-1].copy(), vectors[:, ::-1].copy())


def psd_eig(a, name: str = "matrix") -> EigenPair:
    """Eigendecomposition of a nominally PSD matrix with small negatives clamped."""
    values, vectors = sym_eig(a, name)
    if values[-1] < -PSD_TOL:
        raise ValueError(
            f"{name} is not positive semidefinite: min eigenvalue {values[-1]:.3e}"
        )
    return EigenPair(np.maximum(values, 0.0), vectors)


def solve_axb_plus_gx(
    a,
    b,
    c,
    gamma: float,
    *,
    eig_a: Optional[EigenPair] = None,
    eig_b: Optional[EigenPair] = None,
    check: bool = False,
) -> np.ndarray:
    """Solve A X B + gamma X = C for symmetric nonnegative-definite A, B.

    Writing A = Ua diag(wa) Ua^T and B = Ub diag(wb) Ub^T, the change of
    variables Y = Ua^T X Ub reduces the equation to the entrywise scaling
    Y_ij (wa_i wb_j + gamma) = (Ua^T C Ub)_ij, so

        X = Ua [ D o (Ua^T C Ub) ] Ub^T,   D_ij = 1 / (wa_i wb_j + gamma).

    The residual ||A X B + gamma X - C||_inf <= 1e-8 * max(1, ||C||_inf) is
    the normative contract; pass ``check=True`` (or set ``CHECK_SOLVES``) to
    verify it after the solve.

    Parameters
    ----------
    a, b : (p, p) symmetric nonnegative-definite arrays.
    c : (p, p) array, any values.
    gamma : positive scalar, so every divisor wa_i wb_j + gamma is positive.
    eig_a, eig_b : optional precomputed ``psd_eig`` results for a and b;
        the ADMM loop passes these so the factorizations happen once.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if eig_a is None:
        eig_a = psd_eig(a, "A")
    if eig_b is None:
        eig_b = psd_eig(b, "B")
    c = np.asarray(c, dtype=float)
    denom = eig_a.values[:, None] * eig_b.values[None, :] + gamma
    ua, ub = eig_a.vectors, eig_b.vectors
    x = ua @ ((ua.T @ c @ ub) / denom) @ ub.T
    if check or CHECK_SOLVES:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        resid = np.abs(a @ x @ b + gamma * x - c).max()
        bound = 1e-8 * max(1.0, np.abs(c).max())
        if not resid <= bound:
            raise SolverError(
                f"matrix-equation residual {resid:.3e} exceeds bound {bound:.3e}"
            )
    return x


def soft_threshold(a, lam: float) -> np.ndarray:
    """Entrywise soft threshold: shrink toward zero by lam, exact zeros inside."""
    if lam < 0:
        raise ValueError(f"threshold must be nonnegative, got {lam}")
    a = np.asarray(a, dtype=float)
    return np.sign(a) * np.maximum(np.abs(a) - lam, 0.0)


def hadamard(a, b) -> np.ndarray:
    """Entrywise product of two equal-shape matrices."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a * b


def norm_entrywise_l1(a) -> float:
    """Sum of absolute entries."""
    return float(np.abs(np.asarray(a, dtype=float)).sum())


def norm_entrywise_linf(a) -> float:
    """Maximum absolute entry."""
    a = np.asarray(a, dtype=float)
    return float(np.abs(a).max()) if a.size else 0.0


def norm_frobenius(a) -> float:
    """Root of the sum of squared entries."""
    return float(np.linalg.norm(np.asarray(a, dtype=float)))


def norm_l1_inf(a) -> float:
    """Maximum absolute row sum."""
    a = np.asarray(a, dtype=float)
    return float(np.abs(a).sum(axis=1).max()) if a.size else 0.0
