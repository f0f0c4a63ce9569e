"""Synthetic precision-matrix regimes and Gaussian sampling for benchmarks.

Three generators produce a ground-truth pair of precision matrices whose
difference is sparse: a banded pair (scenario 1), block scale-free graphs
with sign-flipped hubs (scenario 2), and dense weak blocks with a random
sparse injection (scenario 3). All generators are pure functions of their
arguments, bitwise-reproducible for a fixed seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import FrozenSet, Set, Tuple

import numpy as np

from .linalg import as_symmetric

# Positive-definiteness repair: when a constructed precision matrix has an
# eigenvalue at or below zero, both matrices of the pair get the same
# diagonal shift |min eigenvalue| + PD_MARGIN, which cancels in the
# difference. The margin keeps the repaired matrices comfortably away from
# singularity: with a razor-thin margin the implied covariances are so
# ill-conditioned that the support-recovery theory's irrepresentability
# condition fails for the generated problems (measured alpha < 0), making
# the benchmarks meaningless.
PD_MARGIN = 1.0

SCENARIOS = ("sim1", "sim2", "sim3")


@dataclass(frozen=True)
class GroundTruth:
    """True precision pair, their difference, and its support set."""

    omega_x: np.ndarray
    omega_y: np.ndarray
    delta_star: np.ndarray
    support: FrozenSet[Tuple[int, int]]

    @property
    def p(self) -> int:
        return self.omega_x.shape[0]


@dataclass(frozen=True)
class SimulationSpec:
    """One benchmark configuration: scenario, dimension, sample sizes, seed."""

    scenario: str
    p: int
    n_x: int
    n_y: int
    seed: int

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.p < 4:
            raise ValueError(f"p must be >= 4, got {self.p}")
        if self.scenario == "sim1" and self.p < 8:
            raise ValueError(f"sim1 needs p >= 8, got {self.p}")
        if self.scenario == "sim2" and self.p % 50 != 0:
            raise ValueError(f"sim2 needs p to be a multiple of 50, got {self.p}")
        if self.scenario == "sim3" and self.p % 100 != 0:
            raise ValueError(f"sim3 needs p to be a multiple of 100, got {self.p}")
        if self.n_x < 2 or self.n_y < 2:
            raise ValueError("sample sizes must be >= 2")


def _finalize(omega_x: np.ndarray, omega_y: np.ndarray, margin: float) -> GroundTruth:
    """Joint PD repair and packaging; the common diagonal shift cancels in
    the difference."""
    min_eig = min(
        float(np.linalg.eigvalsh(omega_x)[0]), float(np.linalg.eigvalsh(omega_y)[0])
    )
    if min_eig <= 1e-8:
        shift = abs(min_eig) + margin
        eye = np.eye(omega_x.shape[0])
        omega_x = omega_x + shift * eye
        omega_y = omega_y + shift * eye
    delta = omega_y - omega_x
    support = frozenset(map(tuple, np.argwhere(delta != 0)))
    return GroundTruth(omega_x, omega_y, delta, support)


def gen_sim1(p: int, margin: float = PD_MARGIN) -> GroundTruth:
    """Banded pair: omega_x[i, j] = 0.5^|i-j|; omega_y is identical except
    entries at |i-j| = floor(p/4), which are set to 0.9."""
    if p < 8:
        raise ValueError(f"sim1 needs p >= 8, got {p}")
    dist = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    omega_x = 0.5 ** dist.astype(float)
    omega_y = omega_x.copy()
    omega_y[dist == p // 4] = 0.9
    return _finalize(omega_x, omega_y, margin)


def _preferential_edges(n: int, n_edges: int, rng: np.random.Generator) -> Set[Tuple[int, int]]:
    """Scale-free-style edge set with an exact edge budget.

    Nodes attach one at a time to an existing node chosen proportionally to
    degree; remaining budget is spent on degree-weighted extra edges.
    """
    max_edges = n * (n - 1) // 2
    if n_edges > max_edges:
        raise ValueError(f"cannot place {n_edges} edges on {n} nodes")
    degree = np.zeros(n)
    edges: Set[Tuple[int, int]] = set()

    def add(u: int, v: int) -> None:
        edges.add((min(u, v), max(u, v)))
        degree[u] += 1
        degree[v] += 1

    add(0, 1)
    for node in range(2, n):
        weights = degree[:node] / degree[:node].sum()
        add(node, int(rng.choice(node, p=weights)))
    attempts = 0
    while len(edges) < n_edges:
        weights = degree / degree.sum()
        u = int(rng.choice(n, p=weights))
        v = int(rng.choice(n, p=weights))
        if u != v and (min(u, v), max(u, v)) not in edges:
            add(u, v)
        attempts += 1
        if attempts > 1_000_000:
            raise RuntimeError("edge sampling failed to reach the edge budget")
    return edges


def _signed_uniform(rng: np.random.Generator, size: int, low: float, high: float) -> np.ndarray:
    """Magnitudes uniform on [low, high] with independent random signs."""
    return rng.uniform(low, high, size) * rng.choice([-1.0, 1.0], size)


def gen_sim2(p: int, seed: int, margin: float = PD_MARGIN) -> GroundTruth:
    """Block-diagonal scale-free pair (50 x 50 blocks).

    Per block: a preferential-attachment graph with 50*49/10 = 245 edges
    carries off-diagonal values with magnitudes uniform on [0.2, 0.5] and
    random signs; every row is divided by 3, the diagonal is set to 1, and
    the block is symmetrized by averaging with its transpose. The second
    precision matrix negates the off-diagonal entries in the rows and
    columns of each block's two highest-degree hub nodes.
    """
    if p % 50 != 0 or p < 50:
        raise ValueError(f"sim2 needs p to be a positive multiple of 50, got {p}")
    rng = np.random.default_rng(seed)
    block_size = 50
    n_edges = block_size * (block_size - 1) // 10
    omega_x = np.zeros((p, p))
    omega_y = np.zeros((p, p))
    for start in range(0, p, block_size):
        edges = _preferential_edges(block_size, n_edges, rng)
        block = np.zeros((block_size, block_size))
        for (u, v), value in zip(sorted(edges), _signed_uniform(rng, n_edges, 0.2, 0.5)):
            block[u, v] = value
            block[v, u] = value
        block /= 3.0
        np.fill_diagonal(block, 1.0)
        block = (block + block.T) / 2.0

        degree = np.zeros(block_size, dtype=int)
        for u, v in edges:
            degree[u] += 1
            degree[v] += 1
        hubs = np.lexsort((np.arange(block_size), -degree))[:2]
        flipped = block.copy()
        hub_mask = np.zeros(block_size, dtype=bool)
        hub_mask[hubs] = True
        off_diag = ~np.eye(block_size, dtype=bool)
        flip = (hub_mask[:, None] | hub_mask[None, :]) & off_diag
        flipped[flip] *= -1.0

        sl = slice(start, start + block_size)
        omega_x[sl, sl] = block
        omega_y[sl, sl] = flipped
    return _finalize(omega_x, omega_y, margin)


def gen_sim3(
    p: int,
    seed: int,
    min_signal: float = 0.0,
    margin: float = PD_MARGIN,
) -> GroundTruth:
    """Dense weak blocks (100 x 100) plus a sparse symmetric injection.

    Per block of the first precision matrix, 60% of the upper-triangle
    entries are drawn uniformly from (-0.1, 0.1) and mirrored. The
    difference gets 50 random off-diagonal upper-triangle positions of the
    full matrix (100 entries after mirroring) with magnitudes uniform on
    [min_signal, 0.5] and random signs. Both matrices then receive the same
    diagonal constant max(0, -min eig) + margin, which leaves the
    difference unchanged.
    """
    if p % 100 != 0 or p < 100:
        raise ValueError(f"sim3 needs p to be a positive multiple of 100, got {p}")
    if not 0.0 <= min_signal < 0.5:
        raise ValueError(f"min_signal must lie in [0, 0.5), got {min_signal}")
    rng = np.random.default_rng(seed)
    block_size = 100
    omega_x = np.zeros((p, p))
    iu, ju = np.triu_indices(block_size, k=1)
    n_pairs = iu.size
    n_fill = int(round(0.6 * n_pairs))
    for start in range(0, p, block_size):
        chosen = rng.choice(n_pairs, size=n_fill, replace=False)
        values = rng.uniform(-0.1, 0.1, n_fill)
        block = np.zeros((block_size, block_size))
        block[iu[chosen], ju[chosen]] = values
        block += block.T
        sl = slice(start, start + block_size)
        omega_x[sl, sl] = block

    fi, fj = np.triu_indices(p, k=1)
    picked = rng.choice(fi.size, size=50, replace=False)
    delta = np.zeros((p, p))
    delta[fi[picked], fj[picked]] = _signed_uniform(rng, 50, min_signal, 0.5)
    delta += delta.T
    omega_y = omega_x + delta

    shift = max(
        0.0,
        -float(np.linalg.eigvalsh(omega_x)[0]),
        -float(np.linalg.eigvalsh(omega_y)[0]),
    ) + margin
    eye = np.eye(p)
    omega_x = omega_x + shift * eye
    omega_y = omega_y + shift * eye
    delta_star = omega_y - omega_x
    support = frozenset(map(tuple, np.argwhere(delta_star != 0)))
    return GroundTruth(omega_x, omega_y, delta_star, support)


def generate(spec: SimulationSpec) -> GroundTruth:
    """Dispatch a spec to its scenario generator."""
    if spec.scenario == "sim1":
        return gen_sim1(spec.p)
    if spec.scenario == "sim2":
        return gen_sim2(spec.p, spec.seed)
    return gen_sim3(spec.p, spec.seed)


def sample_gaussian(omega, n: int, seed: int) -> np.ndarray:
    """Draw n observations from the zero-mean Gaussian whose precision
    matrix is ``omega``."""
    omega = as_symmetric(omega, "omega")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    try:
        chol = np.linalg.cholesky(omega)
    except np.linalg.LinAlgError as err:
        raise ValueError("precision matrix is not positive definite") from err
    z = np.random.default_rng(seed).standard_normal((n, omega.shape[0]))
    # omega = L L^T, so x = L^-T z has covariance omega^-1.
    return np.linalg.solve(chol.T, z.T).T


def write_ground_truth(truth: GroundTruth, out_dir, prefix: str = "truth") -> None:
    """Export the matrices as headerless CSV plus a 1-based support list."""
    from pathlib import Path

    out = Path(out_dir)
    np.savetxt(out / f"{prefix}_omega_x.csv", truth.omega_x, delimiter=",")
    np.savetxt(out / f"{prefix}_omega_y.csv", truth.omega_y, delimiter=",")
    np.savetxt(out / f"{prefix}_delta.csv", truth.delta_star, delimiter=",")
    with open(out / f"{prefix}_support.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("i", "j", "value"))
        for i, j in sorted(truth.support):
            writer.writerow((i + 1, j + 1, repr(float(truth.delta_star[i, j]))))
