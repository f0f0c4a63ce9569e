import io

import numpy as np
import pytest

from difftrace.covariance import build_pair, pair_from_covariances
from difftrace.model_selection import (
    PATH_CSV_COLUMNS,
    RegPath,
    bic_score,
    lambda_grid,
    lambda_max,
    select_by_bic,
    solve_path,
    write_path_csv,
)
from difftrace.simulation import gen_sim1, sample_gaussian
from difftrace.solver import SolverConfig, admm_solve, kkt_check
from conftest import random_spd


def sampled_pair(p, n, seed):
    truth = gen_sim1(max(p, 8))
    x = sample_gaussian(truth.omega_x, n, seed)
    y = sample_gaussian(truth.omega_y, n, seed + 1)
    return build_pair(x, y)


class TestLambdaMax:
    def test_identical_covariances(self):
        pair = pair_from_covariances(np.eye(3), np.eye(3), 10, 10)
        assert lambda_max(pair) == 0.0

    def test_hand_example(self):
        sx = np.eye(2)
        sy = sx - np.array([[0.0, 0.3], [0.3, -0.1]])
        pair = pair_from_covariances(sx, sy, 10, 10)
        assert lambda_max(pair) == pytest.approx(0.3)

    def test_solver_returns_zero_at_lambda_max(self):
        rng = np.random.default_rng(0)
        pair = pair_from_covariances(random_spd(4, rng), random_spd(4, rng), 10, 10)
        lam = lambda_max(pair)
        est, _ = admm_solve(pair, lam)
        assert est.nnz == 0
        assert kkt_check(est.delta, pair, lam) == 0.0


class TestLambdaGrid:
    def test_two_point_endpoints(self):
        pair = pair_from_covariances(np.eye(2), np.eye(2) * 0.0, 10, 10)
        grid = lambda_grid(pair, count=2, ratio=0.01)
        np.testing.assert_allclose(grid, [1.0, 0.01])

    def test_log_midpoint(self):
        pair = pair_from_covariances(np.eye(2), np.eye(2) * 0.0, 10, 10)
        grid = lambda_grid(pair, count=3, ratio=0.01)
        np.testing.assert_allclose(grid, [1.0, 0.1, 0.01])

    def test_zero_lambda_max_is_error(self):
        pair = pair_from_covariances(np.eye(2), np.eye(2), 10, 10)
        with pytest.raises(ValueError, match="indistinguishable"):
            lambda_grid(pair)

    def test_strictly_descending(self):
        pair = sampled_pair(10, 50, 1)
        grid = lambda_grid(pair, count=25)
        assert np.all(np.diff(grid) < 0)


class TestBicScore:
    def test_zero_delta(self):
        pair = sampled_pair(10, 50, 2)
        n = pair.n_x + pair.n_y
        expect_f = n * np.linalg.norm(pair.sigma_y - pair.sigma_x)
        expect_i = n * np.abs(pair.sigma_y - pair.sigma_x).max()
        assert bic_score(np.zeros((pair.p,) * 2), pair, "frobenius") == pytest.approx(expect_f)
        assert bic_score(np.zeros((pair.p,) * 2), pair, "max") == pytest.approx(expect_i)

    def test_exact_minimizer_leaves_only_penalty(self):
        rng = np.random.default_rng(3)
        sx = random_spd(4, rng)
        sy = random_spd(4, rng)
        pair = pair_from_covariances(sx, sy, 30, 20)
        delta = np.linalg.inv(pair.sigma_y) - np.linalg.inv(pair.sigma_x)
        n = 50
        expect = np.log(n) * np.count_nonzero(delta)
        assert bic_score(delta, pair, "frobenius") == pytest.approx(expect, abs=1e-6)

    def test_penalty_counts_support_not_magnitude(self):
        pair = sampled_pair(10, 50, 4)
        delta = np.zeros((pair.p, pair.p))
        delta[0, 1] = delta[1, 0] = 0.2
        small = bic_score(delta, pair, "frobenius")
        delta2 = delta * 5.0
        large = bic_score(delta2, pair, "frobenius")
        n = pair.n_x + pair.n_y
        # same nonzero count: scores differ only through the residual term
        resid_small = small - np.log(n) * 2
        resid_large = large - np.log(n) * 2
        assert resid_small != resid_large
        assert small != large

    def test_transpose_invariance_for_symmetric_inputs(self):
        pair = sampled_pair(10, 60, 5)
        rng = np.random.default_rng(6)
        delta = rng.standard_normal((pair.p, pair.p))
        delta = (delta + delta.T) / 2
        assert bic_score(delta, pair, "frobenius") == pytest.approx(
            bic_score(delta.T, pair, "frobenius")
        )

    def test_unknown_norm_rejected(self):
        pair = sampled_pair(10, 50, 7)
        with pytest.raises(ValueError, match="norm"):
            bic_score(np.zeros((pair.p,) * 2), pair, "spectral")


class TestSolvePath:
    def test_single_lambda_max_path(self):
        pair = sampled_pair(10, 50, 8)
        path = solve_path(pair, [lambda_max(pair)])
        assert len(path) == 1
        assert path.nnz[0] == 0
        assert path.estimates[0].nnz == 0

    def test_endpoint_sparsity_ordering(self):
        pair = sampled_pair(20, 100, 9)
        path = solve_path(pair, lambda_grid(pair, count=12))
        assert path.nnz[0] <= path.nnz[-1]

    def test_nnz_matches_recount(self):
        pair = sampled_pair(12, 80, 10)
        path = solve_path(pair, lambda_grid(pair, count=8))
        for i, est in enumerate(path.estimates):
            assert path.nnz[i] == np.count_nonzero(est.delta)

    def test_warm_path_matches_cold_solves(self):
        # The step-size stopping rule can halt ~1e-3 short of the optimum at
        # loose tolerances; solve tightly so both answers sit well inside the
        # 1e-3 agreement band.
        pair = sampled_pair(20, 120, 11)
        cfg = SolverConfig(tol=1e-8, max_iter=200000)
        lams = lambda_grid(pair, count=3)
        path = solve_path(pair, lams, cfg)
        for lam, est in zip(lams, path.estimates):
            cold, _ = admm_solve(pair, float(lam), cfg)
            np.testing.assert_allclose(est.delta, cold.delta, atol=1e-3)

    def test_rejects_ascending_grid(self):
        pair = sampled_pair(10, 50, 12)
        with pytest.raises(ValueError, match="descending"):
            solve_path(pair, [0.1, 0.2])

    def test_rejects_empty_grid(self):
        pair = sampled_pair(10, 50, 13)
        with pytest.raises(ValueError, match="empty"):
            solve_path(pair, [])


class TestSelectByBic:
    def test_single_entry_path(self):
        pair = sampled_pair(10, 50, 14)
        path = solve_path(pair, [lambda_max(pair)])
        lam, est = select_by_bic(path, "frobenius")
        assert lam == lambda_max(pair)
        assert est is path.estimates[0]

    def test_zero_model_selected_when_best(self):
        # With identical underlying groups, every nonzero model pays the
        # penalty for noise: the lambda_max entry must win.
        rng = np.random.default_rng(15)
        truth = gen_sim1(10)
        x = sample_gaussian(truth.omega_x, 400, 16)
        y = sample_gaussian(truth.omega_x, 400, 17)
        pair = build_pair(x, y)
        path = solve_path(pair, lambda_grid(pair, count=10))
        lam, est = select_by_bic(path, "frobenius")
        assert lam == path.lambdas[0]
        assert est.nnz == 0

    def test_ties_break_to_larger_lambda(self):
        scores = np.array([5.0, 3.0, 3.0, 4.0])
        path = RegPath(
            lambdas=np.array([0.4, 0.3, 0.2, 0.1]),
            estimates=["a", "b", "c", "d"],
            bic_f=scores,
            bic_inf=scores,
            nnz=np.zeros(4, dtype=int),
        )
        lam, est = select_by_bic(path, "frobenius")
        assert lam == pytest.approx(0.3)
        assert est == "b"

    def test_selected_score_is_minimal(self):
        pair = sampled_pair(15, 90, 18)
        path = solve_path(pair, lambda_grid(pair, count=9))
        for norm, scores in (("frobenius", path.bic_f), ("max", path.bic_inf)):
            lam, est = select_by_bic(path, norm)
            idx = list(path.lambdas).index(lam)
            assert scores[idx] == scores.min()

    def test_empty_path_rejected(self):
        path = RegPath(np.array([]), [], np.array([]), np.array([]), np.array([]))
        with pytest.raises(ValueError, match="empty"):
            select_by_bic(path)


class TestPathCsv:
    def test_columns_and_rows(self):
        pair = sampled_pair(10, 60, 19)
        path = solve_path(pair, lambda_grid(pair, count=4))
        buf = io.StringIO()
        write_path_csv(path, buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == ",".join(PATH_CSV_COLUMNS)
        assert len(lines) == 5
        first = lines[1].split(",")
        assert float(first[0]) == pytest.approx(float(path.lambdas[0]))
        assert int(first[1]) == path.nnz[0]
