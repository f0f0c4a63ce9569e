"""Command-line front end: estimate from data files, sweep penalty paths,
run simulation benchmarks, score estimates, and emit plot-ready CSVs.

Exit codes: 0 on success with all solves converged, 1 on runtime failure or
non-convergence, 2 on input/validation errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .covariance import build_pair
from .evaluation import (
    curve_from_path,
    irrepresentability_alpha,
    support_metrics,
    write_curve_csv,
)
from .linalg import SolverError
from .model_selection import (
    BIC_NORMS,
    bic_score,
    lambda_grid,
    select_by_bic,
    solve_path,
    write_path_csv,
)
from .simulation import (
    SimulationSpec,
    generate,
    sample_gaussian,
    write_ground_truth,
)
from .solver import SolverConfig, admm_solve

THREADS_ENV = "DIFFTRACE_THREADS"


class InputError(Exception):
    """Bad user input: malformed file, inconsistent shapes, invalid flags."""


def _parse_numeric_line(line: str):
    for delim in (",", "\t", None):
        parts = line.split(delim) if delim else line.split()
        parts = [item.strip() for item in parts if item.strip() != ""]
        if len(parts) > 1 or delim is None:
            try:
                return [float(item) for item in parts]
            except ValueError:
                if delim is None:
                    return None
    return None


def read_matrix_csv(path, allow_header: bool = False) -> np.ndarray:
    """Parse a numeric CSV/TSV file into a 2-d array.

    Matrices are headerless; observation files may carry a header row, which
    is detected by a non-numeric first line when ``allow_header`` is set.
    Raises InputError naming the offending line on ragged or non-numeric
    input.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise InputError(f"cannot read {path}: {err}") from err
    rows: List[List[float]] = []
    width: Optional[int] = None
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        values = _parse_numeric_line(raw)
        if values is None:
            if allow_header and not rows:
                continue
            raise InputError(f"{path}: line {lineno} is not numeric")
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise InputError(
                f"{path}: line {lineno} has {len(values)} fields, expected {width}"
            )
        rows.append(values)
    if not rows:
        raise InputError(f"{path}: no numeric rows found")
    return np.asarray(rows, dtype=float)


def read_support_csv(path, p: int) -> set:
    """Parse a support list of 1-based "i,j[,value]" rows into 0-based pairs."""
    path = Path(path)
    support = set()
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise InputError(f"cannot read {path}: {err}") from err
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        parts = [item.strip() for item in raw.split(",")]
        try:
            i, j = int(float(parts[0])), int(float(parts[1]))
        except (ValueError, IndexError):
            if lineno == 1:
                continue
            raise InputError(f"{path}: line {lineno} is not an 'i,j[,value]' row")
        if not (1 <= i <= p and 1 <= j <= p):
            raise InputError(f"{path}: line {lineno} index out of range for p={p}")
        support.add((i - 1, j - 1))
    if not support:
        raise InputError(f"{path}: no support entries found")
    return support


def write_matrix_csv(matrix: np.ndarray, path) -> None:
    np.savetxt(path, matrix, delimiter=",")


def write_support_csv(delta: np.ndarray, path) -> None:
    """Write the nonzero entries as 1-based "i,j,value" rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("i", "j", "value"))
        for i, j in np.argwhere(delta != 0):
            writer.writerow((i + 1, j + 1, repr(float(delta[i, j]))))


def _solver_config(args) -> SolverConfig:
    return SolverConfig(rho=args.rho, tol=args.tol, max_iter=args.max_iter)


def _grid_for(args, pair):
    try:
        return lambda_grid(pair, count=args.grid_count, ratio=args.grid_ratio)
    except ValueError as err:
        raise InputError(str(err)) from err


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_estimate(args) -> int:
    x = read_matrix_csv(args.x, allow_header=True)
    y = read_matrix_csv(args.y, allow_header=True)
    try:
        pair = build_pair(x, y)
        cfg = _solver_config(args)
        if args.lam is not None and args.lam < 0:
            raise ValueError(f"--lambda must be nonnegative, got {args.lam}")
    except ValueError as err:
        raise InputError(str(err)) from err
    out = _out_dir(args)
    start = time.perf_counter()
    if args.lam is not None:
        estimate, _ = admm_solve(pair, args.lam, cfg)
        lam = args.lam
    else:
        grid = _grid_for(args, pair)
        path = solve_path(pair, grid, cfg)
        lam, estimate = select_by_bic(path, args.bic)
        with open(out / "path.csv", "w", newline="") as fh:
            write_path_csv(path, fh)
    wallclock_ms = int(1000 * (time.perf_counter() - start))

    write_matrix_csv(estimate.delta, out / "delta.csv")
    write_support_csv(estimate.delta, out / "support.csv")
    record = {
        "lambda": float(lam),
        "rho": cfg.rho,
        "tol": cfg.tol,
        "iterations": estimate.iterations,
        "converged": estimate.converged,
        "objective": estimate.objective,
        "bic_f": bic_score(estimate.delta, pair, "frobenius"),
        "bic_inf": bic_score(estimate.delta, pair, "max"),
        "nnz": estimate.nnz,
        "wallclock_ms": wallclock_ms,
    }
    (out / "run.json").write_text(json.dumps(record, indent=2) + "\n")
    return 0 if estimate.converged else 1


def cmd_path(args) -> int:
    x = read_matrix_csv(args.x, allow_header=True)
    y = read_matrix_csv(args.y, allow_header=True)
    try:
        pair = build_pair(x, y)
        cfg = _solver_config(args)
    except ValueError as err:
        raise InputError(str(err)) from err
    path = solve_path(pair, _grid_for(args, pair), cfg)
    out = _out_dir(args)
    with open(out / "path.csv", "w", newline="") as fh:
        write_path_csv(path, fh)
    return 0 if all(est.converged for est in path.estimates) else 1


def _simulate_replicate(spec: SimulationSpec, truth, rep: int, args):
    # Per-replicate data streams: X uses seed+1+2r, Y uses seed+2+2r.
    x = sample_gaussian(truth.omega_x, spec.n_x, spec.seed + 1 + 2 * rep)
    y = sample_gaussian(truth.omega_y, spec.n_y, spec.seed + 2 + 2 * rep)
    pair = build_pair(x, y)
    grid = lambda_grid(pair, count=args.grid_count, ratio=args.grid_ratio)
    path = solve_path(pair, grid, _solver_config(args))
    points, auc = curve_from_path(path, truth.delta_star)
    row = {"replicate": rep, "auc": auc, "points": points}
    for norm, tag in (("frobenius", "f"), ("max", "inf")):
        lam, est = select_by_bic(path, norm)
        report = support_metrics(est.delta, truth.delta_star)
        row[f"lambda_{tag}"] = lam
        row[f"tp_{tag}"] = report.tp_rate
        row[f"tn_{tag}"] = report.tn_rate
        row[f"td_{tag}"] = report.td_rate
        row[f"nnz_{tag}"] = report.nnz_est
    row["converged"] = all(est.converged for est in path.estimates)
    return row


def _format_mean_sd(values: Sequence[float], reps: int) -> str:
    mean = 100.0 * float(np.mean(values))
    if reps < 2:
        return f"{mean:.1f}"
    sd = 100.0 * float(np.std(values, ddof=1))
    return f"{mean:.1f}({sd:.1f})"


def cmd_simulate(args) -> int:
    try:
        spec = SimulationSpec(args.scenario, args.p, args.n, args.n, args.seed)
        _solver_config(args)
        if args.grid_count < 2:
            raise ValueError(f"grid needs at least 2 points, got {args.grid_count}")
        if not 0.0 < args.grid_ratio < 1.0:
            raise ValueError(f"grid ratio must lie in (0, 1), got {args.grid_ratio}")
    except ValueError as err:
        raise InputError(str(err)) from err
    truth = generate(spec)
    out = _out_dir(args)
    write_ground_truth(truth, out)

    threads = max(1, int(os.environ.get(THREADS_ENV, "1")))
    reps = range(args.reps)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda r: _simulate_replicate(spec, truth, r, args), reps))
    else:
        rows = [_simulate_replicate(spec, truth, r, args) for r in reps]

    if args.save_data:
        # Re-draw the first replicate's data here so every file write stays
        # on the single writer sequence.
        write_matrix_csv(
            sample_gaussian(truth.omega_x, spec.n_x, spec.seed + 1), out / "x.csv"
        )
        write_matrix_csv(
            sample_gaussian(truth.omega_y, spec.n_y, spec.seed + 2), out / "y.csv"
        )

    with open(out / "replicates.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            (
                "replicate",
                "lambda_f", "tp_f", "tn_f", "td_f", "nnz_f",
                "lambda_inf", "tp_inf", "tn_inf", "td_inf", "nnz_inf",
                "auc",
            )
        )
        for row in rows:
            writer.writerow(
                (
                    row["replicate"],
                    repr(row["lambda_f"]), repr(row["tp_f"]), repr(row["tn_f"]),
                    repr(row["td_f"]), row["nnz_f"],
                    repr(row["lambda_inf"]), repr(row["tp_inf"]), repr(row["tn_inf"]),
                    repr(row["td_inf"]), row["nnz_inf"],
                    repr(row["auc"]),
                )
            )

    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("norm", "metric", "mean_pct", "sd_pct", "formatted"))
        for norm, tag in (("frobenius", "f"), ("max", "inf")):
            for metric in ("tp", "tn", "td"):
                values = [row[f"{metric}_{tag}"] for row in rows]
                mean = 100.0 * float(np.mean(values))
                sd = 100.0 * float(np.std(values, ddof=1)) if args.reps > 1 else ""
                sd_text = f"{sd:.1f}" if sd != "" else ""
                writer.writerow(
                    (norm, metric, f"{mean:.1f}", sd_text, _format_mean_sd(values, args.reps))
                )

    for row in rows:
        with open(out / f"curve_{row['replicate']:03d}.csv", "w", newline="") as fh:
            write_curve_csv(row["points"], fh)

    # Curves averaged pointwise across replicates at matched grid positions.
    n_points = min(len(row["points"]) for row in rows)
    with open(out / "roc.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("index", "mean_fp", "mean_tp"))
        for i in range(n_points):
            fp = float(np.mean([row["points"][i].fp_rate for row in rows]))
            tp = float(np.mean([row["points"][i].tp_rate for row in rows]))
            writer.writerow((i, repr(fp), repr(tp)))
    with open(out / "pr.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("index", "mean_recall", "mean_precision"))
        for i in range(n_points):
            recall = float(np.mean([row["points"][i].tp_rate for row in rows]))
            precision = float(np.mean([row["points"][i].precision for row in rows]))
            writer.writerow((i, repr(recall), repr(precision)))

    return 0 if all(row["converged"] for row in rows) else 1


def cmd_evaluate(args) -> int:
    est = read_matrix_csv(args.delta)
    truth = read_matrix_csv(args.truth)
    try:
        report = support_metrics(est, truth)
    except ValueError as err:
        raise InputError(str(err)) from err
    out = _out_dir(args)
    record = {
        "tp_rate": report.tp_rate,
        "tn_rate": report.tn_rate,
        "td_rate": report.td_rate,
        "sign_consistent": report.sign_consistent,
        "nnz_est": report.nnz_est,
        "nnz_true": report.nnz_true,
    }
    (out / "metrics.json").write_text(json.dumps(record, indent=2) + "\n")
    print(
        f"TP={100 * report.tp_rate:.1f}% TN={100 * report.tn_rate:.1f}% "
        f"TD={100 * report.td_rate:.1f}% sign_consistent={report.sign_consistent}"
    )
    return 0


def cmd_diagnose(args) -> int:
    omega_x = read_matrix_csv(args.x)
    omega_y = read_matrix_csv(args.y)
    if omega_x.shape != omega_y.shape or omega_x.ndim != 2:
        raise InputError("precision matrices must share one square shape")
    p = omega_x.shape[0]
    if p > 40:
        raise InputError(
            f"p={p} exceeds the diagnostic limit of 40: the check builds an "
            f"explicit p^2 x p^2 operator, an O(p^4) cost"
        )
    try:
        sigma_x = np.linalg.inv(omega_x)
        sigma_y = np.linalg.inv(omega_y)
    except np.linalg.LinAlgError as err:
        raise InputError(f"precision matrix not invertible: {err}") from err
    if args.support:
        support = read_support_csv(args.support, p)
    else:
        support = {tuple(idx) for idx in np.argwhere(omega_y - omega_x != 0)}
        if not support:
            raise InputError("precision matrices are identical; supply --support")
    try:
        alpha, kappa = irrepresentability_alpha(sigma_x, sigma_y, support)
    except ValueError as err:
        raise InputError(str(err)) from err
    holds = "holds" if alpha > 0 else "fails"
    print(f"alpha={alpha:.6f} kappa={kappa:.6f} condition {holds}")
    out = _out_dir(args)
    record = {"alpha": alpha, "kappa": kappa, "condition_holds": alpha > 0}
    (out / "diagnose.json").write_text(json.dumps(record, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="difftrace",
        description="Direct estimation of the difference of two precision matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_solver_flags(sp):
        sp.add_argument("--rho", type=float, default=50.0, help="ADMM weight")
        sp.add_argument("--tol", type=float, default=1e-3, help="stopping tolerance")
        sp.add_argument("--max-iter", type=int, default=5000, dest="max_iter")
        sp.add_argument("--grid-count", type=int, default=50, dest="grid_count")
        sp.add_argument("--grid-ratio", type=float, default=0.01, dest="grid_ratio")
        sp.add_argument("--out", default=".", help="output directory")

    sp = sub.add_parser("estimate", help="estimate the difference from two data files")
    sp.add_argument("--x", required=True, help="group X observations (n x p CSV)")
    sp.add_argument("--y", required=True, help="group Y observations (n x p CSV)")
    sp.add_argument("--lambda", type=float, default=None, dest="lam", help="fixed penalty")
    sp.add_argument("--bic", choices=BIC_NORMS, default="frobenius",
                    help="BIC norm for tuning when no --lambda is given")
    add_solver_flags(sp)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("path", help="sweep the penalty path and export its summary")
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    add_solver_flags(sp)
    sp.set_defaults(func=cmd_path)

    sp = sub.add_parser("simulate", help="run a benchmark scenario")
    sp.add_argument("--scenario", choices=("sim1", "sim2", "sim3"), required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True, help="per-group sample size")
    sp.add_argument("--reps", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--save-data", action="store_true", dest="save_data",
                    help="also write the first replicate's x.csv / y.csv")
    add_solver_flags(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("evaluate", help="score an estimate against a ground truth")
    sp.add_argument("--delta", required=True, help="estimated difference (p x p CSV)")
    sp.add_argument("--truth", required=True, help="true difference (p x p CSV)")
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("diagnose", help="small-p support-recoverability diagnostic")
    sp.add_argument("--x", required=True, help="group X precision matrix (p x p CSV)")
    sp.add_argument("--y", required=True, help="group Y precision matrix (p x p CSV)")
    sp.add_argument("--support", default=None, help="support list CSV (1-based i,j rows)")
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_diagnose)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (SolverError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
