"""Command-line front end: solve single instances, run benchmark sweeps,
and render report figures from sweep output.

Exit codes: 0 optimal, 2 certified infeasible, 3 iteration/time limit,
4 input error, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .model import validate
from .mps import MpsParseError, load_problem
from .solver import SolverConfig, SolveResult, SolveStatus, solve

EXIT_OPTIMAL = 0
EXIT_INFEASIBLE = 2
EXIT_LIMIT = 3
EXIT_INPUT_ERROR = 4
EXIT_NUMERICAL = 5

BENCH_HEADER = [
    "instance",
    "status",
    "iterations",
    "restarts",
    "wall_time_s",
    "matvecs",
    "objective",
    "primal_res",
    "dual_res",
    "config",
]


@dataclass
class BenchRecord:
    """One (instance, config) benchmark row."""

    instance: str
    status: str
    iterations: int
    restarts: int
    wall_time_s: float
    matvecs: int
    objective: float
    primal_res: float
    dual_res: float
    config: str

    def as_row(self) -> list[str]:
        return [
            self.instance,
            self.status,
            str(self.iterations),
            str(self.restarts),
            f"{self.wall_time_s:.6f}",
            str(self.matvecs),
            repr(self.objective),
            repr(self.primal_res),
            repr(self.dual_res),
            self.config,
        ]


def _apply_thread_cap() -> None:
    """Honor PDLP_THREADS as a cap on kernel (BLAS/OpenMP) parallelism."""
    cap = os.environ.get("PDLP_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, cap)
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(limits=int(cap))
    except (ImportError, ValueError):
        pass


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol", type=float, default=1e-4, help="termination tolerance")
    parser.add_argument("--max-iters", type=int, default=100_000, help="iteration budget")
    parser.add_argument("--time-limit", type=float, default=None, help="seconds per solve")
    parser.add_argument("--theta", type=float, default=1.0, help="extrapolation parameter")
    parser.add_argument("--check-interval", type=int, default=100,
                        help="iterations between termination/restart checks")
    parser.add_argument("--no-scaling", action="store_true", help="disable Ruiz scaling")
    parser.add_argument("--adaptive-step", action="store_true", help="enable adaptive step sizes")
    parser.add_argument("--primal-weight-updates", action="store_true",
                        help="enable primal weight updates")
    parser.add_argument("--no-restarts", action="store_true", help="disable adaptive restarts")
    parser.add_argument("--fishnet", action="store_true", help="enable the fishnet warm start")
    parser.add_argument("--fishnet-p", type=int, default=5, help="cast 2^p initial points")
    parser.add_argument("--fishnet-k", type=int, default=100,
                        help="batched PDHG iterations per fishnet loop")
    parser.add_argument("--seed", type=int, default=0, help="random seed")


def _config_from_args(args) -> SolverConfig:
    return SolverConfig(
        tolerance=args.tol,
        max_iterations=args.max_iters,
        time_limit=args.time_limit,
        theta=args.theta,
        check_interval=args.check_interval,
        enable_scaling=not args.no_scaling,
        enable_adaptive_step=args.adaptive_step,
        enable_primal_weight_updates=args.primal_weight_updates,
        enable_restarts=not args.no_restarts,
        enable_fishnet=args.fishnet,
        fishnet_p=args.fishnet_p,
        fishnet_k=args.fishnet_k,
        seed=args.seed,
    )


def _config_fingerprint(config: SolverConfig) -> str:
    payload = json.dumps(config.to_dict(), sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def _exit_code(status: SolveStatus) -> int:
    if status is SolveStatus.OPTIMAL:
        return EXIT_OPTIMAL
    if status in (SolveStatus.PRIMAL_INFEASIBLE, SolveStatus.DUAL_INFEASIBLE):
        return EXIT_INFEASIBLE
    if status in (SolveStatus.ITERATION_LIMIT, SolveStatus.TIME_LIMIT):
        return EXIT_LIMIT
    return EXIT_NUMERICAL


def result_to_json(result: SolveResult) -> dict:
    return {
        "status": result.status.value,
        "x": result.x.tolist(),
        "y": result.y.tolist(),
        "lambda": result.lam.tolist(),
        "primal_objective": result.primal_objective,
        "dual_objective": result.dual_objective,
        "primal_residual_norm": result.primal_residual_norm,
        "dual_residual_norm": result.dual_residual_norm,
        "iterations": result.iterations,
        "restarts": result.restarts,
        "kkt_evaluations": result.kkt_evaluations,
        "wall_time": result.wall_time,
        "matvec_count": result.matvec_count,
    }


def _load_and_validate(path: Path):
    problem = load_problem(path)
    violations = validate(problem)
    if violations:
        raise MpsParseError("invalid problem: " + "; ".join(violations))
    return problem


def cmd_solve(args) -> int:
    path = Path(args.path)
    try:
        problem = _load_and_validate(path)
    except (OSError, MpsParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    config = _config_from_args(args)
    result = solve(problem, config)

    if args.json:
        print(json.dumps(result_to_json(result)))
    else:
        name = problem.name or path.stem
        print(f"instance          {name}")
        print(f"status            {result.status.value}")
        print(f"objective         {result.primal_objective:.10g}")
        print(f"dual objective    {result.dual_objective:.10g}")
        print(f"primal residual   {result.primal_residual_norm:.3e}")
        print(f"dual residual     {result.dual_residual_norm:.3e}")
        print(f"iterations        {result.iterations}")
        print(f"restarts          {result.restarts}")
        print(f"matvecs           {result.matvec_count}")
        print(f"wall time         {result.wall_time:.3f}s")
    return _exit_code(result.status)


def _bench_one(path: Path, config: SolverConfig, fingerprint: str) -> BenchRecord:
    try:
        problem = _load_and_validate(path)
        result = solve(problem, config)
        return BenchRecord(
            instance=path.stem,
            status=result.status.value,
            iterations=result.iterations,
            restarts=result.restarts,
            wall_time_s=result.wall_time,
            matvecs=result.matvec_count,
            objective=result.primal_objective,
            primal_res=result.primal_residual_norm,
            dual_res=result.dual_residual_norm,
            config=fingerprint,
        )
    except (OSError, MpsParseError, ValueError) as exc:
        print(f"warning: {path.name}: {exc}", file=sys.stderr)
        return BenchRecord(
            instance=path.stem,
            status="input_error",
            iterations=0,
            restarts=0,
            wall_time_s=0.0,
            matvecs=0,
            objective=float("nan"),
            primal_res=float("nan"),
            dual_res=float("nan"),
            config=fingerprint,
        )


def write_curve_csv(records: list[BenchRecord], path: Path) -> None:
    """Cumulative-fraction-solved curve: one row per solved instance."""
    total = len(records)
    solved_times = sorted(r.wall_time_s for r in records if r.status == "optimal")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_threshold", "fraction_solved"])
        for i, t in enumerate(solved_times, start=1):
            writer.writerow([f"{t:.6f}", f"{i / total:.6f}"])


def cmd_bench(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        print(f"error: not a directory: {directory}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    instances = sorted(directory.glob("*.mps"), key=lambda p: p.name)
    if not instances:
        print(f"error: no .mps files under {directory}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    config = _config_from_args(args)
    fingerprint = _config_fingerprint(config)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(lambda p: _bench_one(p, config, fingerprint), instances))
    else:
        records = [_bench_one(p, config, fingerprint) for p in instances]
    records.sort(key=lambda r: r.instance)

    out_path = Path(args.out)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCH_HEADER)
        for record in records:
            writer.writerow(record.as_row())
    print(f"wrote {len(records)} records to {out_path}")

    if args.curve:
        write_curve_csv(records, Path(args.curve))
        print(f"wrote curve to {args.curve}")
    return EXIT_OPTIMAL


def cmd_report(args) -> int:
    from .report import render_report

    try:
        written = render_report(args.bench_csv, curve_csv=args.curve, out_dir=args.out_dir)
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    for path in written:
        print(f"wrote {path}")
    return EXIT_OPTIMAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdlp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a single MPS instance")
    p_solve.add_argument("path", help="path to an MPS file")
    _add_solver_flags(p_solve)
    p_solve.add_argument("--json", action="store_true", help="emit one JSON object")
    p_solve.set_defaults(func=cmd_solve)

    p_bench = sub.add_parser("bench", help="solve every .mps in a directory")
    p_bench.add_argument("dir", help="directory of MPS files")
    _add_solver_flags(p_bench)
    p_bench.set_defaults(time_limit=60.0)
    p_bench.add_argument("--out", default="bench.csv", help="output CSV path")
    p_bench.add_argument("--curve", default=None, help="also write a (time, fraction) CSV")
    p_bench.add_argument("--jobs", type=int, default=1, help="parallel solves")
    p_bench.set_defaults(func=cmd_bench)

    p_report = sub.add_parser("report", help="render figures from bench CSV output")
    p_report.add_argument("bench_csv", help="CSV written by `pdlp bench`")
    p_report.add_argument("--curve", default=None, help="curve CSV written by `pdlp bench`")
    p_report.add_argument("--out-dir", default=None, help="directory for figures")
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    _apply_thread_cap()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
