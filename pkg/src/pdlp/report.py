"""Figure rendering for bench output.

Reads the delimited files written by `pdlp bench` and renders matplotlib
figures next to them.  Kept separate from the data-emitting commands so the
solver and bench paths stay plot-free.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def read_bench_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def read_curve_csv(path) -> list[tuple[float, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [
            (float(row["time_threshold"]), float(row["fraction_solved"])) for row in reader
        ]


def survival_curve_from_records(records: list[dict]) -> list[tuple[float, float]]:
    """Cumulative (time, fraction solved) points from bench rows."""
    total = len(records)
    solved_times = sorted(
        float(r["wall_time_s"]) for r in records if r["status"] == "optimal"
    )
    points = []
    for i, t in enumerate(solved_times, start=1):
        points.append((t, i / total))
    return points


def render_survival_curve(points: list[tuple[float, float]], out_path, title="Fraction solved vs time") -> Path:
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if points:
        times = [p[0] for p in points]
        fracs = [p[1] for p in points]
        ax.step([0.0] + times, [0.0] + fracs, where="post")
    else:
        ax.text(0.5, 0.5, "no solved instances", ha="center", va="center", transform=ax.transAxes)
    ax.set_xlabel("wall time (s)")
    ax.set_ylabel("fraction of instances solved")
    ax.set_ylim(0.0, 1.05)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_iteration_bars(records: list[dict], out_path) -> Path:
    out_path = Path(out_path)
    names = [r["instance"] for r in records]
    iters = [int(r["iterations"]) for r in records]
    solved = [r["status"] == "optimal" for r in records]
    colors = ["tab:blue" if ok else "tab:red" for ok in solved]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.5 * len(names)), 4.0))
    ax.bar(range(len(names)), iters, color=colors)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=8)
    ax.set_ylabel("iterations")
    ax.set_title("Iterations per instance (red = not solved)")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_report(bench_csv, curve_csv=None, out_dir=None) -> list[Path]:
    """Render all report figures next to the bench CSV; returns written paths."""
    bench_csv = Path(bench_csv)
    out_dir = Path(out_dir) if out_dir is not None else bench_csv.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    records = read_bench_csv(bench_csv)
    if curve_csv is not None:
        points = read_curve_csv(curve_csv)
    else:
        points = survival_curve_from_records(records)
    stem = bench_csv.stem
    written = [
        render_survival_curve(points, out_dir / f"{stem}_survival.png"),
        render_iteration_bars(records, out_dir / f"{stem}_iterations.png"),
    ]
    return written
