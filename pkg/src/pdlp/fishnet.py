"""Multistart warm-start heuristic: cast, evolve, cull, repopulate.

A population of primal points is sampled at the scale of ||K||, evolved with
batched fixed-step PDHG (matrix-matrix instead of matrix-vector products),
halved by duality gap, and occasionally refilled with random convex
combinations of the survivors.  The last survivor seeds the main solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kkt import convergence_info
from .linalg import proj_box, spectral_norm_estimate
from .model import LpProblem
from .pdhg import PrimalDualIterate, StepSizes, pdhg_step
from .restart import initialize_primal_weight


@dataclass
class PointBatch:
    """Primal/dual candidate columns; X is n x k and Y is (m1+m2) x k."""

    X: np.ndarray
    Y: np.ndarray
    rng_seed: int

    def __post_init__(self):
        if self.X.shape[1] != self.Y.shape[1]:
            raise ValueError("X and Y must have equal column counts")

    @property
    def ncols(self) -> int:
        return self.X.shape[1]


def spectral_cast(
    problem: LpProblem,
    p: int,
    seed: int,
    power_iterations: int = 20,
) -> PointBatch:
    """Sample 2^p primal points at radius ||K|| and pair them with Y = K X.

    Coordinates are drawn from a normal distribution with standard deviation
    equal to the spectral-norm estimate, then projected into [l, u].  Column
    0 is always the projected origin.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    K = problem.stacked_k
    radius = spectral_norm_estimate(K, n_iter=power_iterations) if K.nnz else 0.0
    rng = np.random.default_rng(seed)
    ncols = 2**p
    X = radius * rng.standard_normal((problem.n, ncols))
    X = proj_box(X, problem.l, problem.u)
    X[:, 0] = proj_box(np.zeros(problem.n), problem.l, problem.u)
    Y = K.apply(X)
    return PointBatch(X=X, Y=Y, rng_seed=seed)


def _column_gaps(batch: PointBatch, problem: LpProblem) -> np.ndarray:
    return np.array(
        [
            convergence_info(problem, batch.X[:, j], batch.Y[:, j]).gap_abs
            for j in range(batch.ncols)
        ]
    )


def cull_points(batch: PointBatch, problem: LpProblem) -> PointBatch:
    """Keep the better-performing half of the columns by absolute duality gap.

    Ties go to the lower column index; odd counts keep ceil(half); a single
    column is returned unchanged.
    """
    k = batch.ncols
    if k <= 1:
        return batch
    gaps = _column_gaps(batch, problem)
    keep = int(np.ceil(k / 2))
    order = np.argsort(gaps, kind="stable")[:keep]
    order = np.sort(order)
    return PointBatch(X=batch.X[:, order], Y=batch.Y[:, order], rng_seed=batch.rng_seed)


def repopulate(batch: PointBatch, seed) -> PointBatch:
    """Double the column count with random convex combinations of all columns.

    Weights are standard-normal draws clipped at zero and normalized to sum
    to one (uniform fallback if every draw is clipped); the same weights are
    applied to the primal and dual columns.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    k = batch.ncols
    children_x = np.empty_like(batch.X)
    children_y = np.empty_like(batch.Y)
    for j in range(k):
        w = np.maximum(rng.standard_normal(k), 0.0)
        total = w.sum()
        w = w / total if total > 0 else np.full(k, 1.0 / k)
        children_x[:, j] = batch.X @ w
        children_y[:, j] = batch.Y @ w
    return PointBatch(
        X=np.hstack([batch.X, children_x]),
        Y=np.hstack([batch.Y, children_y]),
        rng_seed=batch.rng_seed,
    )


def run_fishnet(
    problem: LpProblem,
    p: int = 5,
    k: int = 100,
    seed: int = 0,
    theta: float = 1.0,
    power_iterations: int = 20,
    count_log: list[int] | None = None,
) -> PrimalDualIterate:
    """Evolve a cast population down to one survivor and return it.

    Each loop runs k fixed-step batched PDHG iterations, culls half, and on
    odd loop indices (while more than two columns entered the loop) doubles
    the survivors back up by convex recombination.  The returned warm start
    is the survivor or the projected-origin column, whichever has the
    smaller duality gap, so seeding the origin guarantees the result is
    never worse than a cold start.
    """
    batch = spectral_cast(problem, p=p, seed=seed, power_iterations=power_iterations)
    rng = np.random.default_rng(seed + 1)
    if count_log is not None:
        count_log.append(batch.ncols)

    origin = PrimalDualIterate(x=batch.X[:, 0].copy(), y=batch.Y[:, 0].copy())

    K = problem.stacked_k
    eta = 0.9 / spectral_norm_estimate(K, n_iter=power_iterations) if K.nnz else 1.0
    omega = initialize_primal_weight(problem.c, problem.q)
    steps = StepSizes(eta=eta, omega=omega)

    i = 0
    j = batch.ncols
    while j > 1:
        it = PrimalDualIterate(x=batch.X, y=batch.Y)
        for _ in range(k):
            it = pdhg_step(it, steps, theta, problem)
        batch = PointBatch(X=it.x, Y=it.y, rng_seed=batch.rng_seed)

        batch = cull_points(batch, problem)
        if count_log is not None:
            count_log.append(batch.ncols)
        if i % 2 == 1 and j > 2:
            batch = repopulate(batch, rng)
            if count_log is not None:
                count_log.append(batch.ncols)
        i += 1
        j = batch.ncols

    survivor = PrimalDualIterate(x=batch.X[:, 0].copy(), y=batch.Y[:, 0].copy())
    survivor_gap = convergence_info(problem, survivor.x, survivor.y).gap_abs
    origin_gap = convergence_info(problem, origin.x, origin.y).gap_abs
    return survivor if survivor_gap <= origin_gap else origin
