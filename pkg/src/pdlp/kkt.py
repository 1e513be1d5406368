"""Objectives, residuals, relative termination tests, and the KKT error.

The dual objective is q^T y + l^T lambda^+ + u^T lambda^- evaluated with the
convention (+-inf) * 0 = 0: projection forces the relevant part of lambda to
vanish wherever a bound is infinite, so no infinite product can survive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import proj_lambda
from .model import LpProblem


@dataclass
class ConvergenceInfo:
    """Everything termination and restart decisions need about one iterate."""

    lam: np.ndarray
    primal_objective: float
    dual_objective: float
    gap_abs: float
    primal_residual_norm: float
    dual_residual_norm: float

    @property
    def gap(self) -> float:
        """Signed duality gap, dual minus primal."""
        return self.dual_objective - self.primal_objective


def _masked_dot(bounds: np.ndarray, lam_part: np.ndarray) -> float:
    """Sum bounds * lam_part treating entries with lam_part == 0 as 0."""
    active = lam_part != 0.0
    if not np.any(active):
        return 0.0
    return float(np.dot(bounds[active], lam_part[active]))


def convergence_info(problem: LpProblem, x: np.ndarray, y: np.ndarray) -> ConvergenceInfo:
    """Compute objectives, residuals, and the duality gap at (x, y).

    Expects unscaled iterates; costs one K and one K^T application.
    """
    K = problem.stacked_k
    m1 = problem.m1

    kty = K.apply(y, transposed=True)
    lam = proj_lambda(problem.c - kty, problem.bound_codes)

    primal_objective = float(np.dot(problem.c, x))
    lam_pos = np.maximum(lam, 0.0)
    lam_neg = np.minimum(lam, 0.0)
    dual_objective = (
        float(np.dot(problem.q, y))
        + _masked_dot(problem.l, lam_pos)
        + _masked_dot(problem.u, lam_neg)
    )

    kx = K.apply(x)
    ineq_violation = np.maximum(problem.h - kx[:m1], 0.0)
    eq_residual = kx[m1:] - problem.b
    primal_residual_norm = float(np.sqrt(np.dot(eq_residual, eq_residual) + np.dot(ineq_violation, ineq_violation)))
    dual_residual = problem.c - kty - lam
    dual_residual_norm = float(np.linalg.norm(dual_residual))

    return ConvergenceInfo(
        lam=lam,
        primal_objective=primal_objective,
        dual_objective=dual_objective,
        gap_abs=abs(dual_objective - primal_objective),
        primal_residual_norm=primal_residual_norm,
        dual_residual_norm=dual_residual_norm,
    )


def check_termination(info: ConvergenceInfo, q_norm: float, c_norm: float, eps: float) -> bool:
    """Relative optimality test: gap, primal and dual residuals all small.

    All three comparisons are inclusive (<=) and scaled by 1 plus the
    relevant data norms, making eps dimensionless.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    gap_ok = info.gap_abs <= eps * (
        1.0 + abs(info.dual_objective) + abs(info.primal_objective)
    )
    primal_ok = info.primal_residual_norm <= eps * (1.0 + q_norm)
    dual_ok = info.dual_residual_norm <= eps * (1.0 + c_norm)
    return gap_ok and primal_ok and dual_ok


def kkt_error(info: ConvergenceInfo, omega: float) -> float:
    """Single scalar combining both residuals and the gap, weighted by omega.

    sqrt(omega^2 * primal_res^2 + dual_res^2 / omega^2 + gap^2); zero exactly
    at optimality.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    return float(
        np.sqrt(
            (omega * info.primal_residual_norm) ** 2
            + (info.dual_residual_norm / omega) ** 2
            + info.gap**2
        )
    )
