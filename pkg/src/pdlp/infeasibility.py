"""Certificate-based infeasibility detection from iterate differences.

On infeasible problems the PDHG iterates diverge along a ray whose direction
encodes a Farkas-type certificate; tracking differences of iterates taken at
a fixed cadence recovers that direction.  Deltas are normalized by their
joint omega-norm before testing so the tolerance is scale-free.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .linalg import omega_norm
from .model import BoundClass, LpProblem


class InfeasibilityStatus(enum.Enum):
    NONE = "none"
    PRIMAL_INFEASIBLE = "primal_infeasible"
    DUAL_INFEASIBLE = "dual_infeasible"


@dataclass
class DeltaWindow:
    """Two (x, y, lambda) snapshots taken at the same cadence, unscaled."""

    x_prev: np.ndarray
    y_prev: np.ndarray
    lam_prev: np.ndarray
    x_curr: np.ndarray
    y_curr: np.ndarray
    lam_curr: np.ndarray
    omega: float = 1.0


def _masked_dot(bounds: np.ndarray, part: np.ndarray) -> float:
    """bounds . part with (+-inf) * 0 = 0; genuine inf products propagate."""
    active = part != 0.0
    if not np.any(active):
        return 0.0
    return float(np.dot(bounds[active], part[active]))


def detect(window: DeltaWindow, problem: LpProblem, tol: float = 1e-10) -> InfeasibilityStatus:
    """Run the dual-infeasibility test, then the primal one, on the deltas.

    Dual infeasibility (primal unbounded ray dx): A dx ~ 0, G dx >= 0,
    c^T dx < 0, and dx respects the recession directions allowed by the
    bounds.  Primal infeasibility (dual ray dy, dlam): K^T dy ~ dlam,
    inequality components nonnegative, and the ray's dual objective
    improvement psi nonnegative.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m1 = problem.m1
    K = problem.stacked_k

    dx = window.x_curr - window.x_prev
    dy = window.y_curr - window.y_prev
    dlam = window.lam_curr - window.lam_prev

    scale = omega_norm(dx, dy, window.omega)
    if scale <= 0 or not np.isfinite(scale):
        return InfeasibilityStatus.NONE
    dx = dx / scale
    dy = dy / scale
    dlam = dlam / scale

    k_dx = K.apply(dx)
    codes = problem.bound_codes

    # Dual-infeasibility certificate via dx.
    eq_ok = float(np.linalg.norm(k_dx[m1:])) <= tol
    ineq_ok = m1 == 0 or float(np.min(k_dx[:m1])) >= -tol
    descent_ok = float(np.dot(problem.c, dx)) <= -tol
    if eq_ok and ineq_ok and descent_ok and _in_recession_set(dx, codes, tol):
        return InfeasibilityStatus.DUAL_INFEASIBLE

    # Primal-infeasibility certificate via (dy, dlam).
    kt_dy = K.apply(dy, transposed=True)
    stationarity_ok = float(np.linalg.norm(kt_dy - dlam)) <= tol
    cone_ok = m1 == 0 or float(np.min(dy[:m1])) >= -tol
    moved = float(np.sqrt(np.dot(dy, dy) + np.dot(dlam, dlam))) > tol
    if stationarity_ok and cone_ok and moved:
        psi = (
            float(np.dot(problem.q, dy))
            - _masked_dot(problem.l, np.minimum(dlam, 0.0))
            - _masked_dot(problem.u, np.maximum(dlam, 0.0))
        )
        if psi >= -tol:
            return InfeasibilityStatus.PRIMAL_INFEASIBLE

    return InfeasibilityStatus.NONE


def _in_recession_set(dx: np.ndarray, codes: np.ndarray, tol: float) -> bool:
    """Check dx_i against the recession directions permitted by the bounds.

    Free variables admit any direction, a finite upper (lower) bound alone
    admits nonpositive (nonnegative) directions, and two finite bounds admit
    none.
    """
    upper_only = codes == BoundClass.UPPER_ONLY.value
    lower_only = codes == BoundClass.LOWER_ONLY.value
    boxed = codes == BoundClass.BOXED.value
    if np.any(dx[upper_only] > tol):
        return False
    if np.any(dx[lower_only] < -tol):
        return False
    if np.any(np.abs(dx[boxed]) > tol):
        return False
    return True
