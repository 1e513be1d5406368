"""Iterate averaging, restart triggers, and primal-weight management."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .kkt import convergence_info, kkt_error
from .model import LpProblem
from .pdhg import PrimalDualIterate

DEFAULT_BETAS = (0.2, 0.8, 0.36)


class RestartReason(enum.Enum):
    SUFFICIENT = "sufficient_decay"
    NECESSARY_NO_PROGRESS = "necessary_no_progress"
    LONG_LOOP = "long_inner_loop"


@dataclass
class RestartState:
    """Bookkeeping for one restart epoch.

    The running average is weighted by the step sizes actually used and
    covers only iterates produced after the restart point (the restart point
    itself is excluded).
    """

    z_restart_start: PrimalDualIterate
    kkt_at_restart_start: float
    omega_n: float
    running_average_x: np.ndarray = field(init=False)
    running_average_y: np.ndarray = field(init=False)
    weight_sum: float = 0.0
    last_candidate_kkt: float = np.inf
    inner_iterations: int = 0
    previous_restart_start: PrimalDualIterate | None = None

    def __post_init__(self):
        self.running_average_x = np.zeros_like(self.z_restart_start.x)
        self.running_average_y = np.zeros_like(self.z_restart_start.y)

    def average(self) -> PrimalDualIterate:
        if self.weight_sum <= 0:
            raise ValueError("no iterates have been averaged yet")
        return PrimalDualIterate(
            x=self.running_average_x.copy(), y=self.running_average_y.copy()
        )


def update_average(state: RestartState, z_new: PrimalDualIterate, eta_step: float) -> RestartState:
    """Fold one new iterate into the step-size-weighted running average."""
    if eta_step <= 0:
        raise ValueError("eta_step must be positive")
    total = state.weight_sum + eta_step
    frac = eta_step / total
    state.running_average_x += frac * (z_new.x - state.running_average_x)
    state.running_average_y += frac * (z_new.y - state.running_average_y)
    state.weight_sum = total
    state.inner_iterations += 1
    return state


def pick_candidate(kkt_current: float, kkt_average: float) -> str:
    """'current' unless the average has strictly lower KKT error (ties -> current)."""
    return "average" if kkt_average < kkt_current else "current"


def restart_candidate(
    z_current: PrimalDualIterate,
    z_average: PrimalDualIterate,
    problem: LpProblem,
    omega: float,
) -> PrimalDualIterate:
    """Return whichever of current/average has the lower KKT error on `problem`."""
    kkt_current = kkt_error(convergence_info(problem, z_current.x, z_current.y), omega)
    kkt_average = kkt_error(convergence_info(problem, z_average.x, z_average.y), omega)
    if pick_candidate(kkt_current, kkt_average) == "average":
        return z_average
    return z_current


def should_restart(
    state: RestartState,
    kkt_candidate: float,
    total_inner: int,
    total_iterations: int,
    betas: tuple[float, float, float] = DEFAULT_BETAS,
) -> RestartReason | None:
    """Evaluate the three restart criteria in order; None means keep going."""
    beta_sufficient, beta_necessary, beta_artificial = betas
    if kkt_candidate <= beta_sufficient * state.kkt_at_restart_start:
        return RestartReason.SUFFICIENT
    if (
        kkt_candidate <= beta_necessary * state.kkt_at_restart_start
        and kkt_candidate > state.last_candidate_kkt
    ):
        return RestartReason.NECESSARY_NO_PROGRESS
    if total_inner > beta_artificial * total_iterations:
        return RestartReason.LONG_LOOP
    return None


def restart_to(state: RestartState, candidate: PrimalDualIterate, kkt_candidate: float,
               omega: float) -> RestartState:
    """Begin a new epoch at `candidate`: reset the average and inner counter."""
    return RestartState(
        z_restart_start=candidate,
        kkt_at_restart_start=kkt_candidate,
        omega_n=omega,
        previous_restart_start=state.z_restart_start,
    )


def initialize_primal_weight(c: np.ndarray, q: np.ndarray, eps_zero: float = 1e-6) -> float:
    """||c|| / ||q|| when both norms are meaningfully nonzero, else 1."""
    c_norm = float(np.linalg.norm(c))
    q_norm = float(np.linalg.norm(q))
    if c_norm > eps_zero and q_norm > eps_zero:
        return c_norm / q_norm
    return 1.0


def primal_weight_update(
    x_start: np.ndarray,
    x_prev_start: np.ndarray,
    y_start: np.ndarray,
    y_prev_start: np.ndarray,
    omega_prev: float,
    eps_zero: float = 1e-6,
) -> float:
    """Geometric mean of the previous weight and the dual/primal movement ratio.

    Returns omega_prev unchanged when either movement is below eps_zero.
    """
    delta_x = float(np.linalg.norm(x_start - x_prev_start))
    delta_y = float(np.linalg.norm(y_start - y_prev_start))
    if delta_x > eps_zero and delta_y > eps_zero:
        return float(np.exp(0.5 * np.log(delta_y / delta_x) + 0.5 * np.log(omega_prev)))
    return omega_prev
