"""Full solve pipeline: warm start, scaling, restarted PDHG, polling, results.

The loop runs in the scaled space; termination, infeasibility detection, and
restart-candidate scoring are always evaluated on unscaled iterates against
the original problem data.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .fishnet import run_fishnet
from .infeasibility import DeltaWindow, InfeasibilityStatus, detect
from .kkt import ConvergenceInfo, check_termination, convergence_info, kkt_error
from .linalg import proj_box, spectral_norm_estimate
from .model import LpProblem, validate
from .pdhg import NumericalError, PrimalDualIterate, StepSizes, adaptive_step, pdhg_step
from .restart import (
    DEFAULT_BETAS,
    RestartState,
    initialize_primal_weight,
    pick_candidate,
    primal_weight_update,
    restart_to,
    should_restart,
    update_average,
)
from .scaling import apply_scaling, identity_scaling, ruiz_equilibrate, scale_iterate, unscale_iterate


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    PRIMAL_INFEASIBLE = "primal_infeasible"
    DUAL_INFEASIBLE = "dual_infeasible"
    ITERATION_LIMIT = "iteration_limit"
    TIME_LIMIT = "time_limit"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass
class SolverConfig:
    """Knobs for one solve; defaults follow the reference configuration
    (restarts and scaling on, adaptive step / weight updates / fishnet off).
    """

    tolerance: float = 1e-4
    max_iterations: Optional[int] = 100_000
    time_limit: Optional[float] = None
    theta: float = 1.0
    check_interval: int = 100
    enable_scaling: bool = True
    enable_adaptive_step: bool = False
    enable_primal_weight_updates: bool = False
    enable_restarts: bool = True
    enable_fishnet: bool = False
    fishnet_p: int = 5
    fishnet_k: int = 100
    seed: int = 0
    eps_zero: float = 1e-6
    power_iterations: int = 20
    betas: tuple[float, float, float] = DEFAULT_BETAS
    scaling_max_iter: int = 10
    scaling_tol: float = 1e-4
    infeasibility_tol: float = 1e-10
    presolve: Optional[Callable[[LpProblem], LpProblem]] = None
    postsolve: Optional[Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]] = None

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.check_interval < 1:
            raise ValueError("check_interval must be >= 1")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        suff, nec, art = self.betas
        if not (0 < suff < nec < 1 and 0 < art < 1):
            raise ValueError("betas must satisfy 0 < sufficient < necessary < 1 and 0 < artificial < 1")
        if self.fishnet_p < 1:
            raise ValueError("fishnet_p must be >= 1")
        if self.power_iterations < 1:
            raise ValueError("power_iterations must be >= 1")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")

    def to_dict(self) -> dict:
        """JSON-safe view of the configuration (hooks omitted)."""
        return {
            "tolerance": self.tolerance,
            "max_iterations": self.max_iterations,
            "time_limit": self.time_limit,
            "theta": self.theta,
            "check_interval": self.check_interval,
            "enable_scaling": self.enable_scaling,
            "enable_adaptive_step": self.enable_adaptive_step,
            "enable_primal_weight_updates": self.enable_primal_weight_updates,
            "enable_restarts": self.enable_restarts,
            "enable_fishnet": self.enable_fishnet,
            "fishnet_p": self.fishnet_p,
            "fishnet_k": self.fishnet_k,
            "seed": self.seed,
            "eps_zero": self.eps_zero,
            "power_iterations": self.power_iterations,
            "betas": list(self.betas),
            "scaling_max_iter": self.scaling_max_iter,
            "scaling_tol": self.scaling_tol,
            "infeasibility_tol": self.infeasibility_tol,
        }


@dataclass
class SolveResult:
    """Outcome of one solve; vectors are in the original (unscaled) space.

    Reported objectives include the problem's reporting-only constant.
    `matvec_count` tallies K/K^T column-applications across the whole
    pipeline, including power iterations and fishnet batches.
    """

    status: SolveStatus
    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    primal_objective: float
    dual_objective: float
    primal_residual_norm: float
    dual_residual_norm: float
    iterations: int
    restarts: int
    kkt_evaluations: int
    wall_time: float
    matvec_count: int


def _initial_iterate(problem: LpProblem) -> PrimalDualIterate:
    x0 = proj_box(np.zeros(problem.n), problem.l, problem.u)
    y0 = np.zeros(problem.m1 + problem.m2)
    return PrimalDualIterate(x=x0, y=y0)


def _safe_norm_estimate(problem: LpProblem, n_iter: int) -> float:
    K = problem.stacked_k
    if K.nnz == 0:
        return 0.0
    return spectral_norm_estimate(K, n_iter=n_iter)


class _MatvecLedger:
    """Tracks ops_count deltas of every StackedK touched during one solve."""

    def __init__(self):
        self._baselines: dict[int, tuple] = {}

    def track(self, K) -> None:
        if id(K) not in self._baselines:
            self._baselines[id(K)] = (K, K.ops_count)

    def total(self) -> int:
        return sum(K.ops_count - base for K, base in self._baselines.values())


def solve(problem: LpProblem, config: SolverConfig | None = None) -> SolveResult:
    """Run the full pipeline on `problem` and return a fully unscaled result."""
    config = config or SolverConfig()
    violations = validate(problem)
    if violations:
        raise ValueError("invalid problem: " + "; ".join(violations))

    t0 = time.perf_counter()
    work = config.presolve(problem) if config.presolve is not None else problem
    ledger = _MatvecLedger()
    ledger.track(work.stacked_k)

    q_norm = float(np.linalg.norm(work.q))
    c_norm = float(np.linalg.norm(work.c))
    eps = config.tolerance

    # Warm start (unscaled space), then move into the scaled space.
    if config.enable_fishnet:
        warm = run_fishnet(
            work,
            p=config.fishnet_p,
            k=config.fishnet_k,
            seed=config.seed,
            theta=config.theta,
            power_iterations=config.power_iterations,
        )
    else:
        warm = _initial_iterate(work)

    if config.enable_scaling:
        scaling = ruiz_equilibrate(
            work.stacked_k, max_iter=config.scaling_max_iter, tol=config.scaling_tol
        )
        scaled = apply_scaling(work, scaling)
    else:
        scaling = identity_scaling(work.m1 + work.m2, work.n)
        scaled = work
    ledger.track(scaled.stacked_k)

    x_s, y_s = scale_iterate(warm.x, warm.y, scaling)
    z = PrimalDualIterate(x=proj_box(x_s, scaled.l, scaled.u), y=y_s)

    norm_estimate = _safe_norm_estimate(scaled, config.power_iterations)
    eta = 0.9 / norm_estimate if norm_estimate > 0 else 1.0
    eta_hat = eta
    omega = initialize_primal_weight(scaled.c, scaled.q, eps_zero=config.eps_zero)

    iterations = 0
    restarts = 0
    kkt_evaluations = 0
    status: SolveStatus | None = None
    final_x = final_y = None
    final_info: ConvergenceInfo | None = None

    def evaluate(x_scaled, y_scaled):
        nonlocal kkt_evaluations
        x_u, y_u = unscale_iterate(x_scaled, y_scaled, scaling)
        info = convergence_info(work, x_u, y_u)
        kkt_evaluations += 1
        return x_u, y_u, info

    # Iteration-0 evaluation doubles as restart-state seeding.
    x_u, y_u, info = evaluate(z.x, z.y)
    if check_termination(info, q_norm, c_norm, eps):
        status = SolveStatus.OPTIMAL
        final_x, final_y, final_info = x_u, y_u, info
    restart_state = RestartState(
        z_restart_start=PrimalDualIterate(x=z.x.copy(), y=z.y.copy()),
        kkt_at_restart_start=kkt_error(info, omega),
        omega_n=omega,
    )
    window_prev = (x_u, y_u, info.lam)
    last_check_scaled = (z.x.copy(), z.y.copy())

    while status is None:
        if config.time_limit is not None and time.perf_counter() - t0 >= config.time_limit:
            status = SolveStatus.TIME_LIMIT
            break
        if config.max_iterations is not None and iterations >= config.max_iterations:
            status = SolveStatus.ITERATION_LIMIT
            break

        try:
            if config.enable_adaptive_step:
                z, eta_used, eta_hat = adaptive_step(
                    z, omega, eta_hat, iterations, scaled
                )
            else:
                z = pdhg_step(z, StepSizes(eta=eta, omega=omega), config.theta, scaled)
                eta_used = eta
        except NumericalError:
            status = SolveStatus.NUMERICAL_FAILURE
            break
        iterations += 1
        if config.enable_restarts:
            update_average(restart_state, z, eta_used)
        else:
            restart_state.inner_iterations += 1

        if iterations % config.check_interval != 0:
            continue

        x_u, y_u, info = evaluate(z.x, z.y)
        if check_termination(info, q_norm, c_norm, eps):
            status = SolveStatus.OPTIMAL
            final_x, final_y, final_info = x_u, y_u, info
            break

        window = DeltaWindow(
            x_prev=window_prev[0],
            y_prev=window_prev[1],
            lam_prev=window_prev[2],
            x_curr=x_u,
            y_curr=y_u,
            lam_curr=info.lam,
            omega=omega,
        )
        infeas = detect(window, work, tol=config.infeasibility_tol)
        if infeas is InfeasibilityStatus.PRIMAL_INFEASIBLE:
            status = SolveStatus.PRIMAL_INFEASIBLE
            final_x, final_y, final_info = x_u, y_u, info
            break
        if infeas is InfeasibilityStatus.DUAL_INFEASIBLE:
            status = SolveStatus.DUAL_INFEASIBLE
            final_x, final_y, final_info = x_u, y_u, info
            break
        window_prev = (x_u, y_u, info.lam)

        if config.enable_restarts:
            z_avg = restart_state.average()
            x_avg_u, y_avg_u, info_avg = evaluate(z_avg.x, z_avg.y)
            kkt_cur = kkt_error(info, omega)
            kkt_avg = kkt_error(info_avg, omega)
            which = pick_candidate(kkt_cur, kkt_avg)
            if which == "current":
                candidate, kkt_cand, info_cand = z, kkt_cur, info
                cand_unscaled = (x_u, y_u)
            else:
                candidate, kkt_cand, info_cand = z_avg, kkt_avg, info_avg
                cand_unscaled = (x_avg_u, y_avg_u)

            reason = should_restart(
                restart_state,
                kkt_cand,
                restart_state.inner_iterations,
                iterations,
                betas=config.betas,
            )
            if reason is not None:
                restarts += 1
                # Restarting forces a termination check at the chosen candidate.
                if check_termination(info_cand, q_norm, c_norm, eps):
                    status = SolveStatus.OPTIMAL
                    final_x, final_y = cand_unscaled
                    final_info = info_cand
                    break
                if config.enable_primal_weight_updates:
                    omega = primal_weight_update(
                        candidate.x,
                        restart_state.z_restart_start.x,
                        candidate.y,
                        restart_state.z_restart_start.y,
                        omega,
                        eps_zero=config.eps_zero,
                    )
                restart_state = restart_to(
                    restart_state,
                    PrimalDualIterate(x=candidate.x.copy(), y=candidate.y.copy()),
                    kkt_error(info_cand, omega),
                    omega,
                )
                z = candidate
            else:
                restart_state.last_candidate_kkt = kkt_cand
        elif config.enable_primal_weight_updates:
            # Without restarts, update from the movement since the last check.
            omega = primal_weight_update(
                z.x,
                last_check_scaled[0],
                z.y,
                last_check_scaled[1],
                omega,
                eps_zero=config.eps_zero,
            )
            last_check_scaled = (z.x.copy(), z.y.copy())

    if final_info is None:
        # Limit or failure path: report the last iterate faithfully, but let a
        # limit hit that happens to satisfy the criteria count as optimal.
        x_u, y_u, info = evaluate(z.x, z.y)
        final_x, final_y, final_info = x_u, y_u, info
        if status in (SolveStatus.ITERATION_LIMIT, SolveStatus.TIME_LIMIT) and check_termination(
            info, q_norm, c_norm, eps
        ):
            status = SolveStatus.OPTIMAL

    if config.postsolve is not None:
        final_x, final_y = config.postsolve(final_x, final_y)

    constant = work.objective_constant
    return SolveResult(
        status=status,
        x=final_x,
        y=final_y,
        lam=final_info.lam,
        primal_objective=final_info.primal_objective + constant,
        dual_objective=final_info.dual_objective + constant,
        primal_residual_norm=final_info.primal_residual_norm,
        dual_residual_norm=final_info.dual_residual_norm,
        iterations=iterations,
        restarts=restarts,
        kkt_evaluations=kkt_evaluations,
        wall_time=time.perf_counter() - t0,
        matvec_count=ledger.total(),
    )
