"""Restarted PDHG solver for linear programs."""

from .infeasibility import DeltaWindow, InfeasibilityStatus, detect
from .kkt import ConvergenceInfo, check_termination, convergence_info, kkt_error
from .linalg import (
    StackedK,
    apply,
    omega_norm,
    proj_box,
    proj_dual_cone,
    proj_lambda,
    spectral_norm_estimate,
)
from .model import BoundClass, LpProblem, SparseMatrix, bound_class, validate
from .mps import (
    MpsBoundConflictWarning,
    MpsModel,
    MpsParseError,
    load_problem,
    parse_mps,
    read_mps,
    to_standard_form,
)
from .pdhg import NumericalError, PrimalDualIterate, StepSizes, adaptive_step, pdhg_step
from .restart import (
    RestartReason,
    RestartState,
    initialize_primal_weight,
    primal_weight_update,
    restart_candidate,
    should_restart,
    update_average,
)
from .fishnet import PointBatch, cull_points, repopulate, run_fishnet, spectral_cast
from .scaling import ScalingData, apply_scaling, ruiz_equilibrate, unscale_iterate
from .solver import SolveResult, SolveStatus, SolverConfig, solve

__version__ = "0.1.0"

__all__ = [
    "BoundClass",
    "ConvergenceInfo",
    "DeltaWindow",
    "InfeasibilityStatus",
    "LpProblem",
    "MpsBoundConflictWarning",
    "MpsModel",
    "MpsParseError",
    "NumericalError",
    "PointBatch",
    "PrimalDualIterate",
    "RestartReason",
    "RestartState",
    "ScalingData",
    "SolveResult",
    "SolveStatus",
    "SolverConfig",
    "SparseMatrix",
    "StackedK",
    "StepSizes",
    "adaptive_step",
    "apply",
    "apply_scaling",
    "bound_class",
    "check_termination",
    "convergence_info",
    "cull_points",
    "detect",
    "initialize_primal_weight",
    "kkt_error",
    "load_problem",
    "omega_norm",
    "parse_mps",
    "pdhg_step",
    "primal_weight_update",
    "proj_box",
    "proj_dual_cone",
    "proj_lambda",
    "read_mps",
    "repopulate",
    "restart_candidate",
    "ruiz_equilibrate",
    "run_fishnet",
    "should_restart",
    "solve",
    "spectral_cast",
    "spectral_norm_estimate",
    "to_standard_form",
    "unscale_iterate",
    "update_average",
    "validate",
]
