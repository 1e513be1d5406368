"""One PDHG iteration: fixed step and the adaptive accept/retry variant.

Updates follow the dual-consistent sign convention with K = (G; A):

    x+ = proj_box(x - tau * (c - K^T y))
    xb = x+ + theta * (x+ - x)
    y+ = proj_cone(y + sigma * (q - K xb))

so that the reduced cost c - K^T y matches the dual constraint directly.
Both updates accept batched iterates (columns of a matrix) unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import proj_box, proj_dual_cone
from .model import LpProblem


class NumericalError(RuntimeError):
    """Raised when an iteration produces non-finite values or cannot accept a step."""


@dataclass
class StepSizes:
    """Step size eta and primal weight omega; tau = eta/omega, sigma = eta*omega."""

    eta: float
    omega: float

    def __post_init__(self):
        if self.eta <= 0 or self.omega <= 0:
            raise ValueError("eta and omega must be positive")

    @property
    def tau(self) -> float:
        return self.eta / self.omega

    @property
    def sigma(self) -> float:
        return self.eta * self.omega


@dataclass
class PrimalDualIterate:
    """Primal/dual pair; x in [l, u] and y feasible for the dual cone.

    `kx` optionally caches K @ x for the adaptive step; it must always be
    either None or the product for the stored x.
    """

    x: np.ndarray
    y: np.ndarray
    kx: np.ndarray | None = None


def _proj_y(v: np.ndarray, m1: int) -> np.ndarray:
    if v.ndim == 2:
        out = np.array(v, copy=True)
        if m1 > 0:
            out[:m1] = np.maximum(out[:m1], 0.0)
        return out
    return proj_dual_cone(v, m1)


def pdhg_step(
    it: PrimalDualIterate,
    s: StepSizes,
    theta: float,
    problem: LpProblem,
) -> PrimalDualIterate:
    """One fixed-step PDHG update on the given (scaled) problem."""
    K = problem.stacked_k
    kty = K.apply(it.y, transposed=True)
    if it.x.ndim == 2:
        grad = problem.c[:, None] - kty
    else:
        grad = problem.c - kty
    x_new = proj_box(it.x - s.tau * grad, problem.l, problem.u)
    x_bar = x_new + theta * (x_new - it.x)
    k_xbar = K.apply(x_bar)
    if it.y.ndim == 2:
        rhs = problem.q[:, None] - k_xbar
    else:
        rhs = problem.q - k_xbar
    y_new = _proj_y(it.y + s.sigma * rhs, problem.m1)
    return PrimalDualIterate(x=x_new, y=y_new)


def adaptive_step(
    it: PrimalDualIterate,
    omega: float,
    eta_hat: float,
    k: int,
    problem: LpProblem,
    max_retries: int = 60,
) -> tuple[PrimalDualIterate, float, float]:
    """Adaptive-step PDHG update with the accept/retry inner loop.

    Tries the current eta; computes the largest provably safe step
    eta_bar = ||(dx, dy)||_omega^2 / |2 dy^T K dx| and the next candidate
    eta' = min{(1 - (k+1)^-0.3) eta_bar, (1 + (k+1)^-0.6) eta}.  Accepts as
    soon as eta <= eta_bar, returning (iterate, eta_used, eta_next).  A zero
    denominator accepts immediately with eta' = (1 + (k+1)^-0.6) eta.

    Theta is fixed at 1 (the extrapolated point is 2x' - x).  The returned
    iterate carries K @ x' cached, and a cached K @ x on `it` is reused so
    the accept path costs exactly one K^T and one K application.
    """
    if eta_hat <= 0:
        raise ValueError("eta_hat must be positive")
    K = problem.stacked_k
    x, y = it.x, it.y
    eta = eta_hat

    kty = K.apply(y, transposed=True)
    grad = problem.c - kty
    kx = it.kx if it.kx is not None else K.apply(x)

    grow = 1.0 + (k + 1) ** (-0.6)
    shrink = 1.0 - (k + 1) ** (-0.3)

    for _ in range(max_retries):
        x_new = proj_box(x - (eta / omega) * grad, problem.l, problem.u)
        k_xbar = K.apply(2.0 * x_new - x)
        y_new = _proj_y(y + eta * omega * (problem.q - k_xbar), problem.m1)

        dx = x_new - x
        dy = y_new - y
        # K dx recovered from K(2x' - x) = 2 K x' - K x without a third product.
        k_dx = 0.5 * (k_xbar - kx)
        denom = 2.0 * float(np.dot(dy, k_dx))
        movement = omega * float(np.dot(dx, dx)) + float(np.dot(dy, dy)) / omega

        if not (np.isfinite(movement) and np.isfinite(denom)):
            raise NumericalError("non-finite values in adaptive step")

        if denom == 0.0:
            eta_bar = np.inf
            eta_next = grow * eta
        else:
            eta_bar = movement / abs(denom)
            eta_next = min(shrink * eta_bar, grow * eta)

        if eta <= eta_bar:
            kx_new = 0.5 * (k_xbar + kx)
            return PrimalDualIterate(x=x_new, y=y_new, kx=kx_new), eta, eta_next
        eta = eta_next
        if eta <= 0 or not np.isfinite(eta):
            raise NumericalError("adaptive step size collapsed")

    raise NumericalError(f"adaptive step not accepted after {max_retries} retries")
