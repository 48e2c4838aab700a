"""Per-arm online ridge estimation and confidence-bound evaluation.

Each arm keeps V = I + sum x x^T over its own pulls, the response accumulator
b, and caches of theta_hat = V^{-1} b and V^{-1}. The inverse is maintained by
rank-one (Sherman-Morrison) updates with a full recompute every
REFRESH_EVERY updates to bound numerical drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

REFRESH_EVERY = 64


@dataclass(frozen=True)
class ConfidenceParams:
    """Problem-level bounds entering the confidence-radius formula."""

    beta_theta: float  # bound on the parameter norm
    beta_x: float  # upper bound on the context norm
    delta: float  # confidence level in (0, 1)
    n_actions: int
    beta_x_lower: float = 0.0  # recorded for completeness; unused by the formula

    def __post_init__(self):
        if self.beta_theta <= 0 or self.beta_x <= 0:
            raise InvalidInputError("norm bounds must be positive")
        if not 0 < self.delta < 1:
            raise InvalidInputError("confidence level must lie in (0, 1)")
        if self.n_actions < 1:
            raise InvalidInputError("need at least one action")


@dataclass(frozen=True)
class ArmEstimate:
    """Immutable snapshot of one arm's design matrix and ridge estimate."""

    V: np.ndarray
    b: np.ndarray
    n: int
    theta_hat: np.ndarray
    V_inv: np.ndarray

    @property
    def dim(self) -> int:
        return self.b.size


def new_arm(d: int) -> ArmEstimate:
    """Fresh arm: V = I_d, no observations."""
    if d < 1:
        raise InvalidInputError("dimension must be >= 1")
    eye = np.eye(d)
    return ArmEstimate(V=eye.copy(), b=np.zeros(d), n=0, theta_hat=np.zeros(d), V_inv=eye.copy())


def update(est: ArmEstimate, x: np.ndarray, y: float) -> ArmEstimate:
    """Successor state after observing response `y` at feature vector `x`."""
    x = np.asarray(x, dtype=float)
    if x.shape != (est.dim,):
        raise InvalidInputError("feature vector dimension mismatch")
    if not np.all(np.isfinite(x)) or not math.isfinite(y):
        raise InvalidInputError("non-finite observation")
    V = est.V + np.outer(x, x)
    b = est.b + y * x
    n = est.n + 1
    if n % REFRESH_EVERY == 0:
        V_inv = np.linalg.inv(V)
    else:
        # Sherman-Morrison rank-one downdate of the inverse
        Vx = est.V_inv @ x
        V_inv = est.V_inv - np.outer(Vx, Vx) / (1.0 + x @ Vx)
    theta_hat = V_inv @ b
    return ArmEstimate(V=V, b=b, n=n, theta_hat=theta_hat, V_inv=V_inv)


def radius(est: ArmEstimate, p: ConfidenceParams) -> float:
    """Confidence-ellipsoid radius for this arm at its current pull count."""
    d = est.dim
    log_term = 2.0 * math.log(p.n_actions / p.delta) + d * math.log(1.0 + est.n * p.beta_x / d)
    return p.beta_theta + math.sqrt(log_term)


def weighted_norm(est: ArmEstimate, x: np.ndarray) -> float:
    """||x||_{V^{-1}}, the per-direction uncertainty scale."""
    x = np.asarray(x, dtype=float)
    return math.sqrt(max(float(x @ est.V_inv @ x), 0.0))


def ucb(est: ArmEstimate, x: np.ndarray, rho: float) -> float:
    return float(est.theta_hat @ x) + rho * weighted_norm(est, x)


def lcb(est: ArmEstimate, x: np.ndarray, rho: float) -> float:
    return float(est.theta_hat @ x) - rho * weighted_norm(est, x)


def ci(est: ArmEstimate, x: np.ndarray, rho: float) -> float:
    return rho * weighted_norm(est, x)


def solve_from_scratch(est: ArmEstimate) -> np.ndarray:
    """Reference estimate from the accumulated normal equations."""
    return np.linalg.solve(est.V, est.b)


def ellipsoid_norm(est: ArmEstimate, theta: np.ndarray) -> float:
    """||theta - theta_hat||_V, for checking membership in the confidence set."""
    delta = np.asarray(theta, dtype=float) - est.theta_hat
    return math.sqrt(max(float(delta @ est.V @ delta), 0.0))
