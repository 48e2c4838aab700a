"""Ground-truth linear reward model and the budgeted feature-modification problem.

A context splits into an immutable part and a mutable part. Given a linear
reward model, the best achievable decision moves the mutable part within a
distance budget (a two-norm ball or a per-dimension box) toward the direction
of the reward coefficients. Both budget variants admit closed-form optima,
which double as the oracle for regret accounting and for the simulated expert.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError


class DegenerateDirectionWarning(UserWarning):
    """All mutable coefficients are zero: every feasible modification is optimal."""


@dataclass(frozen=True)
class Context:
    """A feature vector split into immutable and mutable coordinates."""

    immutable: np.ndarray
    mutable: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "immutable", np.asarray(self.immutable, dtype=float))
        object.__setattr__(self, "mutable", np.asarray(self.mutable, dtype=float))
        if self.mutable.ndim != 1 or self.immutable.ndim != 1:
            raise InvalidInputError("context parts must be 1-d vectors")
        if self.mutable.size < 1:
            raise InvalidInputError("at least one mutable coordinate is required")

    @property
    def dim(self) -> int:
        return self.immutable.size + self.mutable.size

    @property
    def full(self) -> np.ndarray:
        return np.concatenate([self.immutable, self.mutable])

    def with_mutable(self, mutable: np.ndarray) -> "Context":
        return Context(self.immutable.copy(), np.asarray(mutable, dtype=float))


@dataclass(frozen=True)
class TwoNormBudget:
    """Modification budget: a Euclidean ball of radius gamma around x_M."""

    gamma: float

    def __post_init__(self):
        if self.gamma < 0:
            raise InvalidInputError("budget radius must be nonnegative")

    def distance(self, xm: np.ndarray, base: np.ndarray) -> float:
        return float(np.linalg.norm(np.asarray(xm) - np.asarray(base)))

    def feasible(self, xm: np.ndarray, base: np.ndarray, tol: float = 1e-6) -> bool:
        return self.distance(xm, base) <= self.gamma + tol

    def project(self, xm: np.ndarray, base: np.ndarray) -> np.ndarray:
        delta = np.asarray(xm, dtype=float) - base
        norm = np.linalg.norm(delta)
        if norm <= self.gamma or norm == 0.0:
            return np.asarray(xm, dtype=float).copy()
        return base + delta * (self.gamma / norm)

    def sample_boundary(self, base: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        u = rng.standard_normal(base.size)
        norm = np.linalg.norm(u)
        while norm == 0.0:
            u = rng.standard_normal(base.size)
            norm = np.linalg.norm(u)
        return base + self.gamma * u / norm


@dataclass(frozen=True)
class BoxBudget:
    """Modification budget: per-dimension radii |x̌_M(j) - x_M(j)| <= gamma_j."""

    gammas: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gammas", np.asarray(self.gammas, dtype=float))
        if np.any(self.gammas < 0):
            raise InvalidInputError("budget radii must be nonnegative")

    def distance(self, xm: np.ndarray, base: np.ndarray) -> float:
        # reported as the largest per-dimension excess ratio surrogate: the
        # max-norm scaled by the radii where positive
        delta = np.abs(np.asarray(xm) - np.asarray(base))
        return float(np.max(delta))

    def feasible(self, xm: np.ndarray, base: np.ndarray, tol: float = 1e-6) -> bool:
        delta = np.abs(np.asarray(xm) - np.asarray(base))
        return bool(np.all(delta <= self.gammas + tol))

    def project(self, xm: np.ndarray, base: np.ndarray) -> np.ndarray:
        delta = np.clip(np.asarray(xm, dtype=float) - base, -self.gammas, self.gammas)
        return base + delta

    def sample_boundary(self, base: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        # uniform point of the box (corners and interior both feasible)
        return base + rng.uniform(-self.gammas, self.gammas)


DistanceSpec = TwoNormBudget | BoxBudget


@dataclass(frozen=True)
class RewardModel:
    """Per-action linear reward coefficients with Gaussian observation noise."""

    thetas: np.ndarray  # shape (K, d)
    d_immutable: int
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "thetas", np.atleast_2d(np.asarray(self.thetas, dtype=float)))
        if self.thetas.shape[0] < 1:
            raise InvalidInputError("need at least one action")
        if not 0 <= self.d_immutable < self.thetas.shape[1]:
            raise InvalidInputError("immutable dimension out of range")
        if self.sigma < 0:
            raise InvalidInputError("noise level must be nonnegative")

    @property
    def n_actions(self) -> int:
        return self.thetas.shape[0]

    @property
    def dim(self) -> int:
        return self.thetas.shape[1]

    def theta_mutable(self, a: int) -> np.ndarray:
        return self.thetas[a, self.d_immutable:]


def expected_reward(model: RewardModel, a: int, x: Context) -> float:
    """Noiseless reward of action `a` at context `x`: the inner product."""
    if not 0 <= a < model.n_actions:
        raise InvalidInputError(f"action {a} out of range [0, {model.n_actions})")
    if x.dim != model.dim or x.immutable.size != model.d_immutable:
        raise InvalidInputError("context dimensions do not match the model")
    return float(model.thetas[a] @ x.full)


def sample_reward(model: RewardModel, a: int, x: Context, rng: np.random.Generator) -> float:
    """Expected reward plus one Gaussian noise draw from `rng`."""
    return expected_reward(model, a, x) + model.sigma * float(rng.standard_normal())


def solve_cop_two_norm(theta_m: np.ndarray, x_m: np.ndarray, gamma: float) -> np.ndarray:
    """Optimal mutable modification under a two-norm budget.

    Moves x_M the full radius along theta_M. A zero coefficient vector makes
    every feasible point optimal; x_M is returned unchanged with a warning.
    """
    theta_m = np.asarray(theta_m, dtype=float)
    x_m = np.asarray(x_m, dtype=float)
    if theta_m.shape != x_m.shape:
        raise InvalidInputError("coefficient / context length mismatch")
    if gamma < 0:
        raise InvalidInputError("budget radius must be nonnegative")
    if gamma == 0.0:
        return x_m.copy()
    norm = np.linalg.norm(theta_m)
    if norm == 0.0:
        warnings.warn(
            "zero mutable coefficients: any feasible point is optimal",
            DegenerateDirectionWarning,
        )
        return x_m.copy()
    return x_m + gamma * theta_m / norm


def solve_cop_box(theta_m: np.ndarray, x_m: np.ndarray, gamma_vec: np.ndarray) -> np.ndarray:
    """Optimal mutable modification under a per-dimension box budget.

    Each coordinate moves by its full radius in the sign direction of its
    coefficient; zero-coefficient coordinates stay put (the objective is flat
    along them, and not moving minimizes effort).
    """
    theta_m = np.asarray(theta_m, dtype=float)
    x_m = np.asarray(x_m, dtype=float)
    gamma_vec = np.asarray(gamma_vec, dtype=float)
    if theta_m.shape != x_m.shape or gamma_vec.shape != x_m.shape:
        raise InvalidInputError("coefficient / context / radius length mismatch")
    if np.any(gamma_vec < 0):
        raise InvalidInputError("budget radii must be nonnegative")
    return x_m + np.sign(theta_m) * gamma_vec


@dataclass(frozen=True)
class CopSolution:
    action: int
    recourse: Context
    value: float


def solve_cop(model: RewardModel, x: Context, dist: DistanceSpec) -> CopSolution:
    """Best (action, modification) pair under the true model.

    Enumerates actions, applies the per-action closed form, and returns the
    argmax; ties break toward the lowest action index.
    """
    if x.dim != model.dim or x.immutable.size != model.d_immutable:
        raise InvalidInputError("context dimensions do not match the model")
    best: CopSolution | None = None
    for a in range(model.n_actions):
        theta_m = model.theta_mutable(a)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateDirectionWarning)
            if isinstance(dist, TwoNormBudget):
                xm = solve_cop_two_norm(theta_m, x.mutable, dist.gamma)
            else:
                xm = solve_cop_box(theta_m, x.mutable, dist.gammas)
        cand = x.with_mutable(xm)
        value = expected_reward(model, a, cand)
        if best is None or value > best.value:
            best = CopSolution(a, cand, value)
    assert best is not None
    return best
