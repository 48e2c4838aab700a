"""Optimistic recourse optimization under parameter uncertainty.

For each arm the objective is the upper confidence bound of the recoursed
context, max over the confidence ellipsoid of x^T theta, which reduces to
x^T theta_hat + rho * ||x||_{V^{-1}}. The modification is searched inside the
distance budget. Three routes are provided:

* an augmented-Lagrangian alternating scheme with multiplier steps and
  exactly solved (or gradient-ascent) subproblems (``admm_solve``,
  two-norm budgets only),
* a fast exact-reduction path that alternates the two closed-form partial
  maximizers (two-norm) or enumerates box vertices,
* a multi-start projected-gradient oracle on the budget sphere
  (``exact_boundary_search``) used for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import estimator as est_mod
from .errors import InvalidInputError
from .estimator import ArmEstimate
from .model import BoxBudget, Context, DistanceSpec, TwoNormBudget

FEASIBILITY_TOL = 1e-6
GRAD_CLIP = 2.0  # keeps the quartic penalty from destabilizing fixed-step ascent


def _clip(grad: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(grad))
    if norm > GRAD_CLIP:
        return grad * (GRAD_CLIP / norm)
    return grad


@dataclass(frozen=True)
class AdmmParams:
    """Penalty weights and iteration budget for the alternating solver.

    ``subproblems`` picks the realization of the two argmax steps: "exact"
    reduces each to a scalar cubic root (both penalized subproblems are
    radially symmetric), "gradient" runs fixed-count clipped gradient ascent.
    """

    beta_gamma: float = 10.0
    beta_rho: float = 10.0
    max_outer_iters: int = 300
    inner_steps: int = 25
    inner_step_size: float = 0.05
    tol: float = 2e-4
    subproblems: str = "exact"

    def __post_init__(self):
        if self.beta_gamma <= 0 or self.beta_rho <= 0:
            raise InvalidInputError("penalty weights must be positive")
        if self.max_outer_iters < 1 or self.inner_steps < 1:
            raise InvalidInputError("iteration counts must be >= 1")
        if self.tol <= 0 or self.inner_step_size <= 0:
            raise InvalidInputError("tolerance and step size must be positive")
        if self.subproblems not in ("exact", "gradient"):
            raise InvalidInputError("subproblems must be 'exact' or 'gradient'")


@dataclass
class OcopSolution:
    """One arm's (or the overall) optimistic solution with solver diagnostics."""

    action: int
    recourse: Context
    value: float
    path: str  # "admm" | "exact-reduction" | "boundary-search"
    iterations: int = 0
    converged: bool = True
    final_violation: float = 0.0
    violations: list[float] = field(default_factory=list)


def ucb_objective(est: ArmEstimate, rho: float, x: Context) -> float:
    """Optimistic value of a fixed context: the ellipsoid max of x^T theta."""
    if rho < 0:
        raise InvalidInputError("radius must be nonnegative")
    return est_mod.ucb(est, x.full, rho)


def _objective_grad_mutable(est: ArmEstimate, rho: float, x_full: np.ndarray, d_i: int) -> np.ndarray:
    """Gradient of the optimistic objective w.r.t. the mutable coordinates."""
    vinv_x = est.V_inv @ x_full
    norm = math.sqrt(max(float(x_full @ vinv_x), 0.0))
    grad = est.theta_hat.copy()
    if norm > 0:
        grad += rho * vinv_x / norm
    return grad[d_i:]


def _radial_root(c: float, lam: float, beta: float) -> float:
    """Positive root of 2*beta*v^3 - 2*lam*v = c by Newton's method.

    With lam <= 0 the left side is strictly increasing on v >= 0, so the
    root is unique; it is the constraint overshoot of a penalized radial
    subproblem whose linear term has magnitude c.
    """
    if c <= 0.0:
        return 0.0
    v = max((c / (2.0 * beta)) ** (1.0 / 3.0), 1e-12)
    for _ in range(60):
        f = 2.0 * beta * v * v * v - 2.0 * lam * v - c
        v -= f / (6.0 * beta * v * v - 2.0 * lam)
        if abs(f) < 1e-14:
            break
    return max(v, 0.0)


def admm_solve(
    est: ArmEstimate,
    rho: float,
    x: Context,
    dist: TwoNormBudget,
    params: AdmmParams | None = None,
    action: int = 0,
) -> OcopSolution:
    """Alternating multiplier scheme on the penalized optimistic objective.

    Both the budget constraint and the ellipsoid constraint are handled by
    squared-hinge penalty terms; the multipliers start at zero and take a
    penalty-sized step each outer iteration. Each subproblem is radially
    symmetric about its constraint center, so the default realization solves
    it exactly via a scalar cubic root; the gradient realization runs a fixed
    number of clipped ascent steps instead. On non-convergence the best
    feasible iterate seen is returned with a diagnostic flag; the final
    recourse is always projected into the budget.

    The alternation is run from two parameter starts — the point estimate and
    the ellipsoid max at the unmodified context — and the better final value
    is kept, guarding against the non-global stationary point the single-start
    scheme can lock onto when the mutable block is low-dimensional.
    """
    if not isinstance(dist, TwoNormBudget):
        raise InvalidInputError("the alternating solver handles two-norm budgets only")
    params = params or AdmmParams()
    gamma = dist.gamma

    if gamma == 0.0:
        return OcopSolution(action, x, ucb_objective(est, rho, x), path="admm")

    theta_starts = [est.theta_hat.copy()]
    vinv_x0 = est.V_inv @ x.full
    n0 = math.sqrt(max(float(x.full @ vinv_x0), 0.0))
    if n0 > 0.0:
        theta_starts.append(est.theta_hat + rho * vinv_x0 / n0)

    best: OcopSolution | None = None
    for theta0 in theta_starts:
        sol = _admm_once(est, rho, x, dist, params, theta0, action)
        if best is None or sol.value > best.value:
            best = sol
    assert best is not None
    return best


def _admm_once(
    est: ArmEstimate,
    rho: float,
    x: Context,
    dist: TwoNormBudget,
    params: AdmmParams,
    theta0: np.ndarray,
    action: int,
) -> OcopSolution:
    gamma = dist.gamma
    x_m0 = x.mutable
    d_i = x.immutable.size

    xm = x_m0.copy()
    theta = theta0.copy()
    lam_g = 0.0
    lam_r = 0.0
    V = est.V
    theta_hat = est.theta_hat

    violations: list[float] = []
    best_val = ucb_objective(est, rho, x)
    best_xm = x_m0.copy()
    converged = False
    iters = 0

    for k in range(params.max_outer_iters):
        iters = k + 1
        xm_prev = xm.copy()
        theta_prev = theta.copy()

        if params.subproblems == "exact":
            # modification subproblem: the penalized max lies on the ray from
            # the original mutable part along theta_M, at budget + overshoot
            tm = theta[d_i:]
            tn = float(np.linalg.norm(tm))
            if tn > 0.0:
                v = _radial_root(tn, lam_g, params.beta_gamma)
                xm = x_m0 + (gamma + v) * tm / tn
            # parameter subproblem at the freshest modification iterate: the
            # penalized max sits at radius + overshoot along V^{-1} x
            x_full = np.concatenate([x.immutable, xm])
            vinv_x = est.V_inv @ x_full
            xn = math.sqrt(max(float(x_full @ vinv_x), 0.0))
            if xn > 0.0:
                v = _radial_root(xn, lam_r, params.beta_rho)
                theta = theta_hat + (rho + v) * vinv_x / xn
        else:
            # modification subproblem at the current parameter iterate
            for _ in range(params.inner_steps):
                delta = xm - x_m0
                dn = np.linalg.norm(delta)
                viol = max(dn - gamma, 0.0)
                grad = theta[d_i:].copy()
                if viol > 0 and dn > 0:
                    grad += (lam_g - params.beta_gamma * viol * viol) * 2.0 * viol * delta / dn
                xm = xm + params.inner_step_size * _clip(grad)

            # parameter subproblem at the freshest modification iterate
            x_full = np.concatenate([x.immutable, xm])
            for _ in range(params.inner_steps):
                dtheta = theta - theta_hat
                vd = V @ dtheta
                m = math.sqrt(max(float(dtheta @ vd), 0.0))
                viol = max(m - rho, 0.0)
                grad = x_full.copy()
                if viol > 0 and m > 0:
                    grad += (lam_r - params.beta_rho * viol * viol) * 2.0 * viol * vd / m
                theta = theta + params.inner_step_size * _clip(grad)

        # multiplier steps, penalty-sized as in the alternating scheme
        viol_g = max(float(np.linalg.norm(xm - x_m0)) - gamma, 0.0)
        dtheta = theta - theta_hat
        viol_r = max(math.sqrt(max(float(dtheta @ (V @ dtheta)), 0.0)) - rho, 0.0)
        lam_g -= params.beta_gamma * viol_g * viol_g
        lam_r -= params.beta_rho * viol_r * viol_r

        violations.append(max(viol_g, viol_r))

        feasible_xm = dist.project(xm, x_m0)
        val = ucb_objective(est, rho, x.with_mutable(feasible_xm))
        if val > best_val:
            best_val = val
            best_xm = feasible_xm

        step = float(np.linalg.norm(xm - xm_prev)) + float(np.linalg.norm(theta - theta_prev))
        if step < params.tol:
            converged = True
            break

    # the best feasible iterate along the trajectory (which includes the
    # projection of the final iterate) dominates the final iterate itself
    recourse = x.with_mutable(best_xm)
    value = ucb_objective(est, rho, recourse)
    return OcopSolution(
        action=action,
        recourse=recourse,
        value=value,
        path="admm",
        iterations=iters,
        converged=converged,
        final_violation=violations[-1] if violations else 0.0,
        violations=violations,
    )


def alternating_solve(
    est: ArmEstimate,
    rho: float,
    x: Context,
    dist: TwoNormBudget,
    max_iters: int = 60,
    tol: float = 1e-10,
    action: int = 0,
) -> OcopSolution:
    """Exact-reduction route for two-norm budgets.

    Alternates the two closed-form partial maximizers: the budget-ball max for
    a fixed parameter lands on x_M + gamma * dir(theta_M); the ellipsoid max
    for a fixed context is theta_hat + rho * V^{-1} x / ||x||_{V^{-1}}. Each
    step is monotone in the bilinear objective. Two deterministic starts guard
    against the rare non-global partial maximum.
    """
    gamma = dist.gamma
    if gamma == 0.0:
        return OcopSolution(action, x, ucb_objective(est, rho, x), path="exact-reduction")

    d_i = x.immutable.size
    starts: list[np.ndarray] = []
    if np.linalg.norm(est.theta_hat[d_i:]) > 0:
        dirn = est.theta_hat[d_i:]
        starts.append(x.mutable + gamma * dirn / np.linalg.norm(dirn))
    g0 = _objective_grad_mutable(est, rho, x.full, d_i)
    if np.linalg.norm(g0) > 0:
        starts.append(x.mutable + gamma * g0 / np.linalg.norm(g0))
    if not starts:
        starts.append(x.mutable + gamma * _unit_first(x.mutable.size))

    best: OcopSolution | None = None
    for xm0 in starts:
        xm = xm0
        iters = 0
        for k in range(max_iters):
            iters = k + 1
            x_full = np.concatenate([x.immutable, xm])
            vinv_x = est.V_inv @ x_full
            norm = math.sqrt(max(float(x_full @ vinv_x), 0.0))
            theta = est.theta_hat + (rho * vinv_x / norm if norm > 0 else 0.0)
            tm = theta[d_i:]
            tn = np.linalg.norm(tm)
            if tn == 0.0:
                break
            xm_next = x.mutable + gamma * tm / tn
            if np.linalg.norm(xm_next - xm) < tol:
                xm = xm_next
                break
            xm = xm_next
        recourse = x.with_mutable(dist.project(xm, x.mutable))
        value = ucb_objective(est, rho, recourse)
        if best is None or value > best.value:
            best = OcopSolution(action, recourse, value, path="exact-reduction", iterations=iters)
    assert best is not None
    return best


def _unit_first(d: int) -> np.ndarray:
    u = np.zeros(d)
    u[0] = 1.0
    return u


def exact_boundary_search(
    est: ArmEstimate,
    rho: float,
    x: Context,
    dist: TwoNormBudget,
    n_starts: int = 16,
    n_iters: int = 300,
    seed: int = 0,
    action: int = 0,
) -> OcopSolution:
    """Multi-start projected gradient ascent over the budget sphere.

    The optimistic objective is convex in the context, so the ball maximum
    lies on the boundary; each start ascends the sphere-parameterized
    objective with a decaying step. Serves as the verification oracle for
    the other routes.
    """
    gamma = dist.gamma
    if gamma == 0.0:
        return OcopSolution(action, x, ucb_objective(est, rho, x), path="boundary-search")

    rng = np.random.default_rng(seed)
    d_m = x.mutable.size
    d_i = x.immutable.size

    starts = [rng.standard_normal(d_m) for _ in range(n_starts)]
    if np.linalg.norm(est.theta_hat[d_i:]) > 0:
        starts.append(est.theta_hat[d_i:].copy())
    g0 = _objective_grad_mutable(est, rho, x.full, d_i)
    if np.linalg.norm(g0) > 0:
        starts.append(g0)

    best_val = -math.inf
    best_u: np.ndarray | None = None
    for u0 in starts:
        n0 = np.linalg.norm(u0)
        if n0 == 0.0:
            continue
        u = u0 / n0
        for it in range(n_iters):
            xm = x.mutable + gamma * u
            grad = _objective_grad_mutable(est, rho, np.concatenate([x.immutable, xm]), d_i)
            lr = 0.5 / (1.0 + 0.05 * it)
            v = u + lr * grad
            nv = np.linalg.norm(v)
            if nv == 0.0:
                break
            u_next = v / nv
            if np.linalg.norm(u_next - u) < 1e-12:
                u = u_next
                break
            u = u_next
        val = ucb_objective(est, rho, x.with_mutable(x.mutable + gamma * u))
        if val > best_val:
            best_val = val
            best_u = u
    assert best_u is not None
    recourse = x.with_mutable(x.mutable + gamma * best_u)
    return OcopSolution(action, recourse, best_val, path="boundary-search")


def solve_box(est: ArmEstimate, rho: float, x: Context, dist: BoxBudget, action: int = 0) -> OcopSolution:
    """Box-budget route: vertex enumeration (d_M <= 12) or coordinate ascent.

    The objective is convex in the context, so the box maximum is attained at
    a vertex; small dimensions are enumerated exactly.
    """
    d_m = x.mutable.size
    if dist.gammas.shape != (d_m,):
        raise InvalidInputError("box radius vector length mismatch")
    if d_m <= 12:
        best_val = -math.inf
        best_xm = x.mutable
        free = [j for j in range(d_m) if dist.gammas[j] > 0]
        for signs in product((-1.0, 1.0), repeat=len(free)):
            xm = x.mutable.copy()
            for s, j in zip(signs, free):
                xm[j] += s * dist.gammas[j]
            val = ucb_objective(est, rho, x.with_mutable(xm))
            if val > best_val:
                best_val = val
                best_xm = xm
        return OcopSolution(action, x.with_mutable(best_xm), best_val, path="exact-reduction")
    # coordinate-wise ascent over vertex choices
    xm = x.mutable.copy()
    for _ in range(50):
        changed = False
        for j in range(d_m):
            if dist.gammas[j] == 0:
                continue
            vals = []
            for s in (-1.0, 1.0):
                cand = xm.copy()
                cand[j] = x.mutable[j] + s * dist.gammas[j]
                vals.append((ucb_objective(est, rho, x.with_mutable(cand)), s))
            _, s_best = max(vals)
            new_val = x.mutable[j] + s_best * dist.gammas[j]
            if new_val != xm[j]:
                xm[j] = new_val
                changed = True
        if not changed:
            break
    return OcopSolution(action, x.with_mutable(xm), ucb_objective(est, rho, x.with_mutable(xm)), path="exact-reduction")


def solve_action(
    est: ArmEstimate,
    rho: float,
    x: Context,
    dist: DistanceSpec,
    params: AdmmParams | None = None,
    method: str = "exact-reduction",
    action: int = 0,
) -> OcopSolution:
    """One arm's optimistic solve, dispatched on budget type and method."""
    if isinstance(dist, BoxBudget):
        return solve_box(est, rho, x, dist, action=action)
    if method == "admm":
        return admm_solve(est, rho, x, dist, params, action=action)
    return alternating_solve(est, rho, x, dist, action=action)


def select_ucb_recourse(
    arms: list[ArmEstimate],
    rhos: list[float],
    x: Context,
    dist: DistanceSpec,
    params: AdmmParams | None = None,
    method: str = "exact-reduction",
) -> OcopSolution:
    """Per-arm optimistic solve and argmax by optimistic value.

    Ties break toward the lowest action index; per-arm non-convergence is
    carried in diagnostics and never aborts the selection.
    """
    if not arms:
        raise InvalidInputError("need at least one arm")
    if len(rhos) != len(arms):
        raise InvalidInputError("one radius per arm is required")
    best: OcopSolution | None = None
    for a, (est, rho) in enumerate(zip(arms, rhos)):
        sol = solve_action(est, rho, x, dist, params=params, method=method, action=a)
        if best is None or sol.value > best.value:
            best = sol
    assert best is not None
    return best
