"""Decision policies: action-only UCB, recourse UCB, and the human-consulting variant.

All three share the per-arm ridge estimates and expose the same step/observe
interface: ``*_step`` produces a Decision for the incoming context, ``observe``
folds the realized reward into the chosen arm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import estimator as est_mod
from .errors import InvalidInputError
from .estimator import ArmEstimate, ConfidenceParams, new_arm, radius
from .human import HumanOracle, OracleError, OracleTimeout
from .model import Context, DistanceSpec
from .ocop import AdmmParams, OcopSolution, select_ucb_recourse

SOURCE_AI = "AI"
SOURCE_HUMAN = "Human"


@dataclass
class PolicyState:
    """Mutable per-session policy state: one ridge estimate per arm."""

    arms: list[ArmEstimate]
    conf: ConfidenceParams
    dist: DistanceSpec
    kind: str = "rlinucb"  # linucb | rlinucb | hr
    delta_consult: float = 1.0  # consult threshold on the AI interval width
    zeta: float = 3.0  # uncertainty-ratio gate for adopting a human proposal
    human_queries: int = 0
    solver_method: str = "exact-reduction"
    solver_params: AdmmParams = field(default_factory=AdmmParams)

    def __post_init__(self):
        if self.delta_consult < 0:
            raise InvalidInputError("consult threshold must be >= 0")
        if self.zeta <= 0:
            raise InvalidInputError("uncertainty-ratio gate must be > 0")
        if len(self.arms) != self.conf.n_actions:
            raise InvalidInputError("arm list length must match the action count")

    def rhos(self) -> list[float]:
        return [radius(arm, self.conf) for arm in self.arms]


def make_policy_state(
    kind: str,
    d: int,
    conf: ConfidenceParams,
    dist: DistanceSpec,
    delta_consult: float = 1.0,
    zeta: float = 3.0,
    solver_method: str = "exact-reduction",
    solver_params: AdmmParams | None = None,
) -> PolicyState:
    return PolicyState(
        arms=[new_arm(d) for _ in range(conf.n_actions)],
        conf=conf,
        dist=dist,
        kind=kind,
        delta_consult=delta_consult,
        zeta=zeta,
        solver_method=solver_method,
        solver_params=solver_params or AdmmParams(),
    )


@dataclass
class Decision:
    """A policy's output for one step, with the bounds that produced it."""

    context: Context
    action: int
    recourse: Context
    source: str
    ucb: float
    lcb: float
    ci: float
    queried: bool = False
    adopted: bool = False
    human_action: int | None = None
    human_ucb: float | None = None
    human_lcb: float | None = None
    human_ci: float | None = None
    oracle_failed: bool = False
    proposal_projected: bool = False
    solver_converged: bool = True


def _bounds(state: PolicyState, a: int, x_full: np.ndarray) -> tuple[float, float, float]:
    rho = radius(state.arms[a], state.conf)
    u = est_mod.ucb(state.arms[a], x_full, rho)
    l = est_mod.lcb(state.arms[a], x_full, rho)
    c = est_mod.ci(state.arms[a], x_full, rho)
    return u, l, c


def linucb_step(state: PolicyState, x: Context) -> Decision:
    """Action-only baseline: argmax UCB at the unmodified context."""
    best_a = 0
    best_u = -math.inf
    for a in range(len(state.arms)):
        u, _, _ = _bounds(state, a, x.full)
        if u > best_u:
            best_u = u
            best_a = a
    u, l, c = _bounds(state, best_a, x.full)
    return Decision(context=x, action=best_a, recourse=x, source=SOURCE_AI, ucb=u, lcb=l, ci=c)


def _ucb_solution(state: PolicyState, x: Context) -> OcopSolution:
    return select_ucb_recourse(
        state.arms,
        state.rhos(),
        x,
        state.dist,
        params=state.solver_params,
        method=state.solver_method,
    )


def rlinucb_step(state: PolicyState, x: Context) -> Decision:
    """Joint action + modification by the optimistic recourse solve."""
    sol = _ucb_solution(state, x)
    u, l, c = _bounds(state, sol.action, sol.recourse.full)
    return Decision(
        context=x,
        action=sol.action,
        recourse=sol.recourse,
        source=SOURCE_AI,
        ucb=u,
        lcb=l,
        ci=c,
        solver_converged=sol.converged,
    )


def hr_bandit_step(state: PolicyState, x: Context, oracle: HumanOracle) -> Decision:
    """Recourse UCB with a consult-and-adopt layer.

    The expert is consulted when the AI candidate's interval width exceeds the
    consult threshold; the proposal is adopted only when its upper bound beats
    the AI's lower bound and the AI's uncertainty is below ``zeta`` times the
    proposal's. Oracle failures fall back to the AI decision.
    """
    sol = _ucb_solution(state, x)
    u_ai, l_ai, c_ai = _bounds(state, sol.action, sol.recourse.full)
    decision = Decision(
        context=x,
        action=sol.action,
        recourse=sol.recourse,
        source=SOURCE_AI,
        ucb=u_ai,
        lcb=l_ai,
        ci=c_ai,
        solver_converged=sol.converged,
    )
    if not (2.0 * c_ai > state.delta_consult):
        return decision

    decision.queried = True
    state.human_queries += 1
    try:
        proposal, a_h = oracle.propose(x, ai_candidate=sol)
    except (OracleTimeout, OracleError):
        decision.oracle_failed = True
        return decision
    if not 0 <= a_h < len(state.arms):
        decision.oracle_failed = True
        return decision

    # proposals keep the immutable part of the incoming context; infeasible
    # mutable parts are projected into the budget and flagged
    xm = proposal.mutable
    if not state.dist.feasible(xm, x.mutable):
        xm = state.dist.project(xm, x.mutable)
        decision.proposal_projected = True
    x_h = x.with_mutable(xm)

    u_h, l_h, c_h = _bounds(state, a_h, x_h.full)
    decision.human_action = a_h
    decision.human_ucb = u_h
    decision.human_lcb = l_h
    decision.human_ci = c_h

    if c_ai < state.zeta * c_h and u_h > l_ai:
        decision.adopted = True
        decision.source = SOURCE_HUMAN
        decision.action = a_h
        decision.recourse = x_h
        decision.ucb = u_h
        decision.lcb = l_h
        decision.ci = c_h
    return decision


def observe(state: PolicyState, decision: Decision, reward: float) -> PolicyState:
    """Fold the realized reward into the chosen arm's estimate."""
    if not math.isfinite(reward):
        raise InvalidInputError("non-finite reward")
    a = decision.action
    state.arms[a] = est_mod.update(state.arms[a], decision.recourse.full, reward)
    return state


def step(state: PolicyState, x: Context, oracle: HumanOracle | None = None) -> Decision:
    """Dispatch on the policy kind."""
    if state.kind == "linucb":
        return linucb_step(state, x)
    if state.kind == "rlinucb":
        return rlinucb_step(state, x)
    if state.kind == "hr":
        if oracle is None:
            raise InvalidInputError("the human-consulting policy needs an oracle")
        return hr_bandit_step(state, x, oracle)
    raise InvalidInputError(f"unknown policy kind: {state.kind}")
