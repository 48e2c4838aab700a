import math

import numpy as np
import pytest

from recourse_bandit.errors import InvalidInputError
from recourse_bandit.estimator import ConfidenceParams
from recourse_bandit.harness import ExperimentConfig, build_environment, confidence_params, run_episode
from recourse_bandit.human import EchoOracle, OracleError
from recourse_bandit.model import Context, TwoNormBudget
from recourse_bandit.policies import (
    Decision,
    hr_bandit_step,
    linucb_step,
    make_policy_state,
    observe,
    rlinucb_step,
    step,
)


def _state(kind="rlinucb", d=3, n_actions=2, **kwargs):
    conf = ConfidenceParams(beta_theta=1.0, beta_x=2.0, delta=0.05, n_actions=n_actions)
    return make_policy_state(kind=kind, d=d, conf=conf, dist=TwoNormBudget(1.0), **kwargs)


@pytest.fixture
def x():
    return Context(np.array([0.3]), np.array([0.5, -0.2]))


class FixedOracle:
    """Always proposes the given (mutable part, action)."""

    def __init__(self, xm, action):
        self.xm = np.asarray(xm, dtype=float)
        self.action = action

    def propose(self, x, ai_candidate=None):
        return x.with_mutable(self.xm), self.action


class FailingOracle:
    def propose(self, x, ai_candidate=None):
        raise OracleError("down")


class TestSteps:
    def test_linucb_keeps_the_context_unmodified(self, x):
        decision = linucb_step(_state("linucb"), x)
        np.testing.assert_array_equal(decision.recourse.full, x.full)
        assert decision.source == "AI"

    def test_rlinucb_modifies_within_the_budget(self, x):
        state = _state()
        decision = rlinucb_step(state, x)
        assert state.dist.feasible(decision.recourse.mutable, x.mutable)
        np.testing.assert_array_equal(decision.recourse.immutable, x.immutable)

    def test_interval_fields_are_consistent(self, x):
        decision = rlinucb_step(_state(), x)
        assert decision.ucb >= decision.lcb
        assert decision.ucb - decision.lcb == pytest.approx(2 * decision.ci)

    def test_dispatch_matches_the_kind(self, x):
        assert step(_state("linucb"), x).recourse.full.tolist() == x.full.tolist()
        with pytest.raises(InvalidInputError):
            step(_state("hr"), x)  # oracle required
        with pytest.raises(InvalidInputError):
            step(_state("bogus"), x)


class TestConsultation:
    def test_wide_intervals_trigger_a_query(self, x):
        state = _state("hr", delta_consult=0.1)
        decision = hr_bandit_step(state, x, FixedOracle([0.5, -0.2], 0))
        assert decision.queried
        assert state.human_queries == 1

    def test_tight_threshold_skips_the_query(self, x):
        state = _state("hr", delta_consult=math.inf)
        decision = hr_bandit_step(state, x, FailingOracle())
        assert not decision.queried
        assert state.human_queries == 0

    def test_oracle_failure_falls_back_to_ai(self, x):
        state = _state("hr", delta_consult=0.1)
        decision = hr_bandit_step(state, x, FailingOracle())
        assert decision.queried and decision.oracle_failed
        assert decision.source == "AI"
        assert state.human_queries == 1  # consults are counted even on failure

    def test_out_of_range_action_is_treated_as_failure(self, x):
        state = _state("hr", delta_consult=0.1)
        decision = hr_bandit_step(state, x, FixedOracle([0.5, -0.2], 7))
        assert decision.oracle_failed and decision.source == "AI"

    def test_infeasible_proposal_is_projected_and_flagged(self, x):
        state = _state("hr", delta_consult=0.1)
        decision = hr_bandit_step(state, x, FixedOracle([10.0, 10.0], 0))
        assert decision.proposal_projected
        if decision.adopted:
            assert state.dist.feasible(decision.recourse.mutable, x.mutable)

    def test_adoption_requires_a_tighter_proposal(self, x):
        # an arm the AI knows well: proposals there have small CI and can win;
        # a fresh state has equal CIs, so zeta<1 blocks adoption
        state = _state("hr", delta_consult=0.1, zeta=0.5)
        decision = hr_bandit_step(state, x, FixedOracle([0.5, -0.2], 0))
        assert not decision.adopted

    def test_adopted_decision_reports_human_bounds(self, x):
        state = _state("hr", delta_consult=0.1, zeta=10.0)
        decision = hr_bandit_step(state, x, FixedOracle([0.5, -0.2], 1))
        assert decision.human_action == 1
        if decision.adopted:
            assert decision.source == "Human"
            assert decision.ucb == decision.human_ucb


class TestObserve:
    def test_updates_only_the_chosen_arm(self, x):
        state = _state()
        decision = rlinucb_step(state, x)
        other = 1 - decision.action
        before = state.arms[other]
        observe(state, decision, 1.0)
        assert state.arms[decision.action].n == 1
        assert state.arms[other] is before

    def test_rejects_non_finite_rewards(self, x):
        state = _state()
        decision = rlinucb_step(state, x)
        with pytest.raises(InvalidInputError):
            observe(state, decision, math.nan)


class TestEquivalences:
    def test_infinite_consult_threshold_reduces_to_rlinucb(self):
        config = ExperimentConfig(policies=("rlinucb", "hr"), horizon=40, seeds=(0,), delta_consult=math.inf)
        env = build_environment(config)
        conf = confidence_params(env, config)
        log_r = run_episode(env, "rlinucb", 0, config, conf=conf)
        log_h = run_episode(env, "hr", 0, config, conf=conf)
        for rec_r, rec_h in zip(log_r.records, log_h.records):
            assert rec_r.action == rec_h.action
            assert rec_r.recourse == rec_h.recourse
            assert rec_r.regret_step == rec_h.regret_step
        assert log_h.total_queries == 0

    def test_echo_oracle_matches_rlinucb_regret_exactly(self):
        config = ExperimentConfig(policies=("rlinucb", "hr"), horizon=40, seeds=(1,))
        env = build_environment(config)
        conf = confidence_params(env, config)
        log_r = run_episode(env, "rlinucb", 1, config, conf=conf)
        log_h = run_episode(env, "hr", 1, config, conf=conf, oracle=EchoOracle())
        assert log_h.cumulative_regret == log_r.cumulative_regret


class TestValidation:
    def test_negative_consult_threshold_rejected(self):
        with pytest.raises(InvalidInputError):
            _state("hr", delta_consult=-1.0)

    def test_nonpositive_adoption_gate_rejected(self):
        with pytest.raises(InvalidInputError):
            _state("hr", zeta=0.0)
