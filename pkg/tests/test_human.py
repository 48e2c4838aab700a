import queue

import numpy as np
import pytest

from recourse_bandit.errors import InvalidInputError
from recourse_bandit.human import (
    EchoOracle,
    LiveOracle,
    OracleError,
    OracleTimeout,
    ReplayOracle,
    SimulatedExpert,
    load_replay_script,
    propose_replay,
    queue_fetch,
)
from recourse_bandit.model import Context, RewardModel, TwoNormBudget, solve_cop


@pytest.fixture
def model():
    rng = np.random.default_rng(0)
    return RewardModel(thetas=rng.standard_normal((2, 3)), d_immutable=1)


@pytest.fixture
def context():
    return Context(np.array([0.5]), np.array([1.0, -1.0]))


class TestSimulatedExpert:
    def test_perfect_expert_returns_the_optimum(self, model, context):
        dist = TwoNormBudget(1.0)
        expert = SimulatedExpert(q=1.0, model=model, dist=dist, rng=np.random.default_rng(1))
        recourse, action = expert.propose(context)
        best = solve_cop(model, context, dist)
        assert action == best.action
        np.testing.assert_allclose(recourse.full, best.recourse.full)

    def test_useless_expert_is_feasible_but_random(self, model, context):
        dist = TwoNormBudget(1.0)
        expert = SimulatedExpert(q=0.0, model=model, dist=dist, rng=np.random.default_rng(2))
        actions = set()
        for _ in range(50):
            recourse, action = expert.propose(context)
            assert dist.feasible(recourse.mutable, context.mutable)
            np.testing.assert_array_equal(recourse.immutable, context.immutable)
            actions.add(action)
        assert actions == {0, 1}  # uniform over all actions, optimum included

    def test_deterministic_under_a_fixed_stream(self, model, context):
        dist = TwoNormBudget(1.0)
        a = SimulatedExpert(q=0.5, model=model, dist=dist, rng=np.random.default_rng(3))
        b = SimulatedExpert(q=0.5, model=model, dist=dist, rng=np.random.default_rng(3))
        for _ in range(10):
            ra, aa = a.propose(context)
            rb, ab = b.propose(context)
            assert aa == ab
            np.testing.assert_array_equal(ra.full, rb.full)

    def test_quality_outside_unit_interval_rejected(self, model):
        with pytest.raises(InvalidInputError):
            SimulatedExpert(q=1.5, model=model, dist=TwoNormBudget(1.0), rng=np.random.default_rng(0))


class TestReplay:
    def test_scripted_proposal_returned_verbatim(self, context):
        script = [{"t": 1, "action": 1, "recourse": [0.2, 0.3]}]
        recourse, action = propose_replay(script, 1, context)
        assert action == 1
        np.testing.assert_array_equal(recourse.mutable, [0.2, 0.3])
        np.testing.assert_array_equal(recourse.immutable, context.immutable)

    def test_missing_entry_raises(self, context):
        with pytest.raises(OracleError):
            propose_replay([], 1, context)

    def test_oracle_consumes_entries_in_query_order(self, context):
        script = [
            {"t": 1, "action": 0, "recourse": [0.0, 0.0]},
            {"t": 2, "action": 1, "recourse": [1.0, 1.0]},
        ]
        oracle = ReplayOracle(script)
        _, a1 = oracle.propose(context)
        _, a2 = oracle.propose(context)
        assert (a1, a2) == (0, 1)

    def test_script_loading_validates_fields(self, tmp_path):
        good = tmp_path / "good.json"
        good.write_text('[{"t": 1, "action": 0, "recourse": [0.5]}]')
        assert load_replay_script(str(good))[0]["action"] == 0
        bad = tmp_path / "bad.json"
        bad.write_text('[{"t": 1}]')
        with pytest.raises(InvalidInputError):
            load_replay_script(str(bad))
        not_array = tmp_path / "obj.json"
        not_array.write_text('{"t": 1}')
        with pytest.raises(InvalidInputError):
            load_replay_script(str(not_array))


class TestEchoAndLive:
    def test_echo_returns_the_ai_candidate(self, context):
        class Candidate:
            recourse = context
            action = 1

        recourse, action = EchoOracle().propose(context, ai_candidate=Candidate())
        assert action == 1
        assert recourse is context

    def test_echo_without_candidate_fails(self, context):
        with pytest.raises(OracleError):
            EchoOracle().propose(context)

    def test_live_oracle_times_out_on_an_empty_queue(self, context):
        submissions = queue.Queue()
        oracle = LiveOracle(fetch=queue_fetch(submissions), timeout=0.01)
        with pytest.raises(OracleTimeout):
            oracle.propose(context)

    def test_live_oracle_relays_a_submission(self, context):
        submissions = queue.Queue()
        submissions.put((context, 1))
        oracle = LiveOracle(fetch=queue_fetch(submissions), timeout=1.0)
        recourse, action = oracle.propose(context)
        assert (recourse, action) == (context, 1)
