import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from recourse_bandit.harness import ExperimentConfig, build_environment, log_csv_text, run_episode
from recourse_bandit.human import ReplayOracle
from recourse_bandit.service import create_app

DECISION_FIELDS = {
    "action", "recourse", "ucb", "lcb", "ci", "source",
    "regret_step", "regret_cum", "queried", "adopted",
}


@pytest.fixture
def client():
    return TestClient(create_app())


def make_session(client, **overrides):
    body = {"horizon": 5, "seeds": [0], **overrides}
    r = client.post("/sessions", json=body)
    assert r.status_code == 200
    return r.json()["id"]


def answer_ai_candidate(client, sid, event):
    payload = event["payload"]
    d_i = payload["d_immutable"]
    return client.post(
        f"/sessions/{sid}/human",
        json={"action": payload["action"], "recourse": payload["recourse"][d_i:]},
    )


class TestLifecycle:
    def test_create_issues_distinct_ids(self, client):
        assert make_session(client) != make_session(client)

    def test_non_consulting_policies_are_rejected(self, client):
        r = client.post("/sessions", json={"policies": ["linucb"], "seeds": [0]})
        assert r.status_code == 422

    def test_multi_seed_sessions_are_rejected(self, client):
        r = client.post("/sessions", json={"seeds": [0, 1]})
        assert r.status_code == 422

    def test_unknown_session_is_404(self, client):
        assert client.post("/sessions/nope/advance").status_code == 404

    def test_session_finishes_after_the_horizon(self, client):
        sid = make_session(client, horizon=2)
        for _ in range(2):
            event = client.post(f"/sessions/{sid}/advance").json()
            if event["type"] == "query":
                answer_ai_candidate(client, sid, event)
        snap = client.get(f"/sessions/{sid}").json()
        assert snap["phase"] == "Finished"
        assert client.post(f"/sessions/{sid}/advance").status_code == 409


class TestPhaseMachine:
    def test_query_event_carries_the_bound_fields(self, client):
        sid = make_session(client)
        event = client.post(f"/sessions/{sid}/advance").json()
        assert event["type"] == "query"  # a fresh estimator always consults
        for key in ("context", "action", "recourse", "ucb", "lcb", "ci", "constraint"):
            assert key in event["payload"]
        assert event["payload"]["constraint"]["kind"] == "two-norm"

    def test_advance_conflicts_while_awaiting_a_human(self, client):
        sid = make_session(client, timeout=60)
        client.post(f"/sessions/{sid}/advance")
        assert client.post(f"/sessions/{sid}/advance").status_code == 409

    def test_submit_without_a_pending_query_conflicts(self, client):
        sid = make_session(client)
        r = client.post(f"/sessions/{sid}/human", json={"action": 0, "recourse": [0.0] * 5})
        assert r.status_code == 409

    def test_step_events_expose_the_pinned_decision_fields(self, client):
        sid = make_session(client)
        event = client.post(f"/sessions/{sid}/advance").json()
        step = answer_ai_candidate(client, sid, event).json()
        assert step["type"] == "step"
        assert DECISION_FIELDS <= set(step["payload"])


class TestSubmissionValidation:
    def test_infeasible_recourse_names_the_constraint_and_excess(self, client):
        sid = make_session(client, gamma=1.0)
        event = client.post(f"/sessions/{sid}/advance").json()
        base = np.array(event["payload"]["context"])
        r = client.post(
            f"/sessions/{sid}/human",
            json={"action": 0, "recourse": (base + 3.0).tolist()},
        )
        assert r.status_code == 422
        detail = r.json()["detail"]
        assert detail["constraint"] == "two-norm"
        assert detail["gamma"] == 1.0
        assert detail["excess"] > 0

    def test_out_of_range_action_rejected(self, client):
        sid = make_session(client)
        event = client.post(f"/sessions/{sid}/advance").json()
        xm = event["payload"]["context"]
        r = client.post(f"/sessions/{sid}/human", json={"action": 9, "recourse": xm})
        assert r.status_code == 422

    def test_wrong_length_recourse_rejected(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/advance")
        r = client.post(f"/sessions/{sid}/human", json={"action": 0, "recourse": [0.0]})
        assert r.status_code == 422

    def test_full_vector_submission_must_keep_immutables(self, client):
        sid = make_session(client, env="fertility")
        event = client.post(f"/sessions/{sid}/advance").json()
        full = list(event["payload"]["context"])
        full[0] += 1.0  # tamper with the immutable intercept
        r = client.post(f"/sessions/{sid}/human", json={"action": 0, "recourse": full})
        assert r.status_code == 422

    def test_stale_submission_after_the_deadline(self, client):
        sid = make_session(client, timeout=0.02)
        event = client.post(f"/sessions/{sid}/advance").json()
        assert event["type"] == "query"
        time.sleep(0.05)
        r = answer_ai_candidate(client, sid, event)
        assert r.status_code == 409
        assert "stale" in r.json()["detail"]["error"]
        # the step completed with the AI decision
        snap = client.get(f"/sessions/{sid}").json()
        assert snap["t"] == 2
        import csv
        import io

        log = client.get(f"/sessions/{sid}/log").text
        rows = list(csv.DictReader(io.StringIO(log)))
        assert rows[0]["source"] == "AI"

    def test_expired_deadline_lets_advance_complete_the_step(self, client):
        sid = make_session(client, timeout=0.02)
        client.post(f"/sessions/{sid}/advance")
        time.sleep(0.05)
        event = client.post(f"/sessions/{sid}/advance").json()
        assert event["type"] == "step"
        assert event["payload"]["source"] == "AI"


class TestStreamAndLog:
    def test_stream_replays_history_and_orders_events(self, client):
        sid = make_session(client, horizon=3)
        for _ in range(3):
            event = client.post(f"/sessions/{sid}/advance").json()
            if event["type"] == "query":
                answer_ai_candidate(client, sid, event)
        with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
            events = []
            while True:
                event = ws.receive_json()
                events.append(event)
                if event["type"] == "finished":
                    break
        steps = [e["t"] for e in events if e["type"] == "step"]
        assert steps == [1, 2, 3]  # each step exactly once, in order
        assert events[-1]["type"] == "finished"

    def test_scripted_session_matches_the_replay_oracle(self, client):
        T = 8
        config = ExperimentConfig(policies=("hr",), horizon=T, seeds=(3,))
        env = build_environment(config)
        sid = make_session(client, horizon=T, seeds=[3])
        rng = np.random.default_rng(17)
        entries = []
        while True:
            r = client.post(f"/sessions/{sid}/advance")
            if r.status_code != 200:
                break
            event = r.json()
            if event["type"] == "query":
                p = event["payload"]
                d_i = p["d_immutable"]
                base = np.array(p["context"][d_i:])
                direction = rng.standard_normal(base.size)
                xm = base + 0.8 * direction / np.linalg.norm(direction)
                entries.append({
                    "t": len(entries) + 1,
                    "action": int(rng.integers(env.model.n_actions)),
                    "recourse": [float(v) for v in xm],
                })
                client.post(
                    f"/sessions/{sid}/human",
                    json={"action": entries[-1]["action"], "recourse": entries[-1]["recourse"]},
                )
            if client.get(f"/sessions/{sid}").json()["phase"] == "Finished":
                break
        service_csv = client.get(f"/sessions/{sid}/log").text
        replay_log = run_episode(env, "hr", 3, config, oracle=ReplayOracle(entries))
        assert service_csv == log_csv_text(replay_log)
