"""Live session service: run human-consulting episodes over HTTP so an
expert console can answer consultation queries.

A session is a single-seed episode driven step by step. ``advance`` executes
the next step up to the consultation point; if the policy decides to consult,
the session parks in ``AwaitingHuman`` with a pending query payload and a
deadline, otherwise the step completes immediately. A human submission that
arrives before the deadline is evaluated by the adoption rule; an expired
deadline falls back to the AI decision (completed lazily, and the late
submission is rejected as stale).

Event and field naming contract (consumed by the console):
events are {type: step|query|finished, t, payload}; decision payloads carry
action, recourse, ucb, lcb, ci, source, regret_step, regret_cum, queried,
adopted. All vectors are JSON float arrays.
"""

from __future__ import annotations

import asyncio
import time
import uuid
from dataclasses import dataclass, field, replace

import numpy as np
from fastapi import FastAPI, HTTPException, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse

from .environments import Environment, context_stream, realize
from .errors import ConfigError, DataError, InvalidInputError
from .harness import (
    ExperimentConfig,
    RunLog,
    StepRecord,
    build_environment,
    confidence_params,
    default_data_paths,
    log_csv_text,
)
from .human import OracleTimeout
from .model import Context, TwoNormBudget, expected_reward, solve_cop
from .ocop import AdmmParams
from .policies import PolicyState, hr_bandit_step, make_policy_state, observe
from .policies import _bounds, _ucb_solution  # shared decision math

PHASE_AWAITING_STEP = "AwaitingStep"
PHASE_AWAITING_HUMAN = "AwaitingHuman"
PHASE_FINISHED = "Finished"


class _OneShotOracle:
    """Returns a fixed proposal exactly once; used to complete a parked step."""

    def __init__(self, recourse: Context, action: int):
        self._answer = (recourse, action)

    def propose(self, x: Context, ai_candidate=None):
        return self._answer


class _TimeoutOracle:
    """Always times out; used for the AI-fallback completion."""

    def propose(self, x: Context, ai_candidate=None):
        raise OracleTimeout("expert deadline elapsed")


@dataclass
class Session:
    id: str
    config: ExperimentConfig
    env: Environment
    state: PolicyState
    stream: object  # context iterator
    reward_rng: np.random.Generator
    timeout: float
    t: int = 1
    phase: str = PHASE_AWAITING_STEP
    pending_context: Context | None = None
    deadline: float | None = None
    regret_cum: float = 0.0
    records: list[StepRecord] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    subscribers: list[asyncio.Queue] = field(default_factory=list)
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)

    @property
    def horizon(self) -> int:
        return self.config.horizon

    def run_log(self) -> RunLog:
        from .harness import _config_echo

        return RunLog(
            policy="hr",
            seed=self.config.seeds[0],
            records=self.records,
            total_queries=self.state.human_queries,
            config_echo=_config_echo(self.config),
        )


def _emit(session: Session, event: dict) -> None:
    session.events.append(event)
    for q in session.subscribers:
        q.put_nowait(event)


def _decision_payload(session: Session, decision, reward: float, record: StepRecord) -> dict:
    payload = {
        "action": int(decision.action),
        "recourse": [float(v) for v in decision.recourse.full],
        "ucb": float(decision.ucb),
        "lcb": float(decision.lcb),
        "ci": float(decision.ci),
        "source": decision.source,
        "regret_step": record.regret_step,
        "regret_cum": record.regret_cum,
        "queried": decision.queried,
        "adopted": decision.adopted,
        "reward": reward,
        "context": [float(v) for v in decision.context.full],
    }
    if decision.human_action is not None:
        payload["human_action"] = int(decision.human_action)
        payload["human_ucb"] = float(decision.human_ucb)
        payload["human_lcb"] = float(decision.human_lcb)
        payload["human_ci"] = float(decision.human_ci)
    return payload


def _complete_step(session: Session, x: Context, oracle) -> dict:
    """Run the consult-and-adopt step with the given oracle, realize the
    reward, account regret, and emit the step (and possibly finished) event."""
    decision = hr_bandit_step(session.state, x, oracle)
    reward = realize(session.env, decision.action, decision.recourse, session.reward_rng, base=x)
    observe(session.state, decision, reward)
    best = solve_cop(session.env.model, x, session.env.dist)
    regret = max(0.0, best.value - expected_reward(session.env.model, decision.action, decision.recourse))
    session.regret_cum += regret
    record = StepRecord(
        t=session.t,
        context=[round(v, 10) for v in x.full],
        action=decision.action,
        recourse=[round(v, 10) for v in decision.recourse.full],
        source=decision.source,
        reward=reward,
        oracle_action=best.action,
        oracle_value=best.value,
        regret_step=regret,
        regret_cum=session.regret_cum,
        queried=decision.queried,
        adopted=decision.adopted,
    )
    session.records.append(record)
    event = {"type": "step", "t": session.t, "payload": _decision_payload(session, decision, reward, record)}
    _emit(session, event)

    session.pending_context = None
    session.deadline = None
    session.t += 1
    if session.t > session.horizon:
        session.phase = PHASE_FINISHED
        _emit(
            session,
            {
                "type": "finished",
                "t": session.horizon,
                "payload": {
                    "regret_cum": session.regret_cum,
                    "total_queries": session.state.human_queries,
                },
            },
        )
    else:
        session.phase = PHASE_AWAITING_STEP
    return event


def _query_payload(session: Session, x: Context, sol, u: float, l: float, c: float) -> dict:
    dist = session.env.dist
    constraint = (
        {"kind": "two-norm", "gamma": float(dist.gamma)}
        if isinstance(dist, TwoNormBudget)
        else {"kind": "box", "gammas": [float(g) for g in dist.gammas]}
    )
    return {
        "context": [float(v) for v in x.full],
        "action": int(sol.action),
        "recourse": [float(v) for v in sol.recourse.full],
        "ucb": float(u),
        "lcb": float(l),
        "ci": float(c),
        "constraint": constraint,
        "n_actions": session.env.model.n_actions,
        "d_immutable": session.env.model.d_immutable,
        "feature_labels": session.env.feature_labels,
        "timeout_s": session.timeout,
    }


def _fallback_if_expired(session: Session) -> dict | None:
    """Lazily complete a parked step whose deadline has passed (AI fallback)."""
    if session.phase == PHASE_AWAITING_HUMAN and time.monotonic() > session.deadline:
        return _complete_step(session, session.pending_context, _TimeoutOracle())
    return None


def _parse_session_body(body: dict) -> tuple[ExperimentConfig, float]:
    if not isinstance(body, dict):
        raise ConfigError("session body must be a JSON object")
    timeout = float(body.pop("timeout", 120.0))
    if timeout <= 0:
        raise ConfigError("timeout must be positive")
    body.setdefault("policies", ("hr",))
    if isinstance(body.get("policies"), list):
        body["policies"] = tuple(body["policies"])
    if isinstance(body.get("seeds"), list):
        body["seeds"] = tuple(body["seeds"])
    if isinstance(body.get("solver"), dict):
        body["solver"] = AdmmParams(**body["solver"])
    try:
        config = ExperimentConfig(**body)
    except (TypeError, InvalidInputError) as exc:
        raise ConfigError(str(exc)) from exc
    if config.policies != ("hr",):
        raise ConfigError("live sessions require the human-consulting policy only")
    if len(config.seeds) != 1:
        raise ConfigError("live sessions take exactly one seed")
    if config.env != "synthetic" and config.data_path is None:
        data_path, schema_path = default_data_paths(config.env)
        config = replace(config, data_path=data_path, schema_path=schema_path)
    return config, timeout


def _new_session(config: ExperimentConfig, timeout: float) -> Session:
    env = build_environment(config)
    conf = confidence_params(env, config)
    seed = config.seeds[0]
    ss = np.random.SeedSequence([int(seed), 0x5EED])
    ctx_rng, reward_rng, _ = (np.random.default_rng(c) for c in ss.spawn(3))
    state = make_policy_state(
        kind="hr",
        d=env.model.dim,
        conf=conf,
        dist=env.dist,
        delta_consult=config.delta_consult,
        zeta=config.zeta,
        solver_method=config.solver_method,
        solver_params=config.solver,
    )
    return Session(
        id=uuid.uuid4().hex[:12],
        config=config,
        env=env,
        state=state,
        stream=context_stream(env, ctx_rng),
        reward_rng=reward_rng,
        timeout=timeout,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="recourse-bandit sessions")
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions

    def _get(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, detail={"error": f"no session {session_id}"})
        return session

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(400, detail={"error": "body must be JSON"})
        try:
            config, timeout = _parse_session_body(body)
            session = _new_session(config, timeout)
        except ConfigError as exc:
            raise HTTPException(422, detail={"error": str(exc)})
        except DataError as exc:
            raise HTTPException(422, detail={"error": str(exc)})
        sessions[session.id] = session
        return {"id": session.id}

    @app.post("/sessions/{session_id}/advance")
    async def advance(session_id: str):
        session = _get(session_id)
        async with session.lock:
            if session.phase == PHASE_FINISHED:
                raise HTTPException(409, detail={"error": "session finished"})
            if session.phase == PHASE_AWAITING_HUMAN:
                event = _fallback_if_expired(session)
                if event is None:
                    raise HTTPException(
                        409, detail={"error": "awaiting a human submission"}
                    )
                return event
            x = next(session.stream)
            sol = _ucb_solution(session.state, x)
            u, l, c = _bounds(session.state, sol.action, sol.recourse.full)
            if 2.0 * c > session.state.delta_consult:
                session.pending_context = x
                session.phase = PHASE_AWAITING_HUMAN
                session.deadline = time.monotonic() + session.timeout
                event = {
                    "type": "query",
                    "t": session.t,
                    "payload": _query_payload(session, x, sol, u, l, c),
                }
                _emit(session, event)
                return event
            return _complete_step(session, x, _TimeoutOracle())

    @app.post("/sessions/{session_id}/human")
    async def submit_human(session_id: str, request: Request):
        session = _get(session_id)
        async with session.lock:
            if session.phase != PHASE_AWAITING_HUMAN:
                raise HTTPException(409, detail={"error": "no pending query"})
            stale = _fallback_if_expired(session)
            if stale is not None:
                raise HTTPException(
                    409,
                    detail={"error": "stale submission: deadline elapsed, step completed with source=AI"},
                )
            try:
                body = await request.json()
            except Exception:
                raise HTTPException(400, detail={"error": "body must be JSON"})
            x = session.pending_context
            try:
                action = int(body["action"])
                raw = np.asarray(body["recourse"], dtype=float)
            except (KeyError, TypeError, ValueError):
                raise HTTPException(422, detail={"error": "body needs integer action and float-array recourse"})
            if not 0 <= action < session.env.model.n_actions:
                raise HTTPException(
                    422,
                    detail={"error": f"action must be in [0, {session.env.model.n_actions})"},
                )
            d = session.env.model.dim
            d_i = session.env.model.d_immutable
            if raw.shape == (d,):
                if not np.allclose(raw[:d_i], x.immutable):
                    raise HTTPException(422, detail={"error": "immutable coordinates were modified"})
                xm = raw[d_i:]
            elif raw.shape == (d - d_i,):
                xm = raw
            else:
                raise HTTPException(
                    422,
                    detail={"error": f"recourse must have {d} (full) or {d - d_i} (mutable) entries"},
                )
            dist = session.env.dist
            if not dist.feasible(xm, x.mutable):
                distance = float(dist.distance(xm, x.mutable))
                detail = {
                    "error": "recourse violates the distance budget",
                    "constraint": "two-norm" if isinstance(dist, TwoNormBudget) else "box",
                    "distance": distance,
                }
                if isinstance(dist, TwoNormBudget):
                    detail["gamma"] = float(dist.gamma)
                    detail["excess"] = distance - float(dist.gamma)
                else:
                    detail["gammas"] = [float(g) for g in dist.gammas]
                raise HTTPException(422, detail=detail)
            oracle = _OneShotOracle(x.with_mutable(xm), action)
            return _complete_step(session, x, oracle)

    @app.get("/sessions/{session_id}")
    async def snapshot(session_id: str):
        session = _get(session_id)
        pending = None
        for event in reversed(session.events):
            if session.phase == PHASE_AWAITING_HUMAN and event["type"] == "query":
                pending = event
                break
        return {
            "id": session.id,
            "phase": session.phase,
            "t": session.t,
            "horizon": session.horizon,
            "regret_cum": session.regret_cum,
            "total_queries": session.state.human_queries,
            "pending": pending,
            "n_events": len(session.events),
            "feature_labels": session.env.feature_labels,
            "d_immutable": session.env.model.d_immutable,
        }

    @app.get("/sessions/{session_id}/log")
    async def log(session_id: str):
        session = _get(session_id)
        return PlainTextResponse(log_csv_text(session.run_log()), media_type="text/csv")

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str):
        session = sessions.get(session_id)
        await websocket.accept()
        if session is None:
            await websocket.close(code=4404)
            return
        queue: asyncio.Queue = asyncio.Queue()
        for event in session.events:
            queue.put_nowait(event)
        session.subscribers.append(queue)
        try:
            while True:
                event = await queue.get()
                await websocket.send_json(event)
                if event["type"] == "finished":
                    break
            await websocket.close()
        except WebSocketDisconnect:
            pass
        finally:
            session.subscribers.remove(queue)

    return app
