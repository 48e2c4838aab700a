"""Expert oracles: the simulated quality-q expert, replay scripts, and a live bridge."""

from __future__ import annotations

import json
import queue
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .errors import InvalidInputError
from .model import BoxBudget, Context, DistanceSpec, RewardModel, TwoNormBudget, solve_cop


class OracleTimeout(Exception):
    """The expert did not answer within the allotted time."""


class OracleError(Exception):
    """The expert channel failed (closed session, missing script entry, ...)."""


class HumanOracle(Protocol):
    def propose(self, x: Context, ai_candidate=None) -> tuple[Context, int]:
        """Return a (recourse, action) proposal for the given context."""
        ...


@dataclass
class SimulatedExpert:
    """Quality-q expert: the true optimum with probability q, else a random
    feasible decision (uniform action; uniform budget-boundary point under a
    two-norm budget, uniform box point otherwise)."""

    q: float
    model: RewardModel
    dist: DistanceSpec
    rng: np.random.Generator

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise InvalidInputError("expert quality must lie in [0, 1]")

    def propose(self, x: Context, ai_candidate=None) -> tuple[Context, int]:
        if self.rng.random() < self.q:
            sol = solve_cop(self.model, x, self.dist)
            return sol.recourse, sol.action
        action = int(self.rng.integers(self.model.n_actions))
        xm = self.dist.sample_boundary(x.mutable, self.rng)
        return x.with_mutable(xm), action


@dataclass
class ReplayOracle:
    """Scripted proposals, keyed by step index; deterministic test oracle."""

    script: list[dict]
    _cursor: int = 0

    def propose(self, x: Context, ai_candidate=None) -> tuple[Context, int]:
        self._cursor += 1
        return propose_replay(self.script, self._cursor, x)


def propose_replay(script: list[dict], t: int, x: Context) -> tuple[Context, int]:
    """Look up the scripted proposal for step t (1-based)."""
    for entry in script:
        if entry["t"] == t:
            return x.with_mutable(np.asarray(entry["recourse"], dtype=float)), int(entry["action"])
    raise OracleError(f"no scripted proposal for step {t}")


def load_replay_script(path: str) -> list[dict]:
    """Replay script file: JSON array of {t, action, recourse: [floats]}."""
    with open(path) as fh:
        script = json.load(fh)
    if not isinstance(script, list):
        raise InvalidInputError("replay script must be a JSON array")
    for entry in script:
        if not {"t", "action", "recourse"} <= set(entry):
            raise InvalidInputError("replay entries need t, action, recourse fields")
    return script


@dataclass
class EchoOracle:
    """Always proposes the AI's own candidate; used for equivalence checks."""

    def propose(self, x: Context, ai_candidate=None) -> tuple[Context, int]:
        if ai_candidate is None:
            raise OracleError("echo oracle needs the AI candidate")
        return ai_candidate.recourse, ai_candidate.action


@dataclass
class LiveOracle:
    """Blocking bridge to an out-of-process expert (the session console).

    ``fetch`` blocks until a submission arrives or the timeout elapses; a
    queue-backed default is provided for in-process tests.
    """

    fetch: Callable[[Context, float], tuple[Context, int] | None]
    timeout: float = 120.0

    def propose(self, x: Context, ai_candidate=None) -> tuple[Context, int]:
        answer = self.fetch(x, self.timeout)
        if answer is None:
            raise OracleTimeout(f"no expert submission within {self.timeout} s")
        return answer


def queue_fetch(submissions: "queue.Queue[tuple[Context, int]]"):
    """Build a LiveOracle fetch function reading from a queue."""

    def fetch(x: Context, timeout: float):
        try:
            return submissions.get(timeout=timeout)
        except queue.Empty:
            return None

    return fetch
