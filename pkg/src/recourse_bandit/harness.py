"""Experiment runner: seeded episodes, regret and query accounting, sweeps.

Regret is computed on noiseless expected rewards against the closed-form
optimum for each incoming context; realized (noisy) rewards are logged
separately. Each (seed, policy) episode is deterministic: context, reward
noise, and expert randomness come from independent child streams of the seed.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, replace
from itertools import product
from pathlib import Path

import numpy as np

from .environments import (
    Environment,
    build_fertility,
    build_ihdp,
    build_synthetic,
    context_stream,
    load_csv,
    load_schema,
    observed_context_bound,
    realize,
    true_parameter_bound,
)
from .errors import ConfigError, DataError
from .estimator import ConfidenceParams
from .human import HumanOracle, SimulatedExpert
from .model import expected_reward, solve_cop
from .ocop import AdmmParams
from .policies import Decision, PolicyState, make_policy_state, observe, step

POLICY_KINDS = ("linucb", "rlinucb", "hr")

_REPO_ROOT = Path(__file__).resolve().parents[2]


def default_data_paths(env: str) -> tuple[str | None, str | None]:
    """Bundled dataset locations for the semi-synthetic environments."""
    if env not in ("fertility", "ihdp"):
        return None, None
    data = _REPO_ROOT / "data"
    return str(data / f"{env}.csv"), str(data / f"{env}_schema.json")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a run block."""

    env: str = "synthetic"  # synthetic | fertility | ihdp
    policies: tuple[str, ...] = ("linucb", "rlinucb", "hr")
    horizon: int = 500
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    gamma: float = 1.0
    q: float = 0.9
    delta_consult: float = 1.0
    zeta: float = 3.0
    delta: float = 0.05  # confidence level
    sigma: float = 1.0
    d: int = 5
    n_actions: int = 2
    beta_theta: float | None = None  # None: true parameter-norm bound
    beta_x: float | None = None  # None: observed context-norm bound
    data_path: str | None = None
    schema_path: str | None = None
    solver_method: str = "exact-reduction"
    solver: AdmmParams = field(default_factory=AdmmParams)
    name: str = "experiment"
    out_dir: str | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        unknown = [p for p in self.policies if p not in POLICY_KINDS]
        if unknown:
            raise ConfigError(f"unknown policies: {unknown}")
        if self.env not in ("synthetic", "fertility", "ihdp"):
            raise ConfigError(f"unknown environment: {self.env}")


@dataclass
class StepRecord:
    t: int
    context: list[float]
    action: int
    recourse: list[float]
    source: str
    reward: float
    oracle_action: int
    oracle_value: float
    regret_step: float
    regret_cum: float
    queried: bool
    adopted: bool


@dataclass
class RunLog:
    policy: str
    seed: int
    records: list[StepRecord]
    total_queries: int
    config_echo: dict

    @property
    def cumulative_regret(self) -> float:
        return self.records[-1].regret_cum if self.records else 0.0

    def regret_curve(self) -> np.ndarray:
        return np.array([r.regret_cum for r in self.records])

    def query_curve(self) -> np.ndarray:
        return np.cumsum([1 if r.queried else 0 for r in self.records])


def build_environment(config: ExperimentConfig, seed: int = 0) -> Environment:
    if config.env == "synthetic":
        return build_synthetic(
            d=config.d,
            n_actions=config.n_actions,
            sigma=config.sigma,
            gamma=config.gamma,
            seed=seed,
        )
    if config.data_path is None or config.schema_path is None:
        raise ConfigError(f"{config.env} environment needs data_path and schema_path")
    if not Path(config.data_path).exists():
        raise DataError(f"data file not found: {config.data_path}")
    table = load_csv(config.data_path, load_schema(config.schema_path))
    if config.env == "fertility":
        return build_fertility(table, gamma=config.gamma, sigma=config.sigma)
    return build_ihdp(table, gamma=config.gamma, sigma=config.sigma)


def compute_step_regret(env: Environment, decision: Decision) -> float:
    """Gap between the closed-form optimum and the implemented decision,
    on expected (noise-free) rewards."""
    best = solve_cop(env.model, decision.context, env.dist)
    achieved = expected_reward(env.model, decision.action, decision.recourse)
    return max(0.0, best.value - achieved)


def confidence_params(env: Environment, config: ExperimentConfig) -> ConfidenceParams:
    beta_theta = config.beta_theta if config.beta_theta is not None else true_parameter_bound(env)
    beta_x = config.beta_x if config.beta_x is not None else observed_context_bound(env)
    return ConfidenceParams(
        beta_theta=beta_theta,
        beta_x=beta_x,
        delta=config.delta,
        n_actions=env.model.n_actions,
    )


def run_episode(
    env: Environment,
    policy: str,
    seed: int,
    config: ExperimentConfig,
    conf: ConfidenceParams | None = None,
    oracle: HumanOracle | None = None,
) -> RunLog:
    """One seeded episode of one policy over the configured horizon."""
    conf = conf or confidence_params(env, config)
    ss = np.random.SeedSequence([int(seed), 0x5EED])
    ctx_rng, reward_rng, oracle_rng = (np.random.default_rng(c) for c in ss.spawn(3))
    if policy == "hr" and oracle is None:
        oracle = SimulatedExpert(q=config.q, model=env.model, dist=env.dist, rng=oracle_rng)

    state = make_policy_state(
        kind=policy,
        d=env.model.dim,
        conf=conf,
        dist=env.dist,
        delta_consult=config.delta_consult,
        zeta=config.zeta,
        solver_method=config.solver_method,
        solver_params=config.solver,
    )

    stream = context_stream(env, ctx_rng)
    records: list[StepRecord] = []
    regret_cum = 0.0
    for t in range(1, config.horizon + 1):
        x = next(stream)
        decision = step(state, x, oracle=oracle)
        reward = realize(env, decision.action, decision.recourse, reward_rng, base=x)
        observe(state, decision, reward)
        best = solve_cop(env.model, x, env.dist)
        regret = max(0.0, best.value - expected_reward(env.model, decision.action, decision.recourse))
        regret_cum += regret
        records.append(
            StepRecord(
                t=t,
                context=[round(v, 10) for v in x.full],
                action=decision.action,
                recourse=[round(v, 10) for v in decision.recourse.full],
                source=decision.source,
                reward=reward,
                oracle_action=best.action,
                oracle_value=best.value,
                regret_step=regret,
                regret_cum=regret_cum,
                queried=decision.queried,
                adopted=decision.adopted,
            )
        )
    return RunLog(
        policy=policy,
        seed=seed,
        records=records,
        total_queries=state.human_queries,
        config_echo=_config_echo(config),
    )


def _config_echo(config: ExperimentConfig) -> dict:
    echo = asdict(config)
    echo["solver"] = asdict(config.solver)
    return echo


def run(config: ExperimentConfig, env: Environment | None = None) -> dict[str, list[RunLog]]:
    """All configured policies over all seeds; optionally writes CSV/JSON logs."""
    env = env or build_environment(config)
    conf = confidence_params(env, config)  # shared across seeds and policies
    results: dict[str, list[RunLog]] = {}
    for policy in config.policies:
        results[policy] = [
            run_episode(env, policy, seed, config, conf=conf) for seed in config.seeds
        ]
    if config.out_dir is not None:
        write_outputs(config, results)
    return results


def write_outputs(config: ExperimentConfig, results: dict[str, list[RunLog]]) -> None:
    base = Path(config.out_dir)
    single = len(results) == 1
    for policy, logs in results.items():
        run_dir = base / (config.name if single else f"{config.name}-{policy}")
        run_dir.mkdir(parents=True, exist_ok=True)
        for log in logs:
            _write_log_csv(run_dir / f"seed{log.seed}.csv", log)
        _write_summary(run_dir / "summary.json", config, policy, logs)
        _write_curves(run_dir / "curves.csv", logs)


CSV_FIELDS = [
    "t",
    "context",
    "action",
    "recourse",
    "source",
    "reward",
    "oracle_action",
    "oracle_value",
    "regret_step",
    "regret_cum",
    "queried",
    "adopted",
]


def log_csv_text(log: RunLog) -> str:
    """The per-step records of one episode as CSV text."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS)
    writer.writeheader()
    for rec in log.records:
        row = asdict(rec)
        row["context"] = json.dumps(rec.context)
        row["recourse"] = json.dumps(rec.recourse)
        writer.writerow(row)
    return buf.getvalue()


def _write_log_csv(path: Path, log: RunLog) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(log_csv_text(log))


def _write_summary(path: Path, config: ExperimentConfig, policy: str, logs: list[RunLog]) -> None:
    finals = np.array([log.cumulative_regret for log in logs])
    queries = np.array([log.total_queries for log in logs])
    summary = {
        "policy": policy,
        "seeds": list(config.seeds),
        "final_regret": {str(log.seed): log.cumulative_regret for log in logs},
        "total_queries": {str(log.seed): log.total_queries for log in logs},
        "mean_final_regret": float(finals.mean()),
        "std_final_regret": float(finals.std()),
        "mean_total_queries": float(queries.mean()),
        "config": _config_echo(config),
    }
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2)


def _write_curves(path: Path, logs: list[RunLog]) -> None:
    regret = np.stack([log.regret_curve() for log in logs])
    queries = np.stack([log.query_curve() for log in logs])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "regret_mean", "regret_std", "queries_mean", "queries_std"])
        for i in range(regret.shape[1]):
            writer.writerow(
                [
                    i + 1,
                    float(regret[:, i].mean()),
                    float(regret[:, i].std()),
                    float(queries[:, i].mean()),
                    float(queries[:, i].std()),
                ]
            )


def sweep(
    config: ExperimentConfig,
    grid: dict[str, list],
    env: Environment | None = None,
) -> list[dict]:
    """Run one block per grid point over {zeta, delta_consult, q} with shared
    seeds and return a comparison table."""
    allowed = {"zeta", "delta_consult", "q"}
    unknown = set(grid) - allowed
    if unknown:
        raise ConfigError(f"sweep supports {sorted(allowed)}; got {sorted(unknown)}")
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ConfigError("sweep grid must be nonempty")
    env = env or build_environment(config)
    keys = sorted(grid)
    report: list[dict] = []
    for values in product(*(grid[k] for k in keys)):
        overrides = dict(zip(keys, values))
        point = replace(config, out_dir=None, **overrides)
        results = run(point, env=env)
        for policy, logs in results.items():
            finals = np.array([log.cumulative_regret for log in logs])
            queries = np.array([log.total_queries for log in logs])
            report.append(
                {
                    **overrides,
                    "policy": policy,
                    "mean_final_regret": float(finals.mean()),
                    "std_final_regret": float(finals.std()),
                    "mean_total_queries": float(queries.mean()),
                }
            )
    if config.out_dir is not None:
        out = Path(config.out_dir) / f"{config.name}-sweep"
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "sweep_report.json", "w") as fh:
            json.dump(report, fh, indent=2)
    return report
