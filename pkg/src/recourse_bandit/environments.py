"""Ground-truth environments: the Gaussian synthetic family and semi-synthetic
builders that fit per-arm linear regressions on real tables and install the
fitted coefficients as the data-generating truth."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import DataError, InvalidInputError, SchemaError
from .model import Context, DistanceSpec, RewardModel, TwoNormBudget, sample_reward

FERTILITY_MUTABLE = ("alcohol", "smoking", "sitting_hours")


@dataclass(frozen=True)
class Environment:
    """True reward model plus a context source and budget specification."""

    model: RewardModel
    dist: DistanceSpec
    mutable_mask: np.ndarray  # bool, length d
    name: str
    feature_labels: list[str]
    rows: np.ndarray | None = None  # dataset contexts (n, d); None = Gaussian stream
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        mask = np.asarray(self.mutable_mask, dtype=bool)
        object.__setattr__(self, "mutable_mask", mask)
        if mask.size != self.model.dim:
            raise InvalidInputError("mutable mask length must equal the model dimension")
        if not mask.any():
            raise InvalidInputError("at least one feature must be mutable")
        # immutable coordinates must form the leading block (model split convention)
        if mask[: self.model.d_immutable].any() or not mask[self.model.d_immutable :].all():
            raise InvalidInputError("mask must be False on the immutable block, True after")

    @property
    def d_mutable(self) -> int:
        return int(self.mutable_mask.sum())

    def split(self, row: np.ndarray) -> Context:
        d_i = self.model.d_immutable
        return Context(row[:d_i], row[d_i:])


@dataclass(frozen=True)
class DatasetTable:
    """Typed numeric table after ingestion; gap rows are dropped and counted."""

    features: np.ndarray  # (n, p)
    feature_names: list[str]
    treatment: np.ndarray  # (n,) in {0, 1}
    outcome: np.ndarray  # (n,)
    n_dropped: int
    provenance: str = ""

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]


def build_synthetic(
    d: int = 5,
    n_actions: int = 2,
    sigma: float = 1.0,
    gamma: float = 1.0,
    seed: int = 0,
) -> Environment:
    """Gaussian family: theta_a ~ N(0, I_d), contexts ~ N(0, I_d), all mutable."""
    if d < 1 or n_actions < 1:
        raise InvalidInputError("dimension and action count must be >= 1")
    rng = np.random.default_rng(seed)
    thetas = rng.standard_normal((n_actions, d))
    model = RewardModel(thetas=thetas, d_immutable=0, sigma=sigma)
    return Environment(
        model=model,
        dist=TwoNormBudget(gamma),
        mutable_mask=np.ones(d, dtype=bool),
        name=f"synthetic-d{d}-K{n_actions}",
        feature_labels=[f"x{j}" for j in range(d)],
    )


def load_schema(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def load_csv(path: str, schema: dict) -> DatasetTable:
    """Ingest a headered CSV per its JSON schema.

    The schema names feature, treatment, and outcome columns and may map
    categorical values to floats via ``value_maps``. Rows with unparseable
    cells are dropped and counted; a missing declared column is a schema error.
    """
    feature_names = list(schema["features"])
    treat_col = schema["treatment"]
    outcome_col = schema["outcome"]
    value_maps = schema.get("value_maps", {})

    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        needed = feature_names + [treat_col, outcome_col]
        missing = [c for c in needed if c not in header]
        if missing:
            raise SchemaError(f"missing columns in {path}: {missing}")

        feats, treats, outs = [], [], []
        dropped = 0
        for row in reader:
            try:
                vals = [_cell(row[c], value_maps.get(c)) for c in feature_names]
                tr = _cell(row[treat_col], value_maps.get(treat_col))
                out = _cell(row[outcome_col], value_maps.get(outcome_col))
            except (KeyError, ValueError):
                dropped += 1
                continue
            if tr not in (0.0, 1.0):
                dropped += 1
                continue
            feats.append(vals)
            treats.append(int(tr))
            outs.append(out)

    if not feats:
        raise DataError(f"no usable rows in {path}")
    return DatasetTable(
        features=np.asarray(feats, dtype=float),
        feature_names=feature_names,
        treatment=np.asarray(treats, dtype=int),
        outcome=np.asarray(outs, dtype=float),
        n_dropped=dropped,
        provenance=path,
    )


def _cell(raw: str, vmap: dict | None) -> float:
    raw = raw.strip()
    if vmap is not None and raw in vmap:
        return float(vmap[raw])
    if raw == "":
        raise ValueError("empty cell")
    return float(raw)


def _standardize(features: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return (features - mean) / std, mean, std


def _fit_per_arm(
    contexts: np.ndarray, treatment: np.ndarray, outcome: np.ndarray, sigma: float, d_i: int
) -> RewardModel:
    """Ordinary least squares per treatment arm, installed as the truth."""
    d = contexts.shape[1]
    thetas = np.zeros((2, d))
    for arm in (0, 1):
        mask = treatment == arm
        if mask.sum() < d + 1:
            raise DataError(f"arm {arm} has {int(mask.sum())} rows, need at least {d + 1}")
        X = contexts[mask]
        y = outcome[mask]
        thetas[arm] = np.linalg.lstsq(X, y, rcond=None)[0]
    return RewardModel(thetas=thetas, d_immutable=d_i, sigma=sigma)


def _assemble_contexts(
    table: DatasetTable, mutable_names: list[str]
) -> tuple[np.ndarray, list[str], int]:
    """Reorder standardized features so the mutable block trails an intercept
    and the immutable features; the intercept is an immutable constant-1."""
    std_feats, _, _ = _standardize(table.features)
    imm = [n for n in table.feature_names if n not in mutable_names]
    order = [table.feature_names.index(n) for n in imm + list(mutable_names)]
    n = table.n_rows
    contexts = np.column_stack([np.ones(n), std_feats[:, order]])
    labels = ["intercept"] + imm + list(mutable_names)
    d_i = 1 + len(imm)
    return contexts, labels, d_i


def build_fertility(
    table: DatasetTable, gamma: float = 1.0, sigma: float = 1.0, seed: int = 0
) -> Environment:
    """Semi-synthetic fertility environment.

    Outcomes are synthesized from the recorded diagnosis (mean 5 for normal,
    mean 0 for altered, unit variance); separate least-squares fits per
    surgical-intervention arm become the true reward model. Exactly the three
    lifestyle features are mutable.
    """
    missing = [n for n in FERTILITY_MUTABLE if n not in table.feature_names]
    if missing:
        raise SchemaError(f"fertility table lacks mutable features: {missing}")
    rng = np.random.default_rng(seed)
    # table.outcome carries the diagnosis indicator: 1 = normal, 0 = altered
    synth = np.where(table.outcome == 1.0, 5.0, 0.0) + rng.standard_normal(table.n_rows)
    contexts, labels, d_i = _assemble_contexts(table, list(FERTILITY_MUTABLE))
    model = _fit_per_arm(contexts, table.treatment, synth, sigma, d_i)
    mask = np.zeros(contexts.shape[1], dtype=bool)
    mask[d_i:] = True
    return Environment(
        model=model,
        dist=TwoNormBudget(gamma),
        mutable_mask=mask,
        name="fertility",
        feature_labels=labels,
        rows=contexts,
        extra={
            "synthesized_outcome": synth,
            "mutable_coefficients": {arm: model.thetas[arm, d_i:].copy() for arm in (0, 1)},
        },
    )


def build_ihdp(
    table: DatasetTable, gamma: float = 1.0, sigma: float = 1.0, n_mutable: int = 5
) -> Environment:
    """Semi-synthetic infant-health environment: the first ``n_mutable``
    features are kept, all mutable, with per-arm least squares as the truth."""
    kept = table.feature_names[:n_mutable]
    sub = DatasetTable(
        features=table.features[:, :n_mutable],
        feature_names=kept,
        treatment=table.treatment,
        outcome=table.outcome,
        n_dropped=table.n_dropped,
        provenance=table.provenance,
    )
    contexts, labels, d_i = _assemble_contexts(sub, kept)
    model = _fit_per_arm(contexts, sub.treatment, sub.outcome, sigma, d_i)
    mask = np.zeros(contexts.shape[1], dtype=bool)
    mask[d_i:] = True
    return Environment(
        model=model,
        dist=TwoNormBudget(gamma),
        mutable_mask=mask,
        name="ihdp",
        feature_labels=labels,
        rows=contexts,
    )


def context_stream(env: Environment, rng: np.random.Generator) -> Iterator[Context]:
    """Endless context source: i.i.d. Gaussian draws, or shuffled cycling of
    the dataset rows (reshuffled each pass), deterministic under the rng seed."""
    if env.rows is None:
        d_m = env.model.dim - env.model.d_immutable
        d_i = env.model.d_immutable
        while True:
            row = rng.standard_normal(env.model.dim)
            yield Context(row[:d_i], row[d_i:])
    else:
        n = env.rows.shape[0]
        while True:
            for idx in rng.permutation(n):
                yield env.split(env.rows[idx])


def next_context(env: Environment, rng: np.random.Generator) -> Context:
    """Single context draw (Gaussian, or a uniformly chosen dataset row).

    Streaming runs should use :func:`context_stream`, which cycles datasets
    without replacement.
    """
    if env.rows is None:
        return next(context_stream(env, rng))
    idx = int(rng.integers(env.rows.shape[0]))
    return env.split(env.rows[idx])


def realize(
    env: Environment,
    action: int,
    recourse: Context,
    rng: np.random.Generator,
    base: Context | None = None,
) -> float:
    """Reward drawn at the modified context (full adherence)."""
    if base is not None:
        if not np.array_equal(base.immutable, recourse.immutable):
            raise InvalidInputError("immutable coordinates were modified")
        if not env.dist.feasible(recourse.mutable, base.mutable):
            raise InvalidInputError("modification violates the distance budget")
    return sample_reward(env.model, action, recourse, rng)


def true_parameter_bound(env: Environment) -> float:
    return float(np.max(np.linalg.norm(env.model.thetas, axis=1)))


def observed_context_bound(env: Environment, seed: int = 0, n_probe: int = 2000) -> float:
    """Empirical context-norm bound plus the budget slack for modified contexts."""
    rng = np.random.default_rng(seed)
    stream = context_stream(env, rng)
    norms = [float(np.linalg.norm(next(stream).full)) for _ in range(n_probe)]
    slack = env.dist.gamma if isinstance(env.dist, TwoNormBudget) else float(np.linalg.norm(env.dist.gammas))
    return max(norms) + slack
