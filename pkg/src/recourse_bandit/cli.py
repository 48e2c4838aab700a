"""Command-line entry point: experiment runs, ablation sweeps, one-off
optimal-recourse solves, and the live session service.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, InvalidInputError
from .harness import ExperimentConfig, build_environment, default_data_paths, run, sweep
from .model import solve_cop
from .ocop import AdmmParams

EXIT_CONFIG = 2
EXIT_DATA = 3


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--env", choices=("synthetic", "fertility", "ihdp"))
    p.add_argument(
        "--policy",
        help="comma-separated subset of linucb,rlinucb,hr",
    )
    p.add_argument("--T", type=int, dest="horizon", help="episode horizon")
    p.add_argument("--seeds", help="comma-separated integer seeds")
    p.add_argument("--delta-consult", type=float, dest="delta_consult",
                   help="consult threshold on interval width (inf disables)")
    p.add_argument("--zeta", type=float, help="adoption uncertainty-ratio gate")
    p.add_argument("--gamma", type=float, help="modification distance budget")
    p.add_argument("--q", type=float, help="simulated expert quality")
    p.add_argument("--out", help="output directory (default: runs)")
    p.add_argument("--name", help="run name (output subdirectory)")


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge the optional JSON config file with command-line overrides."""
    raw: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must contain a JSON object")
    raw.pop("grid", None)

    overrides: dict = {}
    if args.env is not None:
        overrides["env"] = args.env
    if args.policy is not None:
        overrides["policies"] = tuple(s.strip() for s in args.policy.split(",") if s.strip())
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if args.seeds is not None:
        try:
            overrides["seeds"] = tuple(int(s) for s in args.seeds.split(",") if s.strip())
        except ValueError as exc:
            raise ConfigError(f"--seeds must be comma-separated integers: {args.seeds}") from exc
    for key in ("delta_consult", "zeta", "gamma", "q"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.name is not None:
        overrides["name"] = args.name

    merged = {**raw, **overrides}
    if "policies" in merged and not isinstance(merged["policies"], tuple):
        merged["policies"] = tuple(merged["policies"])
    if "seeds" in merged and not isinstance(merged["seeds"], tuple):
        merged["seeds"] = tuple(merged["seeds"])
    if isinstance(merged.get("solver"), dict):
        try:
            merged["solver"] = AdmmParams(**merged["solver"])
        except (TypeError, InvalidInputError) as exc:
            raise ConfigError(f"bad solver parameters: {exc}") from exc

    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(merged) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")

    try:
        config = ExperimentConfig(**merged)
    except (TypeError, InvalidInputError) as exc:
        raise ConfigError(str(exc)) from exc

    if config.env != "synthetic" and config.data_path is None:
        data_path, schema_path = default_data_paths(config.env)
        config = replace(config, data_path=data_path, schema_path=schema_path)
    if config.out_dir is None and getattr(args, "_needs_out", False):
        config = replace(config, out_dir="runs")
    return config


def cmd_run(args: argparse.Namespace) -> int:
    args._needs_out = True
    config = load_config(args)
    results = run(config)
    for policy, logs in results.items():
        finals = np.array([log.cumulative_regret for log in logs])
        queries = np.array([log.total_queries for log in logs])
        print(
            f"{policy}: mean final regret {finals.mean():.2f} +/- {finals.std():.2f}"
            f" | mean queries {queries.mean():.1f}"
        )
    print(f"logs written under {config.out_dir}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    grid: dict[str, list] = {}
    if args.config:
        path = Path(args.config)
        if path.exists():
            try:
                grid = dict(json.loads(path.read_text()).get("grid", {}))
            except (json.JSONDecodeError, AttributeError):
                pass  # load_config reports the malformed file
    for key in ("zeta", "delta_consult", "q"):
        raw = getattr(args, f"grid_{key}", None)
        if raw is not None:
            try:
                grid[key] = [float(v) for v in raw.split(",") if v.strip()]
            except ValueError as exc:
                raise ConfigError(f"--grid-{key.replace('_', '-')} must be comma-separated numbers") from exc
    if not grid:
        raise ConfigError("sweep needs a grid: --grid-zeta/--grid-delta-consult/--grid-q or a 'grid' config key")

    args._needs_out = True
    config = load_config(args)
    report = sweep(config, grid)
    for row in report:
        knobs = {k: v for k, v in row.items() if k in ("zeta", "delta_consult", "q")}
        print(
            f"{row['policy']} {knobs}: regret {row['mean_final_regret']:.2f}"
            f" +/- {row['std_final_regret']:.2f} | queries {row['mean_total_queries']:.1f}"
        )
    return 0


def cmd_solve_cop(args: argparse.Namespace) -> int:
    config = load_config(args)
    env = build_environment(config, seed=args.seed)
    if args.context is not None:
        try:
            row = np.asarray(json.loads(args.context), dtype=float)
        except (json.JSONDecodeError, ValueError) as exc:
            raise ConfigError(f"--context must be a JSON float array: {exc}") from exc
        if row.shape != (env.model.dim,):
            raise ConfigError(f"context must have {env.model.dim} entries, got {row.size}")
        x = env.split(row)
    else:
        rng = np.random.default_rng(args.seed)
        from .environments import next_context

        x = next_context(env, rng)
    sol = solve_cop(env.model, x, env.dist)
    payload = {
        "action": sol.action,
        "recourse": [float(v) for v in sol.recourse.full],
        "value": sol.value,
        "context": [float(v) for v in x.full],
    }
    print(json.dumps(payload, indent=2))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app()
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recourse-bandit",
        description="Linear recourse bandits with optional human consultation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run configured policies over seeds")
    _add_common_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid sweep over zeta/delta-consult/q")
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--grid-zeta", help="comma-separated zeta grid")
    p_sweep.add_argument("--grid-delta-consult", dest="grid_delta_consult",
                         help="comma-separated consult-threshold grid")
    p_sweep.add_argument("--grid-q", help="comma-separated expert-quality grid")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cop = sub.add_parser("solve-cop", help="solve the true-model optimal recourse for one context")
    _add_common_flags(p_cop)
    p_cop.add_argument("--context", help="JSON float array; default: draw one from the environment")
    p_cop.add_argument("--seed", type=int, default=0)
    p_cop.set_defaults(func=cmd_solve_cop)

    p_serve = sub.add_parser("serve", help="start the live session service")
    _add_common_flags(p_serve)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
