"""Run one consulting episode against a scripted oracle and print the log CSV.

The script file is a JSON array of {t, action, recourse: [floats]} entries,
keyed by consultation order; recourse arrays are the mutable coordinates.
Useful for comparing a live service session against its deterministic twin.
"""

import argparse
import sys

from recourse_bandit.harness import (
    ExperimentConfig,
    build_environment,
    log_csv_text,
    run_episode,
)
from recourse_bandit.human import ReplayOracle, load_replay_script


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("script", help="JSON replay script path")
    parser.add_argument("--T", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--env", default="synthetic")
    parser.add_argument("--gamma", type=float, default=1.0)
    parser.add_argument("--delta-consult", type=float, dest="delta_consult", default=1.0)
    parser.add_argument("--zeta", type=float, default=3.0)
    args = parser.parse_args()

    config = ExperimentConfig(
        env=args.env,
        policies=("hr",),
        horizon=args.T,
        seeds=(args.seed,),
        gamma=args.gamma,
        delta_consult=args.delta_consult,
        zeta=args.zeta,
    )
    if config.env != "synthetic":
        from dataclasses import replace

        from recourse_bandit.harness import default_data_paths

        data_path, schema_path = default_data_paths(config.env)
        config = replace(config, data_path=data_path, schema_path=schema_path)
    env = build_environment(config)
    oracle = ReplayOracle(load_replay_script(args.script))
    log = run_episode(env, "hr", args.seed, config, oracle=oracle)
    sys.stdout.write(log_csv_text(log))


if __name__ == "__main__":
    main()
