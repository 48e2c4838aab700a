"""Regenerate the reference experiment runs and ablation sweeps.

Writes under runs/: the three-policy comparison at reference settings, the
low-quality-expert variant, and sweeps over the adoption gate, the consult
threshold, and the expert quality.
"""

import argparse
from dataclasses import replace

from recourse_bandit.harness import ExperimentConfig, run, sweep


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs")
    parser.add_argument("--T", type=int, default=500)
    parser.add_argument("--seeds", default="0,1,2,3,4")
    args = parser.parse_args()

    seeds = tuple(int(s) for s in args.seeds.split(","))
    base = ExperimentConfig(horizon=args.T, seeds=seeds, out_dir=args.out)

    print("reference comparison (linucb / rlinucb / hr) ...")
    run(replace(base, name="reference"))

    print("low-quality expert (q=0.3) ...")
    run(replace(base, policies=("hr",), q=0.3, name="low-quality"))

    print("ablation sweeps ...")
    hr = replace(base, policies=("hr",), name="ablation")
    sweep(hr, {"zeta": [1.0, 3.0, 10.0]})
    sweep(replace(hr, name="consult"), {"delta_consult": [0.5, 1.0, 2.0]})
    sweep(replace(hr, name="quality"), {"q": [0.3, 0.9]})
    print(f"done; outputs under {args.out}/")


if __name__ == "__main__":
    main()
