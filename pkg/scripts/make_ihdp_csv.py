"""Generate the bundled infant-health-style table (747 rows).

Shape mirrors the usual IHDP layout: 6 continuous + 19 binary covariates
(x1..x25), a binary treatment with roughly 19% treated, and a continuous
outcome from arm-specific linear response surfaces on the leading continuous
covariates plus noise.
"""

import argparse
import csv
from pathlib import Path

import numpy as np


def make_table(n: int = 747, seed: int = 20240918) -> tuple[list[str], np.ndarray]:
    rng = np.random.default_rng(seed)
    cont = rng.standard_normal((n, 6))
    binary = (rng.random((n, 19)) < rng.uniform(0.1, 0.6, size=19)).astype(float)
    features = np.column_stack([cont, binary])
    treatment = (rng.random(n) < 0.19).astype(int)

    beta0 = np.array([1.2, -0.8, 0.5, -0.4, 0.9])
    beta1 = np.array([2.0, -1.5, 1.1, -0.2, 0.6])
    base = features[:, :5]
    outcome = np.where(
        treatment == 1,
        4.0 + base @ beta1,
        base @ beta0,
    ) + rng.standard_normal(n)

    names = [f"x{j + 1}" for j in range(25)]
    data = np.column_stack([features, treatment, np.round(outcome, 4)])
    return names + ["treatment", "outcome"], data


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/ihdp.csv")
    parser.add_argument("--rows", type=int, default=747)
    parser.add_argument("--seed", type=int, default=20240918)
    args = parser.parse_args()

    header, data = make_table(args.rows, args.seed)
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in data:
            writer.writerow([f"{v:g}" for v in row])
    print(f"wrote {args.rows} rows to {path}")


if __name__ == "__main__":
    main()
