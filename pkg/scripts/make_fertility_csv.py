"""Generate the bundled fertility-style table (100 rows).

Columns follow the classic fertility-diagnosis layout: seasonal/medical
covariates, a surgical-intervention indicator used as the treatment, three
lifestyle features (alcohol, smoking, sitting_hours) that the environment
treats as mutable, and a diagnosis label in {N, O}. The label probability
decreases with all three lifestyle features in both treatment arms, so the
per-arm least-squares fits recover negative lifestyle coefficients.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

COLUMNS = [
    "season",
    "age",
    "childish_diseases",
    "accident",
    "surgical_intervention",
    "high_fevers",
    "alcohol",
    "smoking",
    "sitting_hours",
    "diagnosis",
]


def make_rows(n: int = 100, seed: int = 20240917) -> list[list]:
    rng = np.random.default_rng(seed)
    rows = []
    season = rng.choice([-1.0, -0.33, 0.33, 1.0], size=n)
    age = np.round(rng.uniform(0.5, 1.0, size=n), 2)
    childish = rng.integers(0, 2, size=n)
    accident = rng.integers(0, 2, size=n)
    surgical = (np.arange(n) % 2).astype(int)  # balanced arms
    fevers = rng.choice([-1, 0, 1], size=n)
    alcohol = np.round(rng.uniform(0.2, 1.0, size=n), 1)
    smoking = rng.choice([-1, 0, 1], size=n)
    sitting = np.round(rng.uniform(0.05, 1.0, size=n), 2)

    # normal diagnosis becomes less likely with heavier lifestyle loads
    z = lambda v: (v - v.mean()) / v.std()
    score = -2.0 * z(alcohol) - 1.6 * z(smoking.astype(float)) - 1.8 * z(sitting)
    score += 0.25 * rng.standard_normal(n)
    diagnosis = np.where(score > np.quantile(score, 0.25), "N", "O")

    for i in range(n):
        rows.append(
            [
                season[i],
                age[i],
                childish[i],
                accident[i],
                surgical[i],
                fevers[i],
                alcohol[i],
                smoking[i],
                sitting[i],
                diagnosis[i],
            ]
        )
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/fertility.csv")
    parser.add_argument("--rows", type=int, default=100)
    parser.add_argument("--seed", type=int, default=20240917)
    args = parser.parse_args()

    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        writer.writerows(make_rows(args.rows, args.seed))
    print(f"wrote {args.rows} rows to {path}")


if __name__ == "__main__":
    main()
