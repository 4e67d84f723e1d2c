#!/usr/bin/env python3
"""Regenerates the bundled CSV fixtures in data/.

Usage: make_fixtures.py [xi]

Writes ten pure-noise datasets (null_01.csv .. null_10.csv, 20 rows, response
in column 0 followed by 60 standard-normal features) and one weak-signal
dataset (kfold_borderline.csv, 64 rows, response followed by 64 features with
column variance log(j + 2)). The optional xi argument sets the signal strength
of the borderline dataset; it was tuned so a 5-fold test at alpha = 0.05
rejects for some fold seeds and retains for others. The borderline dataset
uses P = N + 1 columns: with many more features than that, the 5-fold
statistic saturates far below its critical value for every signal strength,
so no fold seed can ever reject and there is no instability to demonstrate.
"""

import math
import random
import sys
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"


def write_csv(path, rows):
    with open(path, "w") as out:
        for row in rows:
            out.write(",".join(f"{v:.17g}" for v in row) + "\n")


def null_fixture(rng, n=20, p=60):
    rows = []
    for _ in range(n):
        y = rng.gauss(0.0, 1.0)
        rows.append([y] + [rng.gauss(0.0, 1.0) for _ in range(p)])
    return rows


def borderline_fixture(rng, xi, n=64, p=64, sigma2_eps=0.5):
    scale = [math.sqrt(math.log(j + 2.0)) for j in range(p)]
    rows = []
    for _ in range(n):
        x = [scale[j] * rng.gauss(0.0, 1.0) for j in range(p)]
        y = xi * sum(x) + rng.gauss(0.0, math.sqrt(sigma2_eps))
        rows.append([y] + x)
    return rows


def main():
    xi = float(sys.argv[1]) if len(sys.argv) > 1 else 0.7
    DATA.mkdir(exist_ok=True)
    for f in range(1, 11):
        rng = random.Random(52000 + f)
        write_csv(DATA / f"null_{f:02d}.csv", null_fixture(rng))
    rng = random.Random(424344)
    write_csv(DATA / "kfold_borderline.csv", borderline_fixture(rng, xi))
    print(f"wrote fixtures to {DATA} (borderline xi = {xi})")


if __name__ == "__main__":
    main()
