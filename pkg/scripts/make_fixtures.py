"""Regenerate the synthetic fixtures in data/fixtures from fixed seeds.

    python3 scripts/make_fixtures.py

The files are committed; rerunning must leave them byte-identical.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from growthlens.ingest import write_long_table
from growthlens.synth import (
    Exponential,
    Hyperbolic,
    NoiseSpec,
    Piecewise,
    Segment,
    TrajectorySpec,
    generate,
)

OUT = Path(__file__).resolve().parents[1] / "data" / "fixtures"
A, K = 2.493e-2, 1.238e-5
CENTURIES = np.arange(1000.0, 1951.0, 50.0)
LATE = np.arange(1700.0, 1951.0, 5.0)

FIXTURES = {
    "hyperbola_exact.csv": TrajectorySpec(Hyperbolic(k=K, a=A), CENTURIES, entity="exact hyperbola"),
    # tenfold rise over the window with 1% noise
    "exponential.csv": TrajectorySpec(
        Exponential(rate=math.log(10.0) / 950.0, level=50.0 * 10.0 ** (-1000.0 / 950.0)),
        CENTURIES,
        NoiseSpec(sigma=0.01, seed=1),
        entity="synthetic exponential",
    ),
    "takeoff_1900.csv": TrajectorySpec(
        Piecewise((Segment(1700.0, 1900.0, Hyperbolic(k=K, a=A)), Segment(1900.0, 1950.0, Hyperbolic(k=2 * K)))),
        LATE,
        NoiseSpec(sigma=0.01, seed=2),
        entity="synthetic takeoff at 1900",
    ),
    "slower_tail.csv": TrajectorySpec(
        Piecewise((Segment(1000.0, 1850.0, Hyperbolic(k=K, a=A)), Segment(1850.0, 1950.0, Hyperbolic(k=0.3 * K)))),
        np.arange(1000.0, 1951.0, 10.0),
        NoiseSpec(sigma=0.01, seed=3),
        entity="synthetic slower tail",
    ),
}


def main() -> None:
    for name, spec in FIXTURES.items():
        series = generate(spec)
        write_long_table(series, OUT / name)
        print(f"wrote {OUT / name} ({len(series)} rows)")


if __name__ == "__main__":
    main()
