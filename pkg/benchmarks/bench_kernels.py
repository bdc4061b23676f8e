"""Compare the numba and numpy least-squares kernels.

    python3 benchmarks/bench_kernels.py [--trials 1000]

Reports raw kernel calls per second at a few series lengths and the wall time
of one Monte Carlo calibration run under each backend. The backend is
switched through GROWTHLENS_NO_JIT, exactly as a user would.
"""

from __future__ import annotations

import argparse
import os
import time
import timeit

import numpy as np

from growthlens import _kernels
from growthlens.synth import Hyperbolic, NoiseSpec, Piecewise, Segment, TestConfig, TrajectorySpec, monte_carlo_rates

A, K = 2.493e-2, 1.238e-5


def use(backend: str) -> None:
    os.environ["GROWTHLENS_NO_JIT"] = "1" if backend == "numpy" else "0"
    assert _kernels.backend() == backend


def kernel_rate(n: int, repeat: int = 5) -> float:
    rng = np.random.default_rng(n)
    x = np.sort(rng.uniform(1000, 1950, n))
    y = A - K * x + rng.normal(0, 1e-4, n)
    w = np.ones(n)
    _kernels.wls_line(x, y, w)  # warm-up (compiles the numba path once)
    number = max(1, 200_000 // n)
    best = min(timeit.repeat(lambda: _kernels.wls_line(x, y, w), number=number, repeat=repeat))
    return number / best


def calibration_seconds(trials: int) -> float:
    grid = np.arange(1800.0, 1941.0, 5.0)
    noise = NoiseSpec(sigma=0.01, seed=1)
    null = TrajectorySpec(Hyperbolic(k=K, a=A), grid, noise)
    alt = TrajectorySpec(
        Piecewise((Segment(1800.0, 1900.0, Hyperbolic(k=K, a=A)), Segment(1900.0, 1940.0, Hyperbolic(k=2 * K)))),
        grid,
        noise,
    )
    start = time.perf_counter()
    monte_carlo_rates(null, alt, TestConfig(1900.0, alpha=0.05), trials)
    return time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=1000)
    args = parser.parse_args()
    backends = ["numba", "numpy"] if _kernels.JIT_AVAILABLE else ["numpy"]

    print(f"{'n':>8} " + " ".join(f"{b + ' calls/s':>16}" for b in backends) + f" {'speedup':>8}")
    for n in (10, 30, 100, 1000, 10_000):
        rates = []
        for b in backends:
            use(b)
            rates.append(kernel_rate(n))
        speed = rates[0] / rates[-1]
        print(f"{n:>8} " + " ".join(f"{r:>16,.0f}" for r in rates) + f" {speed:>7.2f}x")

    print(f"\nMonte Carlo calibration, {args.trials} trials x (null + alternative):")
    for b in backends:
        use(b)
        calibration_seconds(100)  # warm-up
        print(f"  {b:<6} {calibration_seconds(args.trials):6.2f} s")


if __name__ == "__main__":
    main()
