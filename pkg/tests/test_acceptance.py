"""Acceptance criteria, one test each, each printing a single PASS/FAIL line."""

from __future__ import annotations

import time
from fractions import Fraction

import numpy as np
import pytest

from growthlens import (
    Change,
    ModelKind,
    ObservationSeries,
    Verdict,
    classify_model,
    fit_hyperbolic,
    gradient_change_test,
    load_series,
    regime_overlay_report,
    relative_residuals,
    rescale_params,
    shift_time_origin,
)
from growthlens.cli import main
from growthlens.synth import (
    Hyperbolic,
    NoiseSpec,
    Piecewise,
    Segment,
    TestConfig,
    TrajectorySpec,
    generate,
    monte_carlo_rates,
)

from .conftest import ASIA_EXTRACT, FIXTURES, REF_A, REF_K, record_criterion


def asia_or_fail(number: int, title: str) -> ObservationSeries:
    if not ASIA_EXTRACT.exists():
        record_criterion(number, title, False, f"bundled extract missing at {ASIA_EXTRACT.name} (see data/README.md)")
        pytest.fail(f"{ASIA_EXTRACT} is absent; criterion {number} cannot be evaluated")
    return load_series(ASIA_EXTRACT)


def test_criterion_1_asia_refit():
    title = "Asia refit, window 1000-1950, uniform"
    start = time.perf_counter()
    series = asia_or_fail(1, title)
    fit = fit_hyperbolic(series, (1000, 1950), "uniform")
    elapsed = time.perf_counter() - start
    a, k, t_s = fit.params.a, fit.params.k, fit.singularity
    ok = (
        abs(k / REF_K - 1) <= 0.10
        and abs(a / REF_A - 1) <= 0.10
        and 2005 <= t_s <= 2025
        and elapsed < 1.0
    )
    record_criterion(
        1, title, ok,
        f"a={a:.5g} ({100 * (a / REF_A - 1):+.1f}%), k={k:.5g} ({100 * (k / REF_K - 1):+.1f}%), "
        f"t_s={t_s:.1f} in [2005, 2025], {elapsed * 1e3:.0f} ms (< 1 s)",
    )
    assert ok


def test_criterion_2_ad1_residual():
    title = "AD 1 residual +88% +/- 15 pp"
    series = asia_or_fail(2, title)
    fit = fit_hyperbolic(series, (1000, 1950))
    res = relative_residuals(series, fit.params, (1, 1))
    r = float(res.relative[0])
    ok = abs(r - 0.88) <= 0.15
    record_criterion(2, title, ok, f"residual at AD 1 = {100 * r:+.1f}%")
    assert ok


def test_criterion_3_no_takeoff():
    title = "no takeoff at 1750/1870/1900 (window 1000-1940, alpha 0.01)"
    series = asia_or_fail(3, title)
    window = (1000, 1940)
    tests = [gradient_change_test(series, y, window, alpha=0.01) for y in (1750, 1870, 1900)]
    regimes = regime_overlay_report(series, fit_hyperbolic(series, window), window, alpha=0.01)
    ok = all(t.classification is Change.NO_CHANGE for t in tests) and [
        r.verdict for r in regimes
    ] == [Verdict.CONTRADICTED] * 3
    detail = "; ".join(
        f"{t.candidate_year:g}: {t.classification.value} p={t.p_value:.3g}" for t in tests
    ) + "; verdicts " + ",".join(r.verdict.value for r in regimes)
    record_criterion(3, title, ok, detail)
    assert ok


def test_criterion_4_model_verdict():
    title = "hyperbolic beats exponential on 1000-1950"
    series = asia_or_fail(4, title)
    m = classify_model(series, (1000, 1950))
    ok = m.choice is ModelKind.HYPERBOLIC and m.r2_reciprocal > m.r2_log
    record_criterion(4, title, ok, f"{m.choice.value}, R2 reciprocal {m.r2_reciprocal:.4f} vs log {m.r2_log:.4f}")
    assert ok


def random_specs(count: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(3, 41))
        years = np.sort(rng.choice(3001, size=n, replace=False)).astype(float)
        k = 10 ** rng.uniform(-8, -2)
        a = k * (years[-1] + 10 ** rng.uniform(0, 4))
        yield TrajectorySpec(Hyperbolic(k=k, a=a), years)


def test_criterion_5_exact_recovery():
    title = "exact recovery, 1000 random noiseless specs"
    start = time.perf_counter()
    worst = 0.0
    for spec in random_specs(1000, seed=5):
        fit = fit_hyperbolic(generate(spec))
        worst = max(worst, abs(fit.params.a / spec.kind.a - 1), abs(fit.params.k / spec.kind.k - 1))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 5.0
    record_criterion(5, title, ok, f"max relative error {worst:.2e} (<= 1e-10), {elapsed:.2f} s (< 5 s)")
    assert ok


def test_criterion_6_calibration():
    title = "Monte Carlo calibration, 2000 trials, 1% relative noise"
    grid = np.arange(1800.0, 1941.0, 5.0)
    noise = NoiseSpec(sigma=0.01, seed=20150101)
    null = TrajectorySpec(Hyperbolic(k=REF_K, a=REF_A), grid, noise)
    alt = TrajectorySpec(
        Piecewise((
            Segment(1800.0, 1900.0, Hyperbolic(k=REF_K, a=REF_A)),
            Segment(1900.0, 1940.0, Hyperbolic(k=2 * REF_K)),
        )),
        grid,
        noise,
    )
    start = time.perf_counter()
    rates = {
        alpha: monte_carlo_rates(null, alt, TestConfig(1900.0, alpha=alpha), trials=2000)
        for alpha in (0.05, 0.01)
    }
    elapsed = time.perf_counter() - start
    ok = elapsed < 60.0
    parts = []
    for alpha, r in rates.items():
        ok &= r.false_positive_rate <= alpha + 0.01 and r.takeoff_rate >= 0.95
        parts.append(
            f"alpha {alpha}: FPR {r.false_positive_rate:.4f} +/- {r.false_positive_halfwidth:.4f} "
            f"(<= {alpha + 0.01:.2f}), takeoff detection {r.takeoff_rate:.4f} (>= 0.95)"
        )
    record_criterion(6, title, ok, "; ".join(parts) + f"; {elapsed:.1f} s (< 60 s)")
    assert ok


def test_criterion_7_invariance():
    title = "scale and shift equivariance"
    years = np.arange(1000.0, 1951.0, 25.0)
    hyper = generate(TrajectorySpec(Hyperbolic(k=REF_K, a=REF_A), years, NoiseSpec(sigma=0.03, seed=7)))
    expo = load_series(FIXTURES / "exponential.csv")
    base = fit_hyperbolic(hyper)
    worst = 0.0
    verdicts_ok = True
    for c in (1e-3, 1.0, 1e3):
        for t0 in (0.0, 1000.0, 1970.0):
            moved = ObservationSeries(years - t0, hyper.values * c)
            fit = fit_hyperbolic(moved)
            want = shift_time_origin(rescale_params(base.params, c), t0)
            worst = max(worst, abs(fit.params.a / want.a - 1), abs(fit.params.k / want.k - 1))
            for s in (hyper, expo):
                ref = classify_model(s).choice
                verdicts_ok &= classify_model(ObservationSeries(s.years - t0, s.values * c)).choice is ref
    ok = worst <= 1e-9 and verdicts_ok
    record_criterion(
        7, title, ok,
        f"max relative parameter deviation {worst:.2e} (<= 1e-9), classify_model verdicts "
        f"{'unchanged' if verdicts_ok else 'CHANGED'} over 9 (c, t0) pairs",
    )
    assert ok


def test_criterion_8_determinism_and_figures(tmp_path):
    title = "CLI determinism and affine figure2 model column"
    args = [
        "report", "--input", str(FIXTURES / "takeoff_1900.csv"), "--window", "1700:1950", "--svg",
        "--config", str(FIXTURES / "calibration.conf"), "--trials", "200",
    ]
    codes = [main(args + ["--out", str(tmp_path / d)]) for d in ("one", "two")]
    names = sorted(p.name for p in (tmp_path / "one").iterdir())
    identical = codes == [0, 0] and names == sorted(p.name for p in (tmp_path / "two").iterdir())
    for name in names:
        a = (tmp_path / "one" / name).read_bytes().splitlines()
        b = (tmp_path / "two" / name).read_bytes().splitlines()
        if name == "report.md":
            a = [line for line in a if not line.startswith(b"Generated:")]
            b = [line for line in b if not line.startswith(b"Generated:")]
        identical &= a == b

    rows = [line.split(",") for line in (tmp_path / "one" / "figure2.csv").read_text().splitlines()[1:]]
    xs = [Fraction(float(r[0])) for r in rows]
    ys = [Fraction(float(r[2])) for r in rows]
    scale = max(abs(y) for y in ys)
    worst = max(
        abs(ys[i] - ys[i - 1] - (ys[i + 1] - ys[i - 1]) * (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]))
        for i in range(1, len(xs) - 1)
    )
    ratio = float(worst / scale)
    ok = identical and ratio <= 1e-15
    record_criterion(
        8, title, ok,
        f"{len(names)} output files {'byte-identical' if identical else 'DIFFER'} across two runs "
        f"(timestamp line excluded); figure2 max second difference {ratio:.1e} of scale (<= 1e-15)",
    )
    assert ok
