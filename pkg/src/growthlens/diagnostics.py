"""Deviation profiles, bending classification and gradient-change tests.

All tests operate on the reciprocal series ``1/S``. A hyperbola is a
straight line there; a move to a slower trajectory bends the reciprocal
upward away from the line and a move to a faster one (a takeoff) bends it
downward, i.e. makes the slope more negative.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from .errors import ContractError, TooSparseError
from .fitting import (
    MIN_POINTS,
    HyperbolicFitReport,
    LinearFit,
    ResidualStats,
    Weighting,
    Window,
    fit_line,
    fit_quality,
    reciprocal_weights,
    resolve_window,
)
from .series import (
    HyperbolicParams,
    ObservationSeries,
    TransformedSeries,
    log_transform,
    reciprocal_transform,
    window_mask,
)

DEFAULT_ALPHA = 0.01
# relative resolution of float64 line fits; differences below it are round-off, not signal
_NUMERICAL_FLOOR = 1e-9


class Bending(enum.Enum):
    UPWARD = "upward"
    DOWNWARD = "downward"
    NONE = "none"


class Overall(enum.Enum):
    CONSISTENT_HYPERBOLIC = "consistent-hyperbolic"
    SLOWER_DIVERSION = "slower-diversion"
    FASTER_DIVERSION = "faster-diversion"
    MIXED = "mixed"


class Change(enum.Enum):
    TAKEOFF = "takeoff"
    SLOWDOWN = "slowdown"
    NO_CHANGE = "no-change"
    UNTESTABLE = "untestable"


class Verdict(enum.Enum):
    SUPPORTED = "supported"
    CONTRADICTED = "contradicted"
    UNTESTABLE = "untestable"


class ModelKind(enum.Enum):
    HYPERBOLIC = "hyperbolic"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class RegimeBoundary:
    year: float
    label: str


# Postulated regime boundaries of the three-regime account of growth.
REGIME_BOUNDARIES = (
    RegimeBoundary(1750.0, "end of Malthusian stagnation (developed countries)"),
    RegimeBoundary(1870.0, "start of sustained growth (developed countries)"),
    RegimeBoundary(1900.0, "start of post-Malthusian growth (less-developed countries)"),
)


def relative_residuals(
    series: ObservationSeries, params: HyperbolicParams, window: Window = None
) -> ResidualStats:
    """Per-point ``(S_i - S_model(t_i)) / S_model(t_i)`` inside ``window``."""
    return fit_quality(series, params, window)


def classify_bending(
    reciprocal: TransformedSeries,
    baseline: LinearFit,
    tail_window: Window = None,
) -> Bending:
    """Direction in which the tail of a reciprocal series leaves ``baseline``.

    The signed mean of ``observed - line`` over the tail is compared with a
    band of two prediction standard errors of the baseline at the tail
    years. The tail points should not have been used to fit the baseline.
    """
    lo, hi = (None, None) if tail_window is None else tail_window
    tail = reciprocal.window(lo, hi)
    if len(tail) == 0:
        raise ContractError("tail window contains no observations")
    dev = tail.values - baseline.predict(tail.years)
    mean_dev = float(np.mean(dev))
    pse = baseline.prediction_stderr(tail.years)
    band = 2.0 * math.sqrt(float(np.mean(pse * pse)))
    band = max(band, _NUMERICAL_FLOOR * float(np.max(np.abs(tail.values))))
    if mean_dev > band:
        return Bending.UPWARD
    if mean_dev < -band:
        return Bending.DOWNWARD
    return Bending.NONE


@dataclass(frozen=True)
class SegmentBending:
    year_lo: float
    year_hi: float
    bending: Bending


@dataclass(frozen=True, eq=False)
class DeviationProfile:
    years: np.ndarray
    relative: np.ndarray
    segments: tuple[SegmentBending, ...]
    overall: Overall


def _overall(bends: Iterable[Bending]) -> Overall:
    seen = {b for b in bends if b is not Bending.NONE}
    if not seen:
        return Overall.CONSISTENT_HYPERBOLIC
    if seen == {Bending.UPWARD}:
        return Overall.SLOWER_DIVERSION
    if seen == {Bending.DOWNWARD}:
        return Overall.FASTER_DIVERSION
    return Overall.MIXED


def deviation_profile(series: ObservationSeries, fit: HyperbolicFitReport, block: int = 3) -> DeviationProfile:
    """Relative residuals plus block-wise bending against the fitted line.

    The series is cut into consecutive blocks of ``block`` points (a short
    remainder joins the last block); each block is classified with
    :func:`classify_bending`. Residuals are reported only for years before
    the fitted singularity, where the model is defined.
    """
    if block < MIN_POINTS:
        raise ContractError(f"bending blocks need at least {MIN_POINTS} points")
    params = fit.params
    defined = series.years < params.singularity
    years = series.years[defined]
    if years.size:
        rel = relative_residuals(series, params, (years[0], years[-1])).relative
    else:
        rel = np.empty(0)

    recip = reciprocal_transform(series)
    n = len(recip)
    segments = []
    starts = list(range(0, n - block + 1, block)) if n >= block else []
    for j, start in enumerate(starts):
        stop = n if j == len(starts) - 1 else start + block
        y_lo, y_hi = float(recip.years[start]), float(recip.years[stop - 1])
        segments.append(SegmentBending(y_lo, y_hi, classify_bending(recip, fit.line, (y_lo, y_hi))))
    return DeviationProfile(
        years=years,
        relative=rel,
        segments=tuple(segments),
        overall=_overall(s.bending for s in segments),
    )


@dataclass(frozen=True)
class BreakpointResult:
    candidate_year: float
    gradient_before: float
    gradient_after: float
    delta: float
    t_statistic: float
    p_value: float
    classification: Change
    n_before: int
    n_after: int
    dof: float = float("nan")
    alpha: float = DEFAULT_ALPHA
    significant_bonferroni: Optional[bool] = None
    note: str = ""

    @property
    def testable(self) -> bool:
        return self.classification is not Change.UNTESTABLE


def _slope_variances(before: LinearFit, after: LinearFit) -> tuple[float, float, float]:
    """Sampling variances of the two slopes and the degrees of freedom of their difference.

    Each side keeps its own residual variance; the degrees of freedom are
    Welch-Satterthwaite, capped at ``n_before + n_after - 4``. Switching to a
    pooled variance when the sample variances look similar would be a
    pre-test on the same data, which inflates the false-positive rate.
    """
    pooled_dof = float(before.dof + after.dof)
    vb = before.slope_stderr ** 2
    va = after.slope_stderr ** 2
    denom = vb * vb / before.dof + va * va / after.dof
    if denom == 0.0:
        return vb, va, pooled_dof
    return vb, va, min(pooled_dof, (vb + va) ** 2 / denom)


def gradient_change_test(
    series: ObservationSeries,
    candidate_year: float,
    window: Window = None,
    alpha: float = DEFAULT_ALPHA,
    weighting: Weighting | str = Weighting.UNIFORM,
) -> BreakpointResult:
    """Two-segment test for a change of reciprocal slope at ``candidate_year``.

    Separate lines are fitted to the in-window reciprocal values strictly
    before and strictly after the candidate year (an observation exactly at
    the candidate year belongs to neither side). The statistic is
    ``(slope_after - slope_before) / sqrt(se_before**2 + se_after**2)`` with a
    two-sided Student t p-value on Welch-Satterthwaite degrees of freedom
    (never more than ``n_before + n_after - 4``).

    Raises
    ------
    TooSparseError
        Fewer than three in-window observations on either side.
    """
    if not 0.0 < alpha < 1.0:
        raise ContractError(f"alpha must lie in (0, 1), got {alpha!r}")
    weighting = Weighting.parse(weighting)
    lo, hi = resolve_window(series, window)
    sub = series.window(lo, hi)
    recip = reciprocal_transform(sub)
    t = float(candidate_year)
    before = recip.years < t
    after = recip.years > t
    for side, mask in (("before", before), ("after", after)):
        if int(mask.sum()) < MIN_POINTS:
            raise TooSparseError(
                f"{int(mask.sum())} observation(s) {side} {t:g} in window {lo:g}..{hi:g}; "
                f"at least {MIN_POINTS} required on each side"
            )
    w = reciprocal_weights(sub.values, weighting)
    fit_b = fit_line(recip.years[before], recip.values[before], None if w is None else w[before])
    fit_a = fit_line(recip.years[after], recip.values[after], None if w is None else w[after])

    delta = fit_a.slope - fit_b.slope
    var_b, var_a, dof = _slope_variances(fit_b, fit_a)
    floor = _NUMERICAL_FLOOR * max(abs(fit_b.slope), abs(fit_a.slope))
    se = math.sqrt(var_b + var_a + floor * floor)
    if se == 0.0:
        t_stat = 0.0
    else:
        t_stat = delta / se
    p_value = float(min(1.0, 2.0 * stats.t.sf(abs(t_stat), dof)))

    if p_value >= alpha:
        change = Change.NO_CHANGE
    elif fit_a.slope < fit_b.slope:
        change = Change.TAKEOFF
    else:
        change = Change.SLOWDOWN
    return BreakpointResult(
        candidate_year=t,
        gradient_before=fit_b.slope,
        gradient_after=fit_a.slope,
        delta=delta,
        t_statistic=float(t_stat),
        p_value=p_value,
        classification=change,
        n_before=fit_b.n,
        n_after=fit_a.n,
        dof=float(dof),
        alpha=alpha,
    )


def _untestable(series: ObservationSeries, year: float, window: Window, alpha: float, reason: str) -> BreakpointResult:
    lo, hi = resolve_window(series, window)
    years = series.years[window_mask(series.years, lo, hi)]
    nan = float("nan")
    return BreakpointResult(
        candidate_year=float(year),
        gradient_before=nan,
        gradient_after=nan,
        delta=nan,
        t_statistic=nan,
        p_value=nan,
        classification=Change.UNTESTABLE,
        n_before=int(np.sum(years < year)),
        n_after=int(np.sum(years > year)),
        alpha=alpha,
        note=reason,
    )


def breakpoint_scan(
    series: ObservationSeries,
    candidate_grid: Sequence[float],
    window: Window = None,
    alpha: float = DEFAULT_ALPHA,
    weighting: Weighting | str = Weighting.UNIFORM,
) -> list[BreakpointResult]:
    """Run :func:`gradient_change_test` at each candidate year.

    Candidates without three observations on each side come back as
    ``Change.UNTESTABLE`` rows. Testable rows carry a Bonferroni flag,
    ``p < alpha / m`` with ``m`` the number of testable candidates. Results
    are ordered by candidate year.
    """
    results = []
    for year in sorted(float(y) for y in candidate_grid):
        try:
            results.append(gradient_change_test(series, year, window, alpha, weighting))
        except TooSparseError as exc:
            results.append(_untestable(series, year, window, alpha, str(exc)))
    m = sum(r.testable for r in results)
    if m == 0:
        raise ContractError("no candidate year in the grid has enough observations on both sides")
    return [
        r if not r.testable else _with_bonferroni(r, r.p_value < alpha / m)
        for r in results
    ]


def _with_bonferroni(result: BreakpointResult, flag: bool) -> BreakpointResult:
    return replace(result, significant_bonferroni=bool(flag))


@dataclass(frozen=True)
class ModelChoice:
    choice: ModelKind
    r2_reciprocal: float
    r2_log: float


def classify_model(series: ObservationSeries, window: Window = None) -> ModelChoice:
    """Pick the linearization (reciprocal or log) with the higher R².

    Ties go to the hyperbolic model.
    """
    lo, hi = resolve_window(series, window)
    sub = series.window(lo, hi)
    if len(sub) < MIN_POINTS:
        raise TooSparseError(
            f"{len(sub)} observation(s) in window {lo:g}..{hi:g}; at least {MIN_POINTS} required"
        )
    recip = reciprocal_transform(sub)
    logs = log_transform(sub)
    r2_rec = fit_line(recip.years, recip.values).r2
    r2_log = fit_line(logs.years, logs.values).r2
    choice = ModelKind.HYPERBOLIC if r2_rec >= r2_log else ModelKind.EXPONENTIAL
    return ModelChoice(choice, r2_rec, r2_log)


@dataclass(frozen=True)
class RegimeAssessment:
    boundary: RegimeBoundary
    test: BreakpointResult
    bending: Optional[Bending]
    verdict: Verdict


def regime_overlay_report(
    series: ObservationSeries,
    fit: HyperbolicFitReport,
    window: Window = None,
    alpha: float = DEFAULT_ALPHA,
    boundaries: Sequence[RegimeBoundary] = REGIME_BOUNDARIES,
) -> list[RegimeAssessment]:
    """Check each postulated regime boundary for a takeoff.

    A boundary is ``SUPPORTED`` only when the gradient-change test finds a
    significant takeoff and the points after it bend downward from the line
    fitted before it. ``window`` defaults to the fit's window.
    """
    window = fit.window if window is None else window
    lo, hi = resolve_window(series, window)
    sub = series.window(lo, hi)
    recip = reciprocal_transform(sub)
    out = []
    for boundary in boundaries:
        try:
            test = gradient_change_test(series, boundary.year, (lo, hi), alpha, fit.weighting)
        except TooSparseError as exc:
            test = _untestable(series, boundary.year, (lo, hi), alpha, str(exc))
            out.append(RegimeAssessment(boundary, test, None, Verdict.UNTESTABLE))
            continue
        before = recip.years < boundary.year
        w = reciprocal_weights(sub.values, fit.weighting)
        baseline = fit_line(recip.years[before], recip.values[before], None if w is None else w[before])
        bending = classify_bending(
            recip.window(np.nextafter(boundary.year, np.inf), None), baseline
        )
        supported = test.classification is Change.TAKEOFF and bending is Bending.DOWNWARD
        out.append(
            RegimeAssessment(
                boundary,
                test,
                bending,
                Verdict.SUPPORTED if supported else Verdict.CONTRADICTED,
            )
        )
    return out
