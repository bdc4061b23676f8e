"""Closed-form straight-line fits in the reciprocal and log spaces."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import ContractError, NotHyperbolicError, SingularDesignError, SingularityError, TooSparseError
from .series import (
    HyperbolicParams,
    ObservationSeries,
    log_transform,
    reciprocal_transform,
    window_mask,
)

MIN_POINTS = 3
DEFAULT_WINDOW = (1000.0, 1950.0)

Window = Optional[Sequence[Optional[float]]]


class Weighting(enum.Enum):
    UNIFORM = "uniform"
    RELATIVE = "relative"

    @classmethod
    def parse(cls, value: "Weighting | str") -> "Weighting":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ContractError(f"unknown weighting {value!r}; expected 'uniform' or 'relative'") from None


@dataclass(frozen=True, eq=False)
class LinearFit:
    """Result of a (weighted) least-squares line ``y = intercept + slope * x``.

    ``sigma2`` is the residual variance at unit weight; weights are
    normalized to mean one before solving, so it is comparable between
    weighted and unweighted fits of the same data.
    """

    slope: float
    intercept: float
    slope_stderr: float
    intercept_stderr: float
    slope_intercept_covariance: float
    r2: float
    n: int
    residuals: np.ndarray
    sigma2: float
    x_mean: float
    sxx: float
    sum_weights: float

    def predict(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=np.float64)

    def prediction_stderr(self, x):
        """Standard error for a new unit-weight observation at ``x``."""
        dx = np.asarray(x, dtype=np.float64) - self.x_mean
        return np.sqrt(self.sigma2 * (1.0 + 1.0 / self.sum_weights + dx * dx / self.sxx))

    @property
    def dof(self) -> int:
        return self.n - 2


def _as_float_array(values, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ContractError(f"{name} must be one-dimensional")
    return arr


def fit_line(xs, ys, weights=None) -> LinearFit:
    """Weighted least-squares straight line via the centered normal equations.

    Parameters
    ----------
    xs, ys : array_like
        Equal-length samples, at least three.
    weights : array_like, optional
        Positive relative weights. They are rescaled to mean one, so only
        their ratios matter.

    Raises
    ------
    ContractError
        Length mismatch, fewer than three points or non-positive weights.
    SingularDesignError
        All ``xs`` identical.
    """
    x = _as_float_array(xs, "xs")
    y = _as_float_array(ys, "ys")
    if x.size != y.size:
        raise ContractError(f"xs and ys differ in length ({x.size} vs {y.size})")
    n = x.size
    if n < MIN_POINTS:
        raise ContractError(f"need at least {MIN_POINTS} points, got {n}")
    if weights is None:
        w = np.ones(n)
    else:
        w = _as_float_array(weights, "weights")
        if w.size != n:
            raise ContractError(f"weights length {w.size} does not match {n} points")
        if not np.all(w > 0.0) or not np.all(np.isfinite(w)):
            raise ContractError("weights must be positive and finite")
        w = np.ascontiguousarray(w / w.mean())

    if np.ptp(x) == 0.0:
        raise SingularDesignError("all x values are identical; slope is not identified")

    slope, intercept, xbar, sw, sxx, ss_res, ss_tot = _kernels.wls_line(x, y, w)
    slope = float(slope)
    intercept = float(intercept)
    residuals = y - (intercept + slope * x)
    residuals.setflags(write=False)

    scale = float(np.max(np.abs(y)))
    tiny = n * (1e-14 * scale) ** 2
    if ss_tot <= tiny:
        # flat response: perfect fit if residuals vanish too, otherwise no explanatory power
        r2 = 1.0 if ss_res <= tiny else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))

    sigma2 = float(ss_res) / (n - 2)
    var_slope = sigma2 / sxx
    var_intercept = sigma2 * (1.0 / sw + xbar * xbar / sxx)
    return LinearFit(
        slope=slope,
        intercept=intercept,
        slope_stderr=math.sqrt(var_slope),
        intercept_stderr=math.sqrt(var_intercept),
        slope_intercept_covariance=-xbar * var_slope,
        r2=float(r2),
        n=int(n),
        residuals=residuals,
        sigma2=sigma2,
        x_mean=float(xbar),
        sxx=float(sxx),
        sum_weights=float(sw),
    )


def resolve_window(series: ObservationSeries, window: Window) -> tuple[float, float]:
    """Replace open ends of ``window`` with the series' own extent."""
    lo, hi = (None, None) if window is None else window
    if len(series) == 0:
        return (float("nan"), float("nan"))
    lo = float(series.years[0]) if lo is None else float(lo)
    hi = float(series.years[-1]) if hi is None else float(hi)
    if lo > hi:
        raise ContractError(f"window lower bound {lo:g} exceeds upper bound {hi:g}")
    return lo, hi


def _windowed(series: ObservationSeries, window: Window) -> tuple[ObservationSeries, tuple[float, float]]:
    lo, hi = resolve_window(series, window)
    sub = series.window(lo, hi)
    if len(sub) < MIN_POINTS:
        raise TooSparseError(
            f"{len(sub)} observation(s) in window {lo:g}..{hi:g}; at least {MIN_POINTS} required"
        )
    return sub, (lo, hi)


@dataclass(frozen=True, eq=False)
class ResidualStats:
    years: np.ndarray
    relative: np.ndarray
    mean_abs: float
    max_abs: float


@dataclass(frozen=True, eq=False)
class HyperbolicFitReport:
    params: HyperbolicParams
    line: LinearFit
    window: tuple[float, float]
    weighting: Weighting
    r2_reciprocal: float
    natural_space_residual_stats: tuple[float, float]

    @property
    def singularity(self) -> float:
        return self.params.singularity


def reciprocal_weights(values: np.ndarray, weighting: Weighting) -> Optional[np.ndarray]:
    # S^2 weights make reciprocal-space residuals behave like relative natural-space ones
    if weighting is Weighting.RELATIVE:
        return values * values
    return None


def fit_hyperbolic(
    series: ObservationSeries,
    window: Window = None,
    weighting: Weighting | str = Weighting.UNIFORM,
) -> HyperbolicFitReport:
    """Fit ``1/S = a - k t`` by least squares on the reciprocal series.

    Raises
    ------
    TooSparseError
        Fewer than three observations in ``window``.
    NotHyperbolicError
        The fitted reciprocal slope is not negative.
    """
    weighting = Weighting.parse(weighting)
    sub, bounds = _windowed(series, window)
    recip = reciprocal_transform(sub)
    line = fit_line(recip.years, recip.values, reciprocal_weights(sub.values, weighting))
    if not line.slope < 0.0:
        raise NotHyperbolicError(
            f"reciprocal slope {line.slope:.6g} is not negative over {bounds[0]:g}..{bounds[1]:g}; "
            "the data do not describe hyperbolic growth"
        )
    if not line.intercept > 0.0:
        raise NotHyperbolicError(
            f"reciprocal intercept {line.intercept:.6g} is not positive; "
            "the fitted singularity lies before year 0"
        )
    params = HyperbolicParams(line.intercept, -line.slope)
    ok = sub.years < params.singularity
    if np.any(ok):
        rel = _relative_residuals(sub.years[ok], sub.values[ok], params)
        stats = (float(np.mean(np.abs(rel))), float(np.max(np.abs(rel))))
    else:
        stats = (float("nan"), float("nan"))
    return HyperbolicFitReport(
        params=params,
        line=line,
        window=bounds,
        weighting=weighting,
        r2_reciprocal=line.r2,
        natural_space_residual_stats=stats,
    )


@dataclass(frozen=True, eq=False)
class ExponentialFit:
    rate: float
    level: float
    line: LinearFit


def fit_exponential(series: ObservationSeries, window: Window = None) -> ExponentialFit:
    """Fit ``ln S = ln(level) + rate * t``."""
    sub, _ = _windowed(series, window)
    logs = log_transform(sub)
    line = fit_line(logs.years, logs.values)
    return ExponentialFit(rate=line.slope, level=math.exp(line.intercept), line=line)


def _relative_residuals(years: np.ndarray, values: np.ndarray, params: HyperbolicParams) -> np.ndarray:
    model = 1.0 / (params.a - params.k * years)
    return (values - model) / model


def fit_quality(series: ObservationSeries, params: HyperbolicParams, window: Window = None) -> ResidualStats:
    """Relative natural-space residuals ``(S_data - S_model) / S_model`` in ``window``."""
    lo, hi = resolve_window(series, window)
    mask = window_mask(series.years, lo, hi)
    years = series.years[mask]
    if years.size == 0:
        raise TooSparseError(f"no observations in window {lo:g}..{hi:g}")
    if np.any(years >= params.singularity):
        raise SingularityError(
            f"window {lo:g}..{hi:g} reaches the singularity t_s={params.singularity:.6g}",
            singularity=params.singularity,
        )
    rel = _relative_residuals(years, series.values[mask], params)
    rel.setflags(write=False)
    return ResidualStats(
        years=years,
        relative=rel,
        mean_abs=float(np.mean(np.abs(rel))),
        max_abs=float(np.max(np.abs(rel))),
    )
