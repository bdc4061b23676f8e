"""Observation series, the hyperbolic model and its linearizing transforms.

The model is ``S(t) = 1 / (a - k t)`` with ``a, k > 0``; its reciprocal is
the straight line ``a - k t`` and it diverges at ``t_s = a / k``.
Years are calendar years AD held as floats (AD 1 == 1.0).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ContractError, DomainError, SingularityError

CANONICAL_UNIT = "billions of 1990 International Geary-Khamis dollars"


def _frozen_array(values: Iterable[float]) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ContractError("expected a one-dimensional sequence")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ObservationSeries:
    """Ordered ``(year, value)`` observations for one entity.

    Construction only checks shape and finiteness. The domain invariants
    (strictly increasing years, positive values, enough points) are checked
    by :func:`growthlens.ingest.validate_series` and enforced by the
    operations that need them, so a bad series can still be inspected.
    """

    years: np.ndarray
    values: np.ndarray
    entity: str = ""
    unit: str = CANONICAL_UNIT
    source: str = ""

    def __post_init__(self) -> None:
        years = _frozen_array(self.years)
        values = _frozen_array(self.values)
        if years.shape != values.shape:
            raise ContractError(
                f"years and values differ in length ({years.size} vs {values.size})"
            )
        if not (np.all(np.isfinite(years)) and np.all(np.isfinite(values))):
            raise ContractError("years and values must be finite")
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.years.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ObservationSeries):
            return NotImplemented
        return (
            self.entity == other.entity
            and self.unit == other.unit
            and np.array_equal(self.years, other.years)
            and np.array_equal(self.values, other.values)
        )

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.years.tolist(), self.values.tolist()))

    def window(self, lo: float | None = None, hi: float | None = None) -> "ObservationSeries":
        """Sub-series with ``lo <= year <= hi`` (open ends allowed)."""
        mask = window_mask(self.years, lo, hi)
        return self.with_values(self.values[mask], years=self.years[mask])

    def scaled(self, c: float) -> "ObservationSeries":
        return self.with_values(self.values * c)

    def with_values(self, values, years=None) -> "ObservationSeries":
        return ObservationSeries(
            self.years if years is None else years,
            values,
            entity=self.entity,
            unit=self.unit,
            source=self.source,
        )


def window_mask(years: np.ndarray, lo: float | None, hi: float | None) -> np.ndarray:
    mask = np.ones(years.shape, dtype=bool)
    if lo is not None:
        mask &= years >= lo
    if hi is not None:
        mask &= years <= hi
    return mask


@dataclass(frozen=True)
class HyperbolicParams:
    """Parameters of ``S(t) = 1 / (a - k t)``.

    ``a`` is in 1/GDP and ``k`` in 1/(GDP year).
    """

    a: float
    k: float

    def __post_init__(self) -> None:
        a, k = float(self.a), float(self.k)
        if not (np.isfinite(a) and np.isfinite(k)):
            raise DomainError("hyperbolic parameters must be finite")
        if a <= 0.0 or k <= 0.0:
            raise DomainError(f"a and k must be positive (got a={a!r}, k={k!r})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "k", k)

    @property
    def singularity(self) -> float:
        return self.a / self.k


class Space(enum.Enum):
    RECIPROCAL = "reciprocal"
    LOG = "log"


@dataclass(frozen=True, eq=False)
class TransformedSeries:
    space: Space
    years: np.ndarray
    values: np.ndarray
    entity: str = field(default="")

    def __post_init__(self) -> None:
        object.__setattr__(self, "years", _frozen_array(self.years))
        object.__setattr__(self, "values", _frozen_array(self.values))

    def __len__(self) -> int:
        return int(self.years.size)

    def window(self, lo: float | None = None, hi: float | None = None) -> "TransformedSeries":
        mask = window_mask(self.years, lo, hi)
        return TransformedSeries(self.space, self.years[mask], self.values[mask], self.entity)


def _require_positive(series: ObservationSeries, what: str) -> None:
    bad = np.flatnonzero(series.values <= 0.0)
    if bad.size:
        year = float(series.years[bad[0]])
        raise DomainError(
            f"{what} undefined for non-positive value {series.values[bad[0]]!r} "
            f"at year {year:g}",
            year=year,
        )


def reciprocal_transform(series: ObservationSeries) -> TransformedSeries:
    """Map ``S_i`` to ``1 / S_i``; hyperbolic growth becomes a straight line."""
    _require_positive(series, "reciprocal")
    return TransformedSeries(Space.RECIPROCAL, series.years, 1.0 / series.values, series.entity)


def log_transform(series: ObservationSeries) -> TransformedSeries:
    """Map ``S_i`` to ``ln S_i``; exponential growth becomes a straight line."""
    _require_positive(series, "logarithm")
    return TransformedSeries(Space.LOG, series.years, np.log(series.values), series.entity)


def evaluate_hyperbolic(params: HyperbolicParams, t):
    """Evaluate ``1 / (a - k t)`` at a year or an array of years.

    Raises
    ------
    SingularityError
        If any ``t`` is at or past ``a / k``.
    """
    t_arr = np.asarray(t, dtype=np.float64)
    denom = params.a - params.k * t_arr
    if np.any(denom <= 0.0):
        raise SingularityError(
            f"t={float(np.max(t_arr)):g} is at or beyond the singularity "
            f"t_s={params.singularity:.6g}",
            singularity=params.singularity,
        )
    out = 1.0 / denom
    return float(out) if out.ndim == 0 else out


def singularity_time(params: HyperbolicParams) -> float:
    return params.singularity


def rescale_params(params: HyperbolicParams, c: float) -> HyperbolicParams:
    """Parameters fitting ``c * S(t)`` given those fitting ``S(t)``."""
    if not c > 0.0:
        raise DomainError(f"scale factor must be positive, got {c!r}")
    return HyperbolicParams(params.a / c, params.k / c)


def shift_time_origin(params: HyperbolicParams, t0: float) -> HyperbolicParams:
    """Re-express the model in the frame ``t' = t - t0``."""
    a_shifted = params.a - params.k * t0
    if a_shifted <= 0.0:
        raise SingularityError(
            f"shifted origin t0={t0:g} is at or after the singularity "
            f"t_s={params.singularity:.6g}",
            singularity=params.singularity,
        )
    return HyperbolicParams(a_shifted, params.k)
