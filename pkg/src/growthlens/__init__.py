"""Hyperbolic growth fitting and takeoff tests for historical GDP series."""

from .diagnostics import (
    REGIME_BOUNDARIES,
    Bending,
    BreakpointResult,
    Change,
    DeviationProfile,
    ModelKind,
    Overall,
    Verdict,
    breakpoint_scan,
    classify_bending,
    classify_model,
    deviation_profile,
    gradient_change_test,
    regime_overlay_report,
    relative_residuals,
)
from .fitting import (
    DEFAULT_WINDOW,
    HyperbolicFitReport,
    LinearFit,
    Weighting,
    fit_exponential,
    fit_hyperbolic,
    fit_line,
    fit_quality,
)
from .ingest import load_series, parse_long_table, parse_wide_table, validate_series
from .series import (
    HyperbolicParams,
    ObservationSeries,
    Space,
    TransformedSeries,
    evaluate_hyperbolic,
    log_transform,
    reciprocal_transform,
    rescale_params,
    shift_time_origin,
    singularity_time,
)

__version__ = "0.1.0"
