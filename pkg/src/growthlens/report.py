"""Figure data, hand-rolled SVG charts and the markdown run report."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .diagnostics import (
    REGIME_BOUNDARIES,
    BreakpointResult,
    DeviationProfile,
    ModelChoice,
    RegimeAssessment,
)
from .errors import OutputError
from .fitting import HyperbolicFitReport
from .series import ObservationSeries
from .synth import MonteCarloRates


def fmt(x) -> str:
    """Exact, locale-free text for a number (``repr`` of the float); blank for None/NaN."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def write_text(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def kv_text(pairs: Sequence[tuple[str, object]]) -> str:
    lines = []
    for key, value in pairs:
        text = value if isinstance(value, str) else fmt(value)
        lines.append(f"{key}={text}")
    return "\n".join(lines) + "\n"


def csv_text(header: Sequence[str], rows) -> str:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(c if isinstance(c, str) else fmt(c) for c in row))
    return "\n".join(out) + "\n"


def figure1_rows(series: ObservationSeries, fit: HyperbolicFitReport):
    a, k = fit.params.a, fit.params.k
    for t, s in zip(series.years.tolist(), series.values.tolist()):
        denom = a - k * t
        yield (t, s, 1.0 / denom if denom > 0 else None)


def figure2_rows(series: ObservationSeries, fit: HyperbolicFitReport):
    a, k = fit.params.a, fit.params.k
    for t, s in zip(series.years.tolist(), series.values.tolist()):
        yield (t, 1.0 / s, a - k * t)


# ---------------------------------------------------------------------------
# SVG


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _label(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e5 or abs(v) < 1e-3:
        return f"{v:.0e}"
    return f"{v:g}"


class SvgChart:
    """Minimal scatter-plus-line chart written as plain SVG elements."""

    def __init__(self, x_range, y_range, log_y=False, width=720, height=440, margin=(60, 20, 30, 80)):
        self.width, self.height = width, height
        self.top, self.right, self.bottom_pad, self.left = margin
        self.bottom = height - 50
        self.x0, self.x1 = x_range
        self.log_y = log_y
        y0, y1 = y_range
        if log_y:
            y0, y1 = math.log10(y0), math.log10(y1)
        if y1 == y0:
            y0, y1 = y0 - 1, y1 + 1
        self.y0, self.y1 = y0, y1
        self.parts: list[str] = []

    def px(self, x: float) -> float:
        return self.left + (x - self.x0) / (self.x1 - self.x0) * (self.width - self.left - self.right)

    def py(self, y: float) -> float:
        if self.log_y:
            y = math.log10(y)
        return self.bottom - (y - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)

    def axes(self, title: str, x_label: str, y_label: str) -> None:
        p = self.parts
        p.append(
            f'<rect x="{self.left}" y="{self.top}" width="{self.width - self.left - self.right}" '
            f'height="{self.bottom - self.top}" fill="none" stroke="#333"/>'
        )
        p.append(f'<text x="{self.width / 2:.1f}" y="{self.top - 25}" text-anchor="middle" font-size="15">{escape(title)}</text>')
        p.append(f'<text x="{self.width / 2:.1f}" y="{self.height - 10}" text-anchor="middle" font-size="12">{escape(x_label)}</text>')
        p.append(
            f'<text x="16" y="{(self.top + self.bottom) / 2:.1f}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 16 {(self.top + self.bottom) / 2:.1f})">{escape(y_label)}</text>'
        )
        for t in _nice_ticks(self.x0, self.x1):
            x = self.px(t)
            p.append(f'<line x1="{x:.2f}" y1="{self.bottom}" x2="{x:.2f}" y2="{self.bottom + 5}" stroke="#333"/>')
            p.append(f'<text x="{x:.2f}" y="{self.bottom + 18}" text-anchor="middle" font-size="11">{t:g}</text>')
        if self.log_y:
            ticks = [10.0**e for e in range(math.floor(self.y0), math.ceil(self.y1) + 1) if self.y0 <= e <= self.y1]
        else:
            ticks = _nice_ticks(self.y0, self.y1)
        for t in ticks:
            y = self.py(t)
            p.append(f'<line x1="{self.left - 5}" y1="{y:.2f}" x2="{self.left}" y2="{y:.2f}" stroke="#333"/>')
            p.append(f'<text x="{self.left - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="11">{_label(t)}</text>')

    def markers(self, xs, ys, colour="#1f4e9c") -> None:
        for x, y in zip(xs, ys):
            self.parts.append(f'<circle cx="{self.px(x):.2f}" cy="{self.py(y):.2f}" r="3" fill="{colour}"/>')

    def polyline(self, xs, ys, colour="#c0392b") -> None:
        pts = " ".join(f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in zip(xs, ys))
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1.5"/>')

    def vrule(self, x: float, label: str) -> None:
        if not self.x0 <= x <= self.x1:
            return
        px = self.px(x)
        self.parts.append(
            f'<line x1="{px:.2f}" y1="{self.top}" x2="{px:.2f}" y2="{self.bottom}" '
            'stroke="#777" stroke-dasharray="4 3"/>'
        )
        self.parts.append(
            f'<text x="{px + 3:.2f}" y="{self.top + 12}" font-size="10" fill="#555">{escape(label)}</text>'
        )

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif">\n'
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>\n'
        )
        return head + "\n".join(self.parts) + "\n</svg>\n"


def _model_curve(fit: HyperbolicFitReport, lo: float, hi: float, n: int = 400):
    t_s = fit.params.singularity
    end = min(hi, lo + (t_s - lo) * 0.999) if t_s > lo else lo
    ts = np.linspace(lo, end, n)
    return ts, 1.0 / (fit.params.a - fit.params.k * ts)


def figure1_svg(series: ObservationSeries, fit: HyperbolicFitReport) -> str:
    lo, hi = float(series.years[0]), float(series.years[-1])
    ts, model = _model_curve(fit, lo, hi)
    ys = np.concatenate([series.values, model])
    ys = ys[ys > 0]
    chart = SvgChart((lo, hi), (float(ys.min()) / 1.5, float(ys.max()) * 1.5), log_y=True)
    chart.axes(
        f"GDP, {series.entity or 'series'} (log scale)",
        "Year (AD)",
        "GDP [billions of 1990 GK$]",
    )
    for b in REGIME_BOUNDARIES:
        chart.vrule(b.year, f"{b.year:g}")
    chart.polyline(ts, model)
    chart.markers(series.years, series.values)
    return chart.render()


def figure2_svg(series: ObservationSeries, fit: HyperbolicFitReport) -> str:
    lo, hi = float(series.years[0]), float(series.years[-1])
    recip = 1.0 / series.values
    line_x = np.array([lo, hi])
    line_y = fit.params.a - fit.params.k * line_x
    ys = np.concatenate([recip, line_y])
    pad = 0.05 * float(ys.max() - ys.min() or 1.0)
    chart = SvgChart((lo, hi), (float(ys.min()) - pad, float(ys.max()) + pad))
    chart.axes(f"Reciprocal GDP, {series.entity or 'series'}", "Year (AD)", "1/GDP [1/billion 1990 GK$]")
    for b in REGIME_BOUNDARIES:
        chart.vrule(b.year, f"{b.year:g}")
    chart.polyline(line_x, line_y)
    chart.markers(series.years, recip)
    return chart.render()


def emit_figure_data(series: ObservationSeries, fit: HyperbolicFitReport, out_dir, emit_svg: bool = False) -> list[Path]:
    """Write ``figure1.csv``/``figure2.csv`` (and SVGs) to ``out_dir``."""
    out = Path(out_dir)
    paths = [
        write_text(out / "figure1.csv", csv_text(("year", "gdp", "model_gdp"), figure1_rows(series, fit))),
        write_text(out / "figure2.csv", csv_text(("year", "reciprocal_gdp", "model_line"), figure2_rows(series, fit))),
    ]
    if emit_svg:
        paths.append(write_text(out / "figure1.svg", figure1_svg(series, fit)))
        paths.append(write_text(out / "figure2.svg", figure2_svg(series, fit)))
    return paths


# ---------------------------------------------------------------------------
# tables


BREAKPOINT_HEADER = (
    "candidate_year",
    "n_before",
    "n_after",
    "gradient_before",
    "gradient_after",
    "delta",
    "t_statistic",
    "dof",
    "p_value",
    "alpha",
    "classification",
    "significant_bonferroni",
    "note",
)


def breakpoint_rows(results: Sequence[BreakpointResult]):
    for r in results:
        yield (
            r.candidate_year,
            r.n_before,
            r.n_after,
            r.gradient_before,
            r.gradient_after,
            r.delta,
            r.t_statistic,
            r.dof,
            r.p_value,
            r.alpha,
            r.classification.value,
            r.significant_bonferroni,
            r.note.replace(",", ";"),
        )


REGIME_HEADER = ("boundary_year", "label", "classification", "p_value", "bending", "verdict")


def regime_rows(assessments: Sequence[RegimeAssessment]):
    for a in assessments:
        yield (
            a.boundary.year,
            a.boundary.label,
            a.test.classification.value,
            a.test.p_value,
            "" if a.bending is None else a.bending.value,
            a.verdict.value,
        )


def residual_rows(series: ObservationSeries, fit: HyperbolicFitReport):
    lo, hi = fit.window
    t_s = fit.params.singularity
    for t, s in zip(series.years.tolist(), series.values.tolist()):
        if t < t_s:
            model = 1.0 / (fit.params.a - fit.params.k * t)
            rel = (s - model) / model
        else:
            model = rel = None
        yield (t, s, model, rel, lo <= t <= hi)


# ---------------------------------------------------------------------------
# report


@dataclass
class RunResults:
    """Everything a command produced, for :func:`render_report`."""

    command: str
    version: str
    seed: int
    input_path: Optional[str] = None
    input_sha256: Optional[str] = None
    series: Optional[ObservationSeries] = None
    fit: Optional[HyperbolicFitReport] = None
    alt_fit: Optional[HyperbolicFitReport] = None
    model: Optional[ModelChoice] = None
    profile: Optional[DeviationProfile] = None
    breakpoints: Sequence[BreakpointResult] = field(default_factory=list)
    regimes: Sequence[RegimeAssessment] = field(default_factory=list)
    rates: Sequence[MonteCarloRates] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def _g(x, digits: int = 6) -> str:
    if x is None:
        return "n/a"
    x = float(x)
    if math.isnan(x):
        return "n/a"
    return f"{x:.{digits}g}"


def render_report(results: RunResults, timestamp: str) -> str:
    """Markdown report. Only the ``Generated:`` line depends on ``timestamp``."""
    r = results
    lines = [f"# growthlens report: {r.command}", "", f"Generated: {timestamp}", ""]
    lines += ["## Provenance", ""]
    lines.append(f"- tool version: {r.version}")
    lines.append(f"- seed: {r.seed}")
    if r.input_path is not None:
        lines.append(f"- input: {r.input_path}")
        lines.append(f"- input sha256: {r.input_sha256}")
    if r.series is not None:
        lines.append(f"- entity: {r.series.entity or 'n/a'}")
        lines.append(f"- unit: {r.series.unit}")
        lines.append(f"- observations: {len(r.series)} ({_g(r.series.years[0])} to {_g(r.series.years[-1])})")
    lines.append("")

    if r.fit is not None:
        f = r.fit
        lines += ["## Hyperbolic fit (reciprocal space)", ""]
        lines.append(f"- window: {_g(f.window[0])} to {_g(f.window[1])}, weighting {f.weighting.value}, n = {f.line.n}")
        lines.append(f"- a = {_g(f.params.a)} +/- {_g(f.line.intercept_stderr, 3)} (1/GDP)")
        lines.append(f"- k = {_g(f.params.k)} +/- {_g(f.line.slope_stderr, 3)} (1/(GDP year))")
        lines.append(f"- singularity a/k = {_g(f.params.singularity)}")
        lines.append(f"- R^2 (reciprocal) = {_g(f.r2_reciprocal)}")
        mean_abs, max_abs = f.natural_space_residual_stats
        lines.append(f"- |relative residual| in window: mean {_g(mean_abs, 4)}, max {_g(max_abs, 4)}")
        if r.alt_fit is not None:
            alt = r.alt_fit
            lines.append(
                f"- {alt.weighting.value} weighting gives k = {_g(alt.params.k)}, "
                f"a = {_g(alt.params.a)} (k differs by {_g(100 * abs(alt.params.k / f.params.k - 1), 3)}%)"
            )
        lines.append("")

    if r.model is not None:
        m = r.model
        lines += ["## Model discrimination", ""]
        lines.append(f"- verdict: {m.choice.value}")
        lines.append(f"- R^2 reciprocal = {_g(m.r2_reciprocal)}, R^2 log = {_g(m.r2_log)}")
        lines.append("")

    if r.profile is not None and r.fit is not None and r.series is not None:
        p = r.profile
        lines += ["## Deviations from the fitted hyperbola", ""]
        lines.append(f"- overall: {p.overall.value}")
        bent = [s for s in p.segments if s.bending.value != "none"]
        lines.append(f"- blocks bending away from the line: {len(bent)} of {len(p.segments)}")
        for s in bent:
            lines.append(f"  - {_g(s.year_lo)} to {_g(s.year_hi)}: {s.bending.value}")
        lines += ["", "| year | GDP | model | relative residual |", "|---:|---:|---:|---:|"]
        for t, s, model, rel, _ in residual_rows(r.series, r.fit):
            lines.append(f"| {_g(t)} | {_g(s)} | {_g(model)} | {'n/a' if rel is None else f'{rel:+.3f}'} |")
        lines.append("")

    if r.breakpoints:
        lines += ["## Gradient-change tests", ""]
        lines += [
            "| year | n before | n after | slope before | slope after | t | p | result | Bonferroni |",
            "|---:|---:|---:|---:|---:|---:|---:|---|---|",
        ]
        for b in r.breakpoints:
            bonf = "n/a" if b.significant_bonferroni is None else ("significant" if b.significant_bonferroni else "-")
            lines.append(
                f"| {_g(b.candidate_year)} | {b.n_before} | {b.n_after} | {_g(b.gradient_before, 4)} | "
                f"{_g(b.gradient_after, 4)} | {_g(b.t_statistic, 4)} | {_g(b.p_value, 3)} | "
                f"{b.classification.value} | {bonf} |"
            )
        lines.append("")

    if r.regimes:
        lines += ["## Regime boundaries", ""]
        for a in r.regimes:
            bending = "n/a" if a.bending is None else a.bending.value
            lines.append(
                f"- Regime {a.boundary.year:g} ({a.boundary.label}): {a.verdict.value.upper()}; "
                f"test {a.test.classification.value}, p = {_g(a.test.p_value, 3)}, bending {bending}"
            )
        lines.append("")

    if r.rates:
        lines += ["## Monte Carlo calibration", ""]
        for mc in r.rates:
            line = (
                f"- alpha {_g(mc.alpha)}, {mc.trials} trials, seed {mc.seed}: "
                f"false-positive rate {mc.false_positive_rate:.4f} +/- {mc.false_positive_halfwidth:.4f}"
            )
            if mc.detection_rate is not None:
                line += f"; detection rate {mc.detection_rate:.4f} +/- {mc.detection_halfwidth:.4f}"
            lines.append(line)
        lines.append("")

    if r.notes:
        lines += ["## Notes", ""] + [f"- {n}" for n in r.notes] + [""]
    return "\n".join(lines)
