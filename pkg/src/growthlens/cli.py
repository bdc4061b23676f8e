"""Command-line front end: ``growthlens <fit|diagnose|breakpoint|simulate|report>``."""

from __future__ import annotations

import argparse
import datetime as _dt
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .diagnostics import (
    DEFAULT_ALPHA,
    REGIME_BOUNDARIES,
    ModelKind,
    breakpoint_scan,
    classify_model,
    deviation_profile,
    regime_overlay_report,
)
from .errors import ALL_ERRORS, ContractError, GrowthLensError, NotHyperbolicError
from .fitting import DEFAULT_WINDOW, Weighting, fit_hyperbolic
from .ingest import file_sha256, load_series, read_text, write_long_table
from .report import (
    BREAKPOINT_HEADER,
    REGIME_HEADER,
    RunResults,
    breakpoint_rows,
    csv_text,
    emit_figure_data,
    kv_text,
    regime_rows,
    render_report,
    residual_rows,
    write_text,
)
from .synth import generate, monte_carlo_rates, parse_config

log = logging.getLogger("growthlens")

# relative disagreement in k between weightings worth reporting
WEIGHTING_DISAGREEMENT = 0.05


def _exit_code_table() -> str:
    codes = [(0, "success"), (2, "command-line usage error")]
    codes += [(cls.exit_code, cls.__name__) for cls in set(ALL_ERRORS)]
    return "\n".join(["exit codes:"] + [f"  {code:<2} {name}" for code, name in sorted(codes)])


def parse_window(text: str) -> tuple[Optional[float], Optional[float]]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"window {text!r} must look like LO:HI (open ends allowed)")
    try:
        lo_v = float(lo) if lo.strip() else None
        hi_v = float(hi) if hi.strip() else None
    except ValueError:
        raise argparse.ArgumentTypeError(f"window {text!r} is not numeric") from None
    if lo_v is not None and hi_v is not None and not lo_v < hi_v:
        raise argparse.ArgumentTypeError(f"window {text!r} needs LO < HI")
    return lo_v, hi_v


def parse_alpha(text: str) -> float:
    try:
        alpha = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha {text!r} is not a number") from None
    if not 0.0 < alpha < 0.5:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 0.5)")
    return alpha


def parse_years(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"candidate years {text!r} must be comma-separated numbers") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory (default: current directory)")
    common.add_argument("--seed", type=int, default=None, help="random seed (fallback: $GROWTHLENS_SEED, then 0)")
    common.add_argument("-v", "--verbose", action="store_true")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", required=True, help="wide or long GDP table (CSV or TSV)")
    data.add_argument("--entity", default=None, help="row to select from a wide table")
    data.add_argument("--layout", choices=("auto", "wide", "long"), default="auto")
    data.add_argument("--unit", choices=("billions", "millions", "thousands"), default=None,
                      help="unit of the table cells; values are converted to billions")
    data.add_argument("--window", type=parse_window, default=DEFAULT_WINDOW,
                      help="fit window LO:HI in calendar years (default 1000:1950)")
    data.add_argument("--weighting", choices=[w.value for w in Weighting], default="uniform")
    data.add_argument("--svg", action="store_true", help="also write figure1.svg and figure2.svg")

    tests = argparse.ArgumentParser(add_help=False)
    tests.add_argument("--alpha", type=parse_alpha, default=DEFAULT_ALPHA)
    tests.add_argument("--candidates", type=parse_years, default=[b.year for b in REGIME_BOUNDARIES],
                       help="comma-separated candidate break years (default 1750,1870,1900)")
    tests.add_argument("--test-window", type=parse_window, default=None,
                       help="window for the break tests (default: the fit window)")

    parser = argparse.ArgumentParser(
        prog="growthlens",
        description="Fit hyperbolic growth to GDP series in reciprocal space and test for takeoffs.",
        epilog=_exit_code_table(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    fit = sub.add_parser("fit", parents=[common, data], help="fit a, k and the singularity year")
    fit.add_argument("--no-model-check", action="store_true",
                     help="do not reject series that the log-linear model describes better")
    sub.add_parser("diagnose", parents=[common, data], help="residuals, bending and model verdict")
    sub.add_parser("breakpoint", parents=[common, data, tests], help="gradient-change tests and regime verdicts")
    sim = sub.add_parser("simulate", parents=[common], help="Monte Carlo calibration from a key=value config")
    sim.add_argument("--config", required=True, help="simulation config (key = value)")
    sim.add_argument("--trials", type=int, default=None, help="override the config's trial count")
    rep = sub.add_parser("report", parents=[common, data, tests], help="run fit, diagnose and breakpoint together")
    rep.add_argument("--config", default=None, help="optional simulation config to include")
    rep.add_argument("--trials", type=int, default=None)
    return parser


def resolve_seed(seed: Optional[int], default: int = 0) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("GROWTHLENS_SEED", "").strip()
    if env:
        try:
            return int(env)
        except ValueError:
            raise ContractError(f"GROWTHLENS_SEED={env!r} is not an integer") from None
    return default


def _load(args, results: RunResults):
    series = load_series(args.input, entity=args.entity, layout=args.layout, unit_hint=args.unit)
    results.input_path = str(args.input)
    results.input_sha256 = file_sha256(args.input)
    results.series = series
    return series


def _fit(args, series, results: RunResults, model_check: bool):
    fit = fit_hyperbolic(series, args.window, args.weighting)
    results.fit = fit
    other = Weighting.RELATIVE if fit.weighting is Weighting.UNIFORM else Weighting.UNIFORM
    try:
        alt = fit_hyperbolic(series, args.window, other)
    except GrowthLensError:
        alt = None
    if alt is not None and abs(alt.params.k / fit.params.k - 1.0) > WEIGHTING_DISAGREEMENT:
        results.alt_fit = alt
    results.model = classify_model(series, args.window)
    if model_check and results.model.choice is ModelKind.EXPONENTIAL:
        raise NotHyperbolicError(
            f"the log-linear (exponential) model fits better "
            f"(R^2 log {results.model.r2_log:.6g} > reciprocal {results.model.r2_reciprocal:.6g})"
        )
    return fit


def _fit_kv(results: RunResults) -> str:
    f, s = results.fit, results.series
    line = f.line
    pairs = [
        ("entity", s.entity),
        ("unit", s.unit),
        ("window_lo", f.window[0]),
        ("window_hi", f.window[1]),
        ("weighting", f.weighting.value),
        ("n", line.n),
        ("a", f.params.a),
        ("k", f.params.k),
        ("a_stderr", line.intercept_stderr),
        ("k_stderr", line.slope_stderr),
        ("a_k_covariance", -line.slope_intercept_covariance),
        ("singularity", f.params.singularity),
        ("r2_reciprocal", f.r2_reciprocal),
        ("residual_mean_abs", f.natural_space_residual_stats[0]),
        ("residual_max_abs", f.natural_space_residual_stats[1]),
    ]
    if results.model is not None:
        pairs += [
            ("model_choice", results.model.choice.value),
            ("r2_log", results.model.r2_log),
        ]
    if results.alt_fit is not None:
        alt = results.alt_fit
        pairs += [
            (f"{alt.weighting.value}_a", alt.params.a),
            (f"{alt.weighting.value}_k", alt.params.k),
            ("weighting_disagreement", True),
        ]
    else:
        pairs.append(("weighting_disagreement", False))
    return kv_text(pairs)


def _fit_text(results: RunResults) -> str:
    f = results.fit
    mean_abs, max_abs = f.natural_space_residual_stats
    text = [
        f"Hyperbolic fit for {results.series.entity or results.input_path}",
        f"  window       {f.window[0]:g} .. {f.window[1]:g} ({f.line.n} points, {f.weighting.value} weighting)",
        f"  a            {f.params.a:.6g} +/- {f.line.intercept_stderr:.3g}",
        f"  k            {f.params.k:.6g} +/- {f.line.slope_stderr:.3g}",
        f"  singularity  {f.params.singularity:.2f}",
        f"  R^2 (1/S)    {f.r2_reciprocal:.6f}",
        f"  |rel. resid| mean {mean_abs:.4f}, max {max_abs:.4f}",
    ]
    if results.alt_fit is not None:
        alt = results.alt_fit
        text.append(f"  note: {alt.weighting.value} weighting gives k = {alt.params.k:.6g} (differs by more than 5%)")
    return "\n".join(text) + "\n"


def _write_fit(out: Path, results: RunResults) -> None:
    write_text(out / "fit.kv", _fit_kv(results))
    write_text(out / "fit.txt", _fit_text(results))


def _write_diagnose(out: Path, results: RunResults) -> None:
    s, f, p, m = results.series, results.fit, results.profile, results.model
    write_text(
        out / "residuals.csv",
        csv_text(("year", "gdp", "model_gdp", "relative_residual", "in_window"), residual_rows(s, f)),
    )
    pairs = [
        ("overall", p.overall.value),
        ("model_choice", m.choice.value),
        ("r2_reciprocal", m.r2_reciprocal),
        ("r2_log", m.r2_log),
        ("segments", len(p.segments)),
    ]
    for i, seg in enumerate(p.segments, 1):
        pairs.append((f"segment_{i}", f"{seg.year_lo!r}:{seg.year_hi!r}:{seg.bending.value}"))
    write_text(out / "diagnose.kv", kv_text(pairs))


def _write_breakpoints(out: Path, results: RunResults) -> None:
    write_text(out / "breakpoints.csv", csv_text(BREAKPOINT_HEADER, breakpoint_rows(results.breakpoints)))
    write_text(out / "regimes.csv", csv_text(REGIME_HEADER, regime_rows(results.regimes)))


def _run_tests(args, series, results: RunResults) -> None:
    window = args.test_window or args.window
    results.breakpoints = breakpoint_scan(series, args.candidates, window, args.alpha, args.weighting)
    results.regimes = regime_overlay_report(series, results.fit, window, args.alpha)


def _simulate(config_path, trials_override, seed_arg, results: RunResults, out: Path, write_series: bool) -> None:
    config = parse_config(read_text(config_path))
    seed = resolve_seed(seed_arg, config.seed)
    results.seed = seed
    trials = trials_override or config.trials
    null = config.null.with_seed(seed)
    rates = monte_carlo_rates(null, config.alt, config.test, trials, seed=seed)
    results.rates = [rates]
    pairs = [
        ("trials", rates.trials),
        ("seed", rates.seed),
        ("alpha", rates.alpha),
        ("candidate_year", config.test.candidate_year),
        ("false_positive_rate", rates.false_positive_rate),
        ("false_positive_halfwidth", rates.false_positive_halfwidth),
    ]
    if rates.detection_rate is not None:
        pairs += [
            ("detection_rate", rates.detection_rate),
            ("detection_halfwidth", rates.detection_halfwidth),
            ("takeoff_rate", rates.takeoff_rate),
        ]
    write_text(out / "simulate.kv", kv_text(pairs))
    if write_series:
        write_long_table(generate(null), out / "series_null.csv")
        if config.alt is not None:
            write_long_table(generate(config.alt.with_seed(seed)), out / "series_alt.csv")


def run(args) -> int:
    out = Path(args.out)
    seed = resolve_seed(args.seed)
    results = RunResults(command=args.command, version=__version__, seed=seed)
    cmd = args.command
    if cmd == "simulate":
        _simulate(args.config, args.trials, args.seed, results, out, write_series=True)
    else:
        series = _load(args, results)
        _fit(args, series, results, model_check=(cmd == "fit" and not args.no_model_check))
        if cmd in ("fit", "report"):
            _write_fit(out, results)
            print(_fit_text(results), end="")
        if cmd in ("diagnose", "report"):
            results.profile = deviation_profile(series, results.fit)
            _write_diagnose(out, results)
        if cmd in ("breakpoint", "report"):
            _run_tests(args, series, results)
            _write_breakpoints(out, results)
            for a in results.regimes:
                print(f"{a.boundary.year:g}: {a.verdict.value} ({a.test.classification.value}, p={a.test.p_value:.3g})")
        if cmd in ("fit", "diagnose", "report"):
            emit_figure_data(series, results.fit, out, args.svg)
        if cmd == "report" and args.config:
            _simulate(args.config, args.trials, args.seed, results, out, write_series=False)
    stamp = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    write_text(out / "report.md", render_report(results, stamp))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return run(args)
    except GrowthLensError as exc:
        print(f"growthlens: error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
