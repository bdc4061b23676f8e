"""Synthetic trajectories and Monte Carlo calibration of the break test.

Random numbers come from numpy's Philox4x64 counter-based generator seeded
with a 64-bit integer, so a ``(spec, seed)`` pair yields the same series on
every platform numpy supports.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .diagnostics import DEFAULT_ALPHA, Change, gradient_change_test
from .errors import SpecError
from .fitting import Weighting
from .series import ObservationSeries

SEED_MODULUS = 2**64
_MAX_RESAMPLES = 1000


class NoiseSpace(enum.Enum):
    NATURAL_RELATIVE = "natural-relative"
    RECIPROCAL_ADDITIVE = "reciprocal-additive"


@dataclass(frozen=True)
class NoiseSpec:
    """Observation noise.

    ``NATURAL_RELATIVE`` multiplies each value by ``exp(sigma*z - sigma**2/2)``
    (log-normal with unit mean, so ``sigma`` is a relative scale).
    ``RECIPROCAL_ADDITIVE`` adds ``sigma*z`` to ``1/S``; ``sigma`` is then in
    reciprocal GDP units.
    """

    space: NoiseSpace = NoiseSpace.NATURAL_RELATIVE
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.sigma >= 0.0 and math.isfinite(self.sigma)):
            raise SpecError(f"noise sigma must be finite and non-negative, got {self.sigma!r}")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= int(self.seed) < SEED_MODULUS):
            raise SpecError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass(frozen=True)
class Hyperbolic:
    k: float
    a: Optional[float] = None  # solved from the previous segment inside a Piecewise


@dataclass(frozen=True)
class Exponential:
    rate: float
    level: Optional[float] = None


@dataclass(frozen=True)
class Constant:
    level: Optional[float] = None


@dataclass(frozen=True)
class Segment:
    start: float
    end: float
    kind: Union[Hyperbolic, Exponential, Constant]


@dataclass(frozen=True)
class Piecewise:
    segments: tuple[Segment, ...]


Kind = Union[Hyperbolic, Exponential, Constant, Piecewise]


@dataclass(frozen=True, eq=False)
class TrajectorySpec:
    kind: Kind
    years: np.ndarray
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    entity: str = "synthetic"

    def __post_init__(self) -> None:
        years = np.array(self.years, dtype=np.float64)
        if years.ndim != 1 or years.size == 0:
            raise SpecError("a trajectory needs a non-empty one-dimensional year grid")
        if np.any(np.diff(years) <= 0):
            raise SpecError("year grid must be strictly increasing")
        years.setflags(write=False)
        object.__setattr__(self, "years", years)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrajectorySpec):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.noise == other.noise
            and self.entity == other.entity
            and np.array_equal(self.years, other.years)
        )

    def with_seed(self, seed: int) -> "TrajectorySpec":
        return replace(self, noise=replace(self.noise, seed=int(seed) % SEED_MODULUS))


def _require_level(value: Optional[float], what: str) -> float:
    if value is None:
        raise SpecError(f"{what} needs an explicit level outside a piecewise join")
    return float(value)


def _eval_simple(kind, years: np.ndarray) -> np.ndarray:
    if isinstance(kind, Hyperbolic):
        a = _require_level(kind.a, "hyperbolic segment 'a'")
        if kind.k <= 0 or a <= 0:
            raise SpecError(f"hyperbolic parameters must be positive (a={a!r}, k={kind.k!r})")
        denom = a - kind.k * years
        if np.any(denom <= 0):
            raise SpecError(
                f"year grid reaches the hyperbolic singularity t_s={a / kind.k:.6g}"
            )
        return 1.0 / denom
    if isinstance(kind, Exponential):
        level = _require_level(kind.level, "exponential segment 'level'")
        if level <= 0:
            raise SpecError("exponential level must be positive")
        return level * np.exp(kind.rate * years)
    if isinstance(kind, Constant):
        level = _require_level(kind.level, "constant segment 'level'")
        if level <= 0:
            raise SpecError("constant level must be positive")
        return np.full(years.shape, level)
    raise SpecError(f"unsupported trajectory kind {kind!r}")


def _join(kind, t: float, value: float):
    """Copy of ``kind`` whose level makes it pass through ``(t, value)``."""
    if isinstance(kind, Hyperbolic):
        return Hyperbolic(k=kind.k, a=1.0 / value + kind.k * t)
    if isinstance(kind, Exponential):
        return Exponential(rate=kind.rate, level=value * math.exp(-kind.rate * t))
    if isinstance(kind, Constant):
        return Constant(level=value)
    raise SpecError(f"unsupported segment kind {kind!r}")


def resolve_segments(pw: Piecewise) -> list[Segment]:
    """Segments with every level after the first solved for continuity."""
    if not pw.segments:
        raise SpecError("piecewise trajectory has no segments")
    out = []
    for i, seg in enumerate(pw.segments):
        if not seg.start < seg.end:
            raise SpecError(f"segment {i + 1} has start {seg.start:g} >= end {seg.end:g}")
        if isinstance(seg.kind, Piecewise):
            raise SpecError("piecewise segments cannot nest")
        if i == 0:
            kind = seg.kind
        else:
            prev = out[-1]
            if seg.start != prev.end:
                raise SpecError(
                    f"segment {i + 1} starts at {seg.start:g} but segment {i} ends at {prev.end:g}; "
                    "segments must be contiguous"
                )
            boundary_value = float(_eval_simple(prev.kind, np.array([prev.end]))[0])
            kind = _join(seg.kind, seg.start, boundary_value)
        if isinstance(kind, Hyperbolic):
            a = _require_level(kind.a, "hyperbolic segment 'a'")
            if not seg.end < a / kind.k:
                raise SpecError(
                    f"segment {i + 1} ends at {seg.end:g}, at or past its singularity {a / kind.k:.6g}"
                )
        out.append(Segment(seg.start, seg.end, kind))
    return out


def trajectory(kind: Kind, years) -> np.ndarray:
    """Noise-free values of ``kind`` on ``years``."""
    years = np.asarray(years, dtype=np.float64)
    if not isinstance(kind, Piecewise):
        return _eval_simple(kind, years)
    segs = resolve_segments(kind)
    if years.min() < segs[0].start or years.max() > segs[-1].end:
        raise SpecError(
            f"year grid {years.min():g}..{years.max():g} is outside the piecewise span "
            f"{segs[0].start:g}..{segs[-1].end:g}"
        )
    out = np.empty(years.shape)
    for i, seg in enumerate(segs):
        # a boundary year belongs to the earlier segment; both agree there anyway
        mask = (years <= seg.end) & ((years > seg.start) if i else (years >= seg.start))
        if np.any(mask):
            out[mask] = _eval_simple(seg.kind, years[mask])
    return out


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) % SEED_MODULUS))


def generate(spec: TrajectorySpec) -> ObservationSeries:
    """Sample ``spec`` on its year grid, applying its noise model."""
    clean = trajectory(spec.kind, spec.years)
    noise = spec.noise
    if noise.sigma == 0.0:
        values = clean
    else:
        rng = make_rng(noise.seed)
        z = rng.standard_normal(clean.size)
        if noise.space is NoiseSpace.NATURAL_RELATIVE:
            values = clean * np.exp(noise.sigma * z - 0.5 * noise.sigma**2)
        else:
            recip = 1.0 / clean + noise.sigma * z
            for _ in range(_MAX_RESAMPLES):
                bad = recip <= 0.0
                if not np.any(bad):
                    break
                recip[bad] = 1.0 / clean[bad] + noise.sigma * rng.standard_normal(int(bad.sum()))
            else:
                raise SpecError("reciprocal noise keeps producing non-positive values; sigma is too large")
            values = 1.0 / recip
    return ObservationSeries(spec.years, values, entity=spec.entity, source=f"synthetic seed={noise.seed}")


@dataclass(frozen=True)
class TestConfig:
    candidate_year: float
    window: Optional[tuple[Optional[float], Optional[float]]] = None
    alpha: float = DEFAULT_ALPHA
    weighting: Weighting = Weighting.UNIFORM

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class MonteCarloRates:
    trials: int
    alpha: float
    false_positive_rate: float
    false_positive_halfwidth: float
    detection_rate: Optional[float]
    detection_halfwidth: Optional[float]
    takeoff_rate: Optional[float]
    seed: int


def binomial_halfwidth(p: float, n: int, z: float = 1.959963984540054) -> float:
    """Normal-approximation 95% half-width of a binomial proportion."""
    return z * math.sqrt(max(p * (1.0 - p), 0.0) / n)


def _rejections(spec: TrajectorySpec, test: TestConfig, trials: int, seed: int) -> tuple[int, int]:
    rejected = takeoffs = 0
    for i in range(trials):
        series = generate(spec.with_seed(seed + i))
        res = gradient_change_test(series, test.candidate_year, test.window, test.alpha, test.weighting)
        if res.classification is not Change.NO_CHANGE:
            rejected += 1
            takeoffs += res.classification is Change.TAKEOFF
    return rejected, takeoffs


def monte_carlo_rates(
    spec_null: TrajectorySpec,
    spec_alt: Optional[TrajectorySpec],
    test_config: TestConfig,
    trials: int,
    seed: Optional[int] = None,
) -> MonteCarloRates:
    """Rejection rates of the gradient-change test under a null and an alternative.

    Trial ``i`` samples with seed ``(seed + i) mod 2**64``; the same derived
    seed drives the null and the alternative draw of that trial. ``seed``
    defaults to the null spec's noise seed.
    """
    if trials < 100:
        raise SpecError(f"at least 100 trials are required, got {trials}")
    master = int(spec_null.noise.seed if seed is None else seed) % SEED_MODULUS
    fp, _ = _rejections(spec_null, test_config, trials, master)
    fpr = fp / trials
    det = det_hw = take = None
    if spec_alt is not None:
        hits, takeoffs = _rejections(spec_alt, test_config, trials, master)
        det = hits / trials
        det_hw = binomial_halfwidth(det, trials)
        take = takeoffs / trials
    return MonteCarloRates(
        trials=trials,
        alpha=test_config.alpha,
        false_positive_rate=fpr,
        false_positive_halfwidth=binomial_halfwidth(fpr, trials),
        detection_rate=det,
        detection_halfwidth=det_hw,
        takeoff_rate=take,
        seed=master,
    )


# ---------------------------------------------------------------------------
# key = value configuration


@dataclass(frozen=True)
class SimulationConfig:
    null: TrajectorySpec
    alt: Optional[TrajectorySpec]
    test: TestConfig
    trials: int = 2000
    seed: int = 0


def parse_years(text: str) -> np.ndarray:
    """``LO:HI:STEP`` (inclusive) or a comma-separated list of years."""
    text = text.strip()
    if ":" in text:
        parts = [p.strip() for p in text.split(":")]
        if len(parts) != 3:
            raise SpecError(f"year range {text!r} must look like LO:HI:STEP")
        lo, hi, step = (float(p) for p in parts)
        if step <= 0 or hi < lo:
            raise SpecError(f"year range {text!r} is empty")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return lo + step * np.arange(count)
    try:
        return np.array([float(p) for p in text.split(",") if p.strip()])
    except ValueError:
        raise SpecError(f"cannot parse year list {text!r}") from None


def _fmt(x: float) -> str:
    return repr(float(x))


def format_years(years: np.ndarray) -> str:
    return ",".join(_fmt(y) for y in years)


_KIND_FIELDS = {
    "hyperbolic": (Hyperbolic, ("a", "k")),
    "exponential": (Exponential, ("level", "rate")),
    "constant": (Constant, ("level",)),
}


def _kind_from_params(name: str, params: dict[str, str], where: str):
    try:
        cls, fields = _KIND_FIELDS[name]
    except KeyError:
        raise SpecError(f"{where}: unknown kind {name!r}") from None
    unknown = set(params) - set(fields)
    if unknown:
        raise SpecError(f"{where}: unexpected parameter(s) {sorted(unknown)} for {name}")
    try:
        return cls(**{k: float(v) for k, v in params.items()})
    except TypeError as exc:
        raise SpecError(f"{where}: {exc}") from None
    except ValueError:
        raise SpecError(f"{where}: non-numeric parameter in {params}") from None


def _kind_to_text(kind) -> tuple[str, dict[str, float]]:
    for name, (cls, fields) in _KIND_FIELDS.items():
        if isinstance(kind, cls):
            return name, {f: getattr(kind, f) for f in fields if getattr(kind, f) is not None}
    raise SpecError(f"cannot serialize kind {kind!r}")


def _parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise SpecError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


_SEGMENT_KEY = re.compile(r"^segment\.(\d+)$")


def _spec_from_kv(kv: dict[str, str], prefix: str) -> Optional[TrajectorySpec]:
    def get(key: str, default=None):
        return kv.get(f"{prefix}.{key}", kv.get(key, default))

    kind_name = kv.get(f"{prefix}.kind")
    if kind_name is None:
        return None
    if kind_name == "piecewise":
        segs = []
        for key in kv:
            if not key.startswith(prefix + "."):
                continue
            m = _SEGMENT_KEY.match(key[len(prefix) + 1 :])
            if m:
                segs.append((int(m.group(1)), kv[key]))
        if not segs:
            raise SpecError(f"{prefix}: piecewise kind without segment.N entries")
        segments = []
        for idx, body in sorted(segs):
            parts = body.split()
            if len(parts) < 3:
                raise SpecError(f"{prefix}.segment.{idx}: expected '<kind> <start> <end> key=value...'")
            params = {}
            for p in parts[3:]:
                if "=" not in p:
                    raise SpecError(f"{prefix}.segment.{idx}: malformed parameter {p!r}")
                k, v = p.split("=", 1)
                params[k] = v
            try:
                start, end = float(parts[1]), float(parts[2])
            except ValueError:
                raise SpecError(f"{prefix}.segment.{idx}: non-numeric segment bounds") from None
            segments.append(Segment(start, end, _kind_from_params(parts[0], params, f"{prefix}.segment.{idx}")))
        kind = Piecewise(tuple(segments))
    else:
        _, fields = _KIND_FIELDS.get(kind_name, (None, ()))
        if not fields:
            raise SpecError(f"{prefix}: unknown kind {kind_name!r}")
        params = {f: kv[f"{prefix}.{f}"] for f in fields if f"{prefix}.{f}" in kv}
        kind = _kind_from_params(kind_name, params, prefix)

    years_text = get("years")
    if years_text is None:
        raise SpecError(f"{prefix}: no 'years' grid given")
    try:
        space = NoiseSpace(get("noise.space", NoiseSpace.NATURAL_RELATIVE.value))
    except ValueError:
        raise SpecError(f"{prefix}: unknown noise space {get('noise.space')!r}") from None
    try:
        sigma = float(get("noise.sigma", "0"))
        seed = int(get("seed", "0"))
    except ValueError:
        raise SpecError(f"{prefix}: non-numeric noise sigma or seed") from None
    return TrajectorySpec(
        kind=kind,
        years=parse_years(years_text),
        noise=NoiseSpec(space, sigma, seed),
        entity=get("entity", f"synthetic {prefix}"),
    )


def _parse_window(text: Optional[str]):
    if text is None or not text.strip():
        return None
    lo, sep, hi = text.partition(":")
    if not sep:
        raise SpecError(f"window {text!r} must look like LO:HI")
    try:
        return (float(lo) if lo.strip() else None, float(hi) if hi.strip() else None)
    except ValueError:
        raise SpecError(f"window {text!r} is not numeric") from None


def parse_config(text: str) -> SimulationConfig:
    """Parse a ``key = value`` simulation config (see README for the keys)."""
    kv = _parse_kv(text)
    null = _spec_from_kv(kv, "null")
    if null is None:
        raise SpecError("config must define null.kind")
    alt = _spec_from_kv(kv, "alt")
    try:
        test = TestConfig(
            candidate_year=float(kv.get("candidate", "nan")),
            window=_parse_window(kv.get("window")),
            alpha=float(kv.get("alpha", str(DEFAULT_ALPHA))),
            weighting=Weighting(kv.get("weighting", "uniform")),
        )
        trials = int(kv.get("trials", "2000"))
        seed = int(kv.get("seed", "0"))
    except ValueError as exc:
        raise SpecError(f"invalid test settings: {exc}") from None
    if not math.isfinite(test.candidate_year):
        raise SpecError("config must set 'candidate' (the break year to test)")
    if not 0.0 < test.alpha < 0.5:
        raise SpecError(f"alpha must lie in (0, 0.5), got {test.alpha!r}")
    return SimulationConfig(null=null, alt=alt, test=test, trials=trials, seed=seed)


def _spec_lines(spec: TrajectorySpec, prefix: str) -> list[str]:
    lines = [f"{prefix}.entity = {spec.entity}"]
    if isinstance(spec.kind, Piecewise):
        lines.append(f"{prefix}.kind = piecewise")
        for i, seg in enumerate(spec.kind.segments, 1):
            name, params = _kind_to_text(seg.kind)
            extra = " ".join(f"{k}={_fmt(v)}" for k, v in params.items())
            lines.append(f"{prefix}.segment.{i} = {name} {_fmt(seg.start)} {_fmt(seg.end)} {extra}".rstrip())
    else:
        name, params = _kind_to_text(spec.kind)
        lines.append(f"{prefix}.kind = {name}")
        lines += [f"{prefix}.{k} = {_fmt(v)}" for k, v in params.items()]
    lines += [
        f"{prefix}.years = {format_years(spec.years)}",
        f"{prefix}.noise.space = {spec.noise.space.value}",
        f"{prefix}.noise.sigma = {_fmt(spec.noise.sigma)}",
        f"{prefix}.seed = {int(spec.noise.seed)}",
    ]
    return lines


def format_config(config: SimulationConfig) -> str:
    t = config.test
    lines = [
        f"trials = {config.trials}",
        f"seed = {config.seed}",
        f"candidate = {_fmt(t.candidate_year)}",
        f"alpha = {_fmt(t.alpha)}",
        f"weighting = {t.weighting.value}",
    ]
    if t.window is not None:
        lo, hi = t.window
        lines.append(f"window = {'' if lo is None else _fmt(lo)}:{'' if hi is None else _fmt(hi)}")
    lines += _spec_lines(config.null, "null")
    if config.alt is not None:
        lines += _spec_lines(config.alt, "alt")
    return "\n".join(lines) + "\n"

