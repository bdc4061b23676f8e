"""Parsing of Maddison-style GDP tables into :class:`ObservationSeries`.

Two layouts are understood:

* wide: the first row holds year labels after an entity column, every
  further row is one entity (the "horizontal file" arrangement);
* long: two columns, ``year`` and ``value``, with an optional header.

Blank cells mean "no observation". Numbers may carry comma or space
thousands separators. Lines starting with ``#`` are comments; comments of the
form ``# key: value`` at the top of a long table supply ``entity``, ``unit``
and ``source`` metadata.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (
    AmbiguousEntityError,
    DuplicateYearError,
    EntityNotFoundError,
    InputError,
    OutputError,
    ParseError,
    TooSparseError,
)
from .fitting import MIN_POINTS
from .series import CANONICAL_UNIT, ObservationSeries

# multipliers taking a table's unit to billions
UNIT_SCALE = {
    "billions": 1.0,
    "millions": 1e-3,
    "thousands": 1e-6,
}


class Layout(enum.Enum):
    WIDE = "wide"
    LONG = "long"


@dataclass(frozen=True)
class TableLayout:
    layout: Layout
    entity_column: str = ""
    year_labels: tuple[float, ...] = ()
    unit_hint: Optional[str] = None


_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_GROUPED = re.compile(r"^[+-]?\d{1,3}([,\u00a0\u2009 ]\d{3})+(\.\d*)?$")


def parse_number(cell: str) -> float:
    """Decimal number with optional comma/space thousands separators.

    Raises ``ValueError`` on anything else.
    """
    text = cell.strip()
    if _GROUPED.match(text):
        text = re.sub("[,\u00a0\u2009 ]", "", text)
    if not _NUMBER.match(text):
        raise ValueError(f"not a number: {cell!r}")
    return float(text)


def parse_year_label(label: str) -> float:
    text = label.strip()
    if re.search(r"\bBC\b", text, re.IGNORECASE):
        raise ValueError(f"BC year labels are not supported: {label!r}")
    text = re.sub(r"^(AD\s*)", "", text, flags=re.IGNORECASE)
    if not re.fullmatch(r"\d+(\.0+)?", text):
        raise ValueError(f"not a year label: {label!r}")
    year = float(text)
    if year <= 0:
        raise ValueError(f"year labels must be positive: {label!r}")
    return year


def _strip_comments(text: str) -> tuple[list[tuple[int, str]], dict[str, str]]:
    """Non-comment lines with their 1-based line numbers, plus ``# key: value`` metadata."""
    lines, meta = [], {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if stripped.startswith("#"):
            m = re.match(r"#\s*([A-Za-z_][\w ]*?)\s*:\s*(.*)$", stripped)
            if m:
                meta.setdefault(m.group(1).strip().lower(), m.group(2).strip())
            continue
        if stripped:
            lines.append((lineno, raw))
    return lines, meta


def _delimiter(first_line: str) -> str:
    tabs = first_line.count("\t")
    return "\t" if tabs and tabs >= first_line.count(",") else ","


def _rows(lines: list[tuple[int, str]]) -> list[tuple[int, list[str]]]:
    if not lines:
        return []
    delim = _delimiter(lines[0][1])
    out = []
    for lineno, raw in lines:
        cells = next(csv.reader([raw], delimiter=delim))
        out.append((lineno, cells))
    return out


def _unit_scale(unit_hint: Optional[str]) -> float:
    if unit_hint is None:
        return 1.0
    try:
        return UNIT_SCALE[unit_hint.lower()]
    except KeyError:
        raise ParseError(f"unknown unit hint {unit_hint!r}; expected one of {sorted(UNIT_SCALE)}") from None


def _check_increasing(years: list[float], values: list[float]) -> tuple[np.ndarray, np.ndarray]:
    y = np.array(years, dtype=np.float64)
    v = np.array(values, dtype=np.float64)
    if y.size > 1 and np.any(np.diff(y) <= 0):
        order = np.argsort(y, kind="stable")
        y, v = y[order], v[order]
        dup = np.flatnonzero(np.diff(y) == 0)
        if dup.size:
            raise DuplicateYearError(f"duplicate year {y[dup[0]]:g}", year=float(y[dup[0]]))
    return y, v


def parse_wide_table(
    text: str,
    entity: str,
    unit_hint: Optional[str] = None,
    source: str = "",
) -> ObservationSeries:
    """Extract one entity's row from a wide table.

    Entity names are matched after trimming whitespace, case-insensitively.
    ``unit_hint`` (``"billions"``, ``"millions"``, ``"thousands"``) converts
    the cells to billions.

    Raises
    ------
    EntityNotFoundError, AmbiguousEntityError
        The entity is absent or appears more than once.
    ParseError
        A year label or cell is malformed (position is 1-based).
    TooSparseError
        Fewer than three populated cells.
    """
    scale = _unit_scale(unit_hint)
    lines, _ = _strip_comments(text)
    rows = _rows(lines)
    if not rows:
        raise ParseError("empty table")
    header_line, header = rows[0]
    if len(header) < 2:
        raise ParseError("wide table header needs an entity column and at least one year label", line=header_line)
    year_labels: list[Optional[float]] = []
    for col, label in enumerate(header[1:], 2):
        if not label.strip():
            year_labels.append(None)
            continue
        try:
            year_labels.append(parse_year_label(label))
        except ValueError as exc:
            raise ParseError(str(exc), line=header_line, column=col) from None
    if not any(y is not None for y in year_labels):
        raise ParseError("wide table header has no year labels", line=header_line)

    wanted = entity.strip().casefold()
    matches = [(ln, cells) for ln, cells in rows[1:] if cells and cells[0].strip().casefold() == wanted]
    if not matches:
        raise EntityNotFoundError(f"entity {entity!r} not found in table")
    if len(matches) > 1:
        where = ", ".join(str(ln) for ln, _ in matches)
        raise AmbiguousEntityError(f"entity {entity!r} appears more than once (lines {where})")
    lineno, cells = matches[0]

    years, values = [], []
    for col, cell in enumerate(cells[1:], 2):
        if not cell.strip():
            continue
        if col - 2 >= len(year_labels) or year_labels[col - 2] is None:
            raise ParseError("value in a column without a year label", line=lineno, column=col)
        try:
            value = parse_number(cell)
        except ValueError:
            raise ParseError(f"malformed number {cell.strip()!r}", line=lineno, column=col) from None
        years.append(year_labels[col - 2])
        values.append(value * scale)
    y, v = _check_increasing(years, values)
    if y.size < MIN_POINTS:
        raise TooSparseError(
            f"entity {entity!r} has {y.size} populated cell(s); at least {MIN_POINTS} required"
        )
    return ObservationSeries(y, v, entity=cells[0].strip(), unit=CANONICAL_UNIT, source=source)


def parse_long_table(
    text: str,
    entity: str = "",
    unit_hint: Optional[str] = None,
    source: str = "",
) -> ObservationSeries:
    """Parse a two-column ``year,value`` table.

    Rows are sorted by year; blank values are skipped. Metadata comments
    (``# entity: ...``, ``# unit: ...``) fill in ``entity`` and the unit
    when not given explicitly. A ``# unit:`` comment naming millions or
    thousands is honoured like ``unit_hint``.

    Raises
    ------
    ParseError
        Malformed row, reported with its 1-based line number.
    DuplicateYearError
        The same year appears twice.
    """
    lines, meta = _strip_comments(text)
    if unit_hint is None:
        meta_unit = meta.get("unit", "").lower()
        for word in ("millions", "thousands"):
            if meta_unit.startswith(word):
                unit_hint = word
    scale = _unit_scale(unit_hint)
    rows = _rows(lines)
    years, values, line_of = [], [], {}
    for idx, (lineno, cells) in enumerate(rows):
        cells = [c for c in cells]
        if len(cells) != 2:
            if len(cells) > 2 and all(not c.strip() for c in cells[2:]):
                cells = cells[:2]
            else:
                raise ParseError(f"expected 2 columns, found {len(cells)}", line=lineno)
        year_cell, value_cell = cells
        try:
            year = parse_number(year_cell)
        except ValueError:
            if idx == 0:
                continue  # header row
            raise ParseError(f"malformed year {year_cell.strip()!r}", line=lineno, column=1) from None
        if not value_cell.strip():
            continue
        try:
            value = parse_number(value_cell)
        except ValueError:
            raise ParseError(f"malformed value {value_cell.strip()!r}", line=lineno, column=2) from None
        if year in line_of:
            raise DuplicateYearError(f"duplicate year {year:g}", year=year, line=lineno)
        line_of[year] = lineno
        years.append(year)
        values.append(value * scale)
    y, v = _check_increasing(years, values)
    return ObservationSeries(
        y,
        v,
        entity=entity or meta.get("entity", ""),
        unit=CANONICAL_UNIT,
        source=source or meta.get("source", ""),
    )


def detect_layout(text: str) -> Layout:
    """Long if every data row has at most two cells (or there are none), wide otherwise."""
    lines, _ = _strip_comments(text)
    rows = _rows(lines)
    if all(len([c for c in cells if c.strip()]) <= 2 for _, cells in rows):
        return Layout.LONG
    return Layout.WIDE


@dataclass(frozen=True)
class Finding:
    kind: str
    message: str
    year: Optional[float] = None


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.findings

    def __len__(self) -> int:
        return len(self.findings)

    def __iter__(self):
        return iter(self.findings)


def validate_series(series: ObservationSeries) -> ValidationReport:
    """List violations of the series invariants without raising."""
    findings = []
    years, values = series.years, series.values
    for y, v in zip(years.tolist(), values.tolist()):
        if v <= 0:
            findings.append(Finding("non-positive", f"value {v!r} at year {y:g} is not positive", y))
    diffs = np.diff(years)
    for i in np.flatnonzero(diffs == 0):
        findings.append(Finding("duplicate", f"year {years[i]:g} appears more than once", float(years[i])))
    for i in np.flatnonzero(diffs < 0):
        findings.append(
            Finding("order", f"year {years[i + 1]:g} follows {years[i]:g}", float(years[i + 1]))
        )
    if len(series) < MIN_POINTS:
        findings.append(
            Finding("too-sparse", f"{len(series)} point(s); fitting needs at least {MIN_POINTS}")
        )
    return ValidationReport(tuple(findings))


def format_long_table(series: ObservationSeries, header: bool = True) -> str:
    """Serialize as a long table; ``repr`` floats make the round trip exact."""
    buf = io.StringIO()
    if series.entity:
        buf.write(f"# entity: {series.entity}\n")
    buf.write(f"# unit: {series.unit}\n")
    if series.source:
        buf.write(f"# source: {series.source}\n")
    if header:
        buf.write("year,gdp\n")
    for y, v in zip(series.years.tolist(), series.values.tolist()):
        buf.write(f"{y!r},{v!r}\n")
    return buf.getvalue()


def read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8-sig")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def file_sha256(path) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def load_series(
    path,
    entity: Optional[str] = None,
    layout: Optional[Layout | str] = None,
    unit_hint: Optional[str] = None,
) -> ObservationSeries:
    """Read a table from disk, detecting the layout unless given."""
    text = read_text(path)
    if layout is None or layout == "auto":
        layout = detect_layout(text)
    layout = Layout(layout) if not isinstance(layout, Layout) else layout
    if layout is Layout.WIDE:
        if not entity:
            raise EntityNotFoundError("a wide table needs --entity to select a row")
        return parse_wide_table(text, entity, unit_hint=unit_hint, source=str(path))
    return parse_long_table(text, entity=entity or "", unit_hint=unit_hint, source=str(path))


def write_long_table(series: ObservationSeries, path) -> None:
    try:
        Path(path).write_text(format_long_table(series), encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
