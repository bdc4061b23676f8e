from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from growthlens import ObservationSeries, load_series, parse_long_table, parse_wide_table, validate_series
from growthlens.errors import (
    AmbiguousEntityError,
    DuplicateYearError,
    EntityNotFoundError,
    GrowthLensError,
    InputError,
    ParseError,
    TooSparseError,
)
from growthlens.fitting import fit_hyperbolic
from growthlens.ingest import Layout, detect_layout, format_long_table, parse_number

from .conftest import FIXTURES, load_asia


class TestWide:
    TEXT = (FIXTURES / "wide_small.csv").read_text()

    def test_blank_cell_is_missing_not_zero(self):
        s = parse_wide_table(self.TEXT, "Asia excl. Japan")
        assert s.years.tolist() == [1.0, 1000.0, 1500.0]
        assert s.values.tolist() == [75.4, 97.0, 142600.5]
        assert s.entity == "Asia excl. Japan"

    def test_entity_match_ignores_case_and_padding(self):
        s = parse_wide_table(self.TEXT, "  asia EXCL. japan ")
        assert len(s) == 3

    def test_unknown_entity(self):
        with pytest.raises(EntityNotFoundError):
            parse_wide_table(self.TEXT, "Atlantis")

    def test_ambiguous_entity(self):
        text = self.TEXT + "Asia excl. Japan,1,2,3,4\n"
        with pytest.raises(AmbiguousEntityError):
            parse_wide_table(text, "Asia excl. Japan")

    def test_empty_row_is_too_sparse(self):
        with pytest.raises(TooSparseError):
            parse_wide_table(self.TEXT, "Atlantic Islands")

    def test_unit_conversion(self):
        s = parse_wide_table(self.TEXT, "Western Europe", unit_hint="millions")
        assert s.values[0] == pytest.approx(0.011)

    def test_bc_labels_rejected(self):
        with pytest.raises(ParseError, match="column 3"):
            parse_wide_table((FIXTURES / "bc_label.csv").read_text(), "Asia")

    def test_malformed_cell_location(self):
        text = "Region,1000,1500,1600\nAsia,1,x,3\n"
        with pytest.raises(ParseError) as exc:
            parse_wide_table(text, "Asia")
        assert (exc.value.line, exc.value.column) == (2, 3)

    def test_detect_layout(self):
        assert detect_layout(self.TEXT) is Layout.WIDE
        assert detect_layout("year,gdp\n1,2\n") is Layout.LONG


class TestLong:
    def test_two_points_parse_then_fit_too_sparse(self):
        s = parse_long_table("year,gdp\n1,75.4\n1000,97.0")
        assert len(s) == 2
        with pytest.raises(TooSparseError):
            fit_hyperbolic(s)

    def test_unsorted_equals_sorted(self):
        a = load_series(FIXTURES / "unsorted.csv")
        b = load_series(FIXTURES / "sorted.csv")
        assert a.years.tolist() == b.years.tolist()
        assert a.values.tolist() == b.values.tolist()

    def test_bad_value_line_two(self):
        with pytest.raises(ParseError) as exc:
            parse_long_table("year,gdp\n1000,abc\n")
        assert exc.value.line == 2
        with pytest.raises(ParseError, match="line 2"):
            load_series(FIXTURES / "bad_value.csv")

    def test_headerless(self):
        s = parse_long_table("1000,1\n1500,2\n")
        assert s.years.tolist() == [1000.0, 1500.0]

    def test_bad_year_after_header(self):
        with pytest.raises(ParseError) as exc:
            parse_long_table("year,gdp\n1000,1\nmmx,2\n")
        assert exc.value.line == 3 and exc.value.column == 1

    def test_duplicate_year(self):
        with pytest.raises(DuplicateYearError) as exc:
            load_series(FIXTURES / "duplicate_year.csv")
        assert exc.value.year == 1000.0 and exc.value.line == 4

    def test_blank_values_skipped(self):
        s = parse_long_table("year,gdp\n1,75\n1000,\n1500,100\n")
        assert s.years.tolist() == [1.0, 1500.0]

    def test_too_many_columns(self):
        with pytest.raises(ParseError):
            parse_long_table("1,2,3\n")

    def test_tab_delimited_with_space_grouping(self):
        s = load_series(FIXTURES / "tabbed.tsv")
        assert s.values.tolist() == [90.0, 1000.5, 120.0]

    def test_metadata_comments(self):
        s = parse_long_table("# entity: Somewhere\n# unit: millions of dollars\nyear,gdp\n1,1000\n")
        assert s.entity == "Somewhere"
        assert s.values[0] == 1.0

    @pytest.mark.parametrize(
        "cell,value",
        [("1,234", 1234.0), ("1 234.5", 1234.5), ("12 345", 12345.0), ("-3e2", -300.0), (".5", 0.5)],
    )
    def test_numbers(self, cell, value):
        assert parse_number(cell) == value

    @pytest.mark.parametrize("cell", ["1,23", "abc", "1.2.3", "", "12,34,567"])
    def test_bad_numbers(self, cell):
        with pytest.raises(ValueError):
            parse_number(cell)

    @settings(max_examples=200)
    @given(
        pairs=st.dictionaries(
            st.integers(1, 2100),
            st.floats(min_value=1e-6, max_value=1e9, allow_nan=False),
            min_size=1,
            max_size=40,
        )
    )
    def test_round_trip_is_bit_exact(self, pairs):
        years = sorted(pairs)
        s = ObservationSeries(years, [pairs[y] for y in years], entity="x")
        back = parse_long_table(format_long_table(s))
        assert back.years.tobytes() == s.years.tobytes()
        assert back.values.tobytes() == s.values.tobytes()
        assert back.entity == "x"

    @settings(max_examples=300, suppress_health_check=[HealthCheck.too_slow])
    @given(text=st.text(alphabet=st.sampled_from(list("0123456789,.\t\n -eabc#:\"")), max_size=120))
    def test_parsers_are_total(self, text):
        for parse in (parse_long_table, lambda t: parse_wide_table(t, "a")):
            try:
                parse(text)
            except GrowthLensError:
                pass


class TestValidate:
    def test_valid(self):
        assert validate_series(ObservationSeries([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])).ok

    def test_zero_value(self):
        rep = validate_series(load_series(FIXTURES / "zero_value.csv"))
        assert len(rep) == 1
        (finding,) = rep
        assert finding.year == 1500.0 and "1500" in finding.message

    def test_two_points(self):
        rep = validate_series(ObservationSeries([1.0, 2.0], [1.0, 2.0]))
        assert [f.kind for f in rep] == ["too-sparse"]

    def test_disorder_and_duplicates(self):
        rep = validate_series(ObservationSeries([1.0, 1.0, 0.5], [1.0, 2.0, 3.0]))
        assert {f.kind for f in rep} == {"duplicate", "order"}


def test_missing_file():
    with pytest.raises(InputError):
        load_series(FIXTURES / "does_not_exist.csv")


def test_wide_file_needs_entity():
    with pytest.raises(EntityNotFoundError):
        load_series(FIXTURES / "wide_small.csv")


def test_bundled_asia_extract():
    s = load_asia()
    assert s.years[0] == 1.0
    assert 75.0 <= s.values[0] <= 78.0
    assert s.years[-1] == 2008.0
    assert 1e4 <= s.values[-1] < 1e5
    assert validate_series(s).ok
    assert np.all(np.isin([1000.0, 1500.0, 1600.0, 1700.0, 1820.0], s.years))
