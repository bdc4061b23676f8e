"""Turn a CSV export of Maddison's horizontal file into the bundled long table.

Usage:

    python3 scripts/extract_maddison.py GDP.csv \
        --entity "Total Asia excl. Japan" \
        --out data/maddison_2010_asia_excl_japan.csv

GDP.csv is the "GDP" sheet of horizontal-file_02-2010.xls saved as CSV. Title
rows above the year header are skipped. The sheet is in millions of 1990
international Geary-Khamis dollars; the output is in billions. Use --list
to print the row labels containing a substring when unsure of the exact name.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from growthlens import ObservationSeries
from growthlens.ingest import file_sha256, parse_wide_table, parse_year_label, read_text, write_long_table


def header_index(lines: list[str], min_years: int = 5) -> int:
    """Index of the first row carrying at least ``min_years`` year labels."""
    for i, line in enumerate(lines):
        cells = next(csv.reader([line]), [])
        years = 0
        for cell in cells[1:]:
            try:
                parse_year_label(cell)
                years += 1
            except ValueError:
                pass
        if years >= min_years:
            return i
    raise SystemExit("no row with year labels found; is this the GDP sheet?")


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("source", type=Path)
    p.add_argument("--entity", default="Total Asia excl. Japan")
    p.add_argument("--out", type=Path, default=Path("data/maddison_2010_asia_excl_japan.csv"))
    p.add_argument("--list", metavar="SUBSTRING", help="print matching row labels and exit")
    args = p.parse_args(argv)

    text = read_text(args.source)
    lines = text.splitlines()
    start = header_index(lines)
    if args.list is not None:
        needle = args.list.casefold()
        for row in csv.reader(io.StringIO("\n".join(lines[start + 1 :]))):
            if row and needle in row[0].casefold():
                print(row[0].strip())
        return 0

    series = parse_wide_table("\n".join(lines[start:]), args.entity, unit_hint="millions")
    source = f"{args.source.name} sha256={file_sha256(args.source)} row '{series.entity}'"
    series = ObservationSeries(series.years, series.values, entity="Asia excl. Japan", unit=series.unit, source=source)
    write_long_table(series, args.out)
    print(f"wrote {len(series)} observations ({series.years[0]:g}..{series.years[-1]:g}) to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
