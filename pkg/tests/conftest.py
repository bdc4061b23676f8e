from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from growthlens import ObservationSeries, load_series

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"
FIXTURES = DATA / "fixtures"
ASIA_EXTRACT = DATA / "maddison_2010_asia_excl_japan.csv"

# reference parameters of the Asia hyperbola (1/GDP and 1/(GDP year), GDP in billions)
REF_A = 2.493e-2
REF_K = 1.238e-5


@pytest.fixture
def ref_params():
    return REF_A, REF_K


@pytest.fixture
def exact_hyperbola() -> ObservationSeries:
    years = np.arange(1000.0, 1951.0, 50.0)
    return ObservationSeries(years, 1.0 / (REF_A - REF_K * years), entity="exact hyperbola")


def load_asia() -> ObservationSeries:
    """The bundled Maddison extract. Fails loudly (never skips) when it is absent."""
    if not ASIA_EXTRACT.exists():
        pytest.fail(
            f"bundled Maddison 2010 extract not found at {ASIA_EXTRACT}; "
            "see data/README.md for how to produce it from the GGDC horizontal file"
        )
    return load_series(ASIA_EXTRACT)


@pytest.fixture
def asia() -> ObservationSeries:
    return load_asia()


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
