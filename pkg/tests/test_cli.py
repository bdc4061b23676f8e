from __future__ import annotations

import subprocess
import sys

import pytest

from growthlens import errors
from growthlens.cli import build_parser, main

from .conftest import FIXTURES


def run(*argv):
    return main([str(a) for a in argv])


def read_kv(path):
    return dict(line.split("=", 1) for line in path.read_text().splitlines())


def test_exit_codes_are_distinct_and_documented(capsys):
    codes = [cls.exit_code for cls in errors.ALL_ERRORS]
    assert len(codes) == len(set(codes))
    assert 0 not in codes and 2 not in codes
    help_text = build_parser().format_help()
    for cls in errors.ALL_ERRORS:
        assert f"{cls.exit_code:<2} {cls.__name__}" in help_text


def test_fit_exact_hyperbola(tmp_path):
    assert run("fit", "--input", FIXTURES / "hyperbola_exact.csv", "--out", tmp_path) == 0
    kv = read_kv(tmp_path / "fit.kv")
    assert float(kv["a"]) == pytest.approx(2.493e-2, rel=1e-10)
    assert float(kv["k"]) == pytest.approx(1.238e-5, rel=1e-10)
    assert float(kv["singularity"]) == pytest.approx(2013.7318255250404, rel=1e-10)
    assert kv["model_choice"] == "hyperbolic"
    assert {"fit.kv", "fit.txt", "figure1.csv", "figure2.csv", "report.md"} <= {p.name for p in tmp_path.iterdir()}


def test_two_points_too_sparse(tmp_path, capsys):
    assert run("fit", "--input", FIXTURES / "two_points.csv", "--out", tmp_path) == errors.TooSparseError.exit_code
    assert "TooSparseError" in capsys.readouterr().err


def test_exponential_not_hyperbolic(tmp_path):
    code = run("fit", "--input", FIXTURES / "exponential.csv", "--out", tmp_path)
    assert code == errors.NotHyperbolicError.exit_code
    assert run("fit", "--input", FIXTURES / "exponential.csv", "--out", tmp_path, "--no-model-check") == 0


@pytest.mark.parametrize(
    "fixture,extra,error",
    [
        ("bad_value.csv", [], errors.ParseError),
        ("duplicate_year.csv", [], errors.DuplicateYearError),
        ("zero_value.csv", [], errors.DomainError),
        ("does_not_exist.csv", [], errors.InputError),
        ("wide_small.csv", ["--entity", "Atlantis"], errors.EntityNotFoundError),
        ("wide_small.csv", [], errors.EntityNotFoundError),
        ("empty.csv", [], errors.TooSparseError),
    ],
)
def test_error_paths(tmp_path, fixture, extra, error):
    assert run("fit", "--input", FIXTURES / fixture, "--out", tmp_path, *extra) == error.exit_code


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code = run("fit", "--input", FIXTURES / "hyperbola_exact.csv", "--out", blocker / "sub")
    assert code == errors.OutputError.exit_code


@pytest.mark.parametrize("argv", [["fit"], ["fit", "--input", "x", "--window", "1950:1000"], ["breakpoint", "--input", "x", "--alpha", "0.7"], ["nope"]])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_open_window(tmp_path):
    assert run("fit", "--input", FIXTURES / "hyperbola_exact.csv", "--window", ":1500", "--out", tmp_path) == 0
    kv = read_kv(tmp_path / "fit.kv")
    assert kv["window_lo"] == "1000.0" and kv["window_hi"] == "1500.0" and kv["n"] == "11"


def test_diagnose_model_data(tmp_path):
    assert run("diagnose", "--input", FIXTURES / "hyperbola_exact.csv", "--out", tmp_path) == 0
    kv = read_kv(tmp_path / "diagnose.kv")
    assert kv["overall"] == "consistent-hyperbolic"
    rows = (tmp_path / "residuals.csv").read_text().splitlines()[1:]
    assert all(abs(float(r.split(",")[3])) < 1e-12 for r in rows)


def test_diagnose_slower_tail(tmp_path):
    code = run("diagnose", "--input", FIXTURES / "slower_tail.csv", "--window", "1000:1850", "--out", tmp_path)
    assert code == 0
    kv = read_kv(tmp_path / "diagnose.kv")
    assert kv["overall"] == "slower-diversion"
    assert kv[f"segment_{kv['segments']}"].endswith(":upward")


def test_breakpoint_noiseless(tmp_path):
    code = run("breakpoint", "--input", FIXTURES / "hyperbola_exact.csv", "--candidates", "1200,1500,1750", "--out", tmp_path)
    assert code == 0
    rows = (tmp_path / "breakpoints.csv").read_text().splitlines()[1:]
    assert [r.split(",")[10] for r in rows] == ["no-change"] * 3


def test_breakpoint_takeoff_fixture(tmp_path):
    code = run("breakpoint", "--input", FIXTURES / "takeoff_1900.csv", "--window", "1700:1950", "--candidates", "1900", "--out", tmp_path)
    assert code == 0
    header, row = (tmp_path / "breakpoints.csv").read_text().splitlines()
    cells = dict(zip(header.split(","), row.split(",")))
    assert cells["classification"] == "takeoff"
    assert float(cells["p_value"]) < 0.01
    regimes = (tmp_path / "regimes.csv").read_text().splitlines()
    assert regimes[-1].startswith("1900.0,") and regimes[-1].endswith(",supported")


def test_untestable_candidate_is_reported_inline(tmp_path):
    code = run("breakpoint", "--input", FIXTURES / "hyperbola_exact.csv", "--candidates", "1020,1500", "--out", tmp_path)
    assert code == 0
    assert ",untestable," in (tmp_path / "breakpoints.csv").read_text()


def test_simulate(tmp_path, monkeypatch):
    monkeypatch.delenv("GROWTHLENS_SEED", raising=False)
    code = run("simulate", "--config", FIXTURES / "calibration.conf", "--trials", "200", "--out", tmp_path)
    assert code == 0
    kv = read_kv(tmp_path / "simulate.kv")
    assert kv["seed"] == "20150101" and kv["trials"] == "200"
    assert float(kv["detection_rate"]) >= 0.95
    assert "+/-" in (tmp_path / "report.md").read_text()
    assert (tmp_path / "series_alt.csv").exists()


def test_seed_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("GROWTHLENS_SEED", "5")
    run("simulate", "--config", FIXTURES / "calibration.conf", "--trials", "100", "--out", tmp_path / "env")
    assert read_kv(tmp_path / "env" / "simulate.kv")["seed"] == "5"
    run("simulate", "--config", FIXTURES / "calibration.conf", "--trials", "100", "--seed", "9", "--out", tmp_path / "arg")
    assert read_kv(tmp_path / "arg" / "simulate.kv")["seed"] == "9"


def test_bad_config(tmp_path):
    cfg = tmp_path / "bad.conf"
    cfg.write_text("trials = 10\n")
    assert run("simulate", "--config", cfg, "--out", tmp_path) == errors.SpecError.exit_code


def test_machine_outputs_deterministic(tmp_path):
    args = ["report", "--input", FIXTURES / "takeoff_1900.csv", "--window", "1700:1950", "--svg",
            "--config", FIXTURES / "calibration.conf", "--trials", "100"]
    assert run(*args, "--out", tmp_path / "one") == 0
    assert run(*args, "--out", tmp_path / "two") == 0
    names = sorted(p.name for p in (tmp_path / "one").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "two").iterdir())
    for name in names:
        a = (tmp_path / "one" / name).read_bytes()
        b = (tmp_path / "two" / name).read_bytes()
        if name == "report.md":
            strip = lambda t: [l for l in t.splitlines() if not l.startswith(b"Generated:")]  # noqa: E731
            a, b = strip(a), strip(b)
        assert a == b, name


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "growthlens", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "exit codes:" in out.stdout
