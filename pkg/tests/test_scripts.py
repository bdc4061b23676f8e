import importlib.util
import sys
from pathlib import Path

from growthlens import load_series

from .conftest import FIXTURES, ROOT


def load_script(name):
    spec = importlib.util.spec_from_file_location(name, ROOT / "scripts" / f"{name}.py")
    module = importlib.util.module_from_spec(spec)
    sys.modules[name] = module
    spec.loader.exec_module(module)
    return module


SHEET = (
    "World Population, GDP and Per Capita GDP\n"
    "GDP (million 1990 International Geary-Khamis dollars)\n"
    "\n"
    ",1,1000,1500,1600,1700,1820,1821\n"
    'Total Asia excl. Japan,"75,400","97,000",120000,,160000,400000,\n'
    "Japan,1,2,3,4,5,6,7\n"
)


def test_extract_horizontal_sheet(tmp_path, capsys):
    src = tmp_path / "gdp.csv"
    src.write_text(SHEET)
    out = tmp_path / "asia.csv"
    assert load_script("extract_maddison").main([str(src), "--out", str(out)]) == 0
    s = load_series(out)
    assert s.entity == "Asia excl. Japan"
    assert s.years.tolist() == [1.0, 1000.0, 1500.0, 1700.0, 1820.0]
    assert s.values.tolist() == [75.4, 97.0, 120.0, 160.0, 400.0]
    assert "sha256=" in out.read_text().splitlines()[2]


def test_make_fixtures_is_reproducible(tmp_path, monkeypatch):
    module = load_script("make_fixtures")
    monkeypatch.setattr(module, "OUT", Path(tmp_path))
    module.main()
    for name in module.FIXTURES:
        assert (tmp_path / name).read_bytes() == (FIXTURES / name).read_bytes(), name
