import numpy as np
import pytest

from growthlens import _kernels


@pytest.mark.skipif(not _kernels.JIT_AVAILABLE, reason="numba not importable")
@pytest.mark.parametrize("n", [3, 17, 400])
def test_jit_and_numpy_paths_agree(n):
    rng = np.random.default_rng(n)
    x = np.sort(rng.uniform(1000, 1950, n))
    y = 0.025 - 1.2e-5 * x + rng.normal(0, 1e-4, n)
    w = rng.uniform(0.5, 2.0, n)
    a = _kernels.wls_line_numpy(x, y, w)
    b = _kernels.wls_line_jit(x, y, w)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-18)


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setenv("GROWTHLENS_NO_JIT", "1")
    assert _kernels.backend() == "numpy"
    monkeypatch.setenv("GROWTHLENS_NO_JIT", "0")
    assert _kernels.backend() == ("numba" if _kernels.JIT_AVAILABLE else "numpy")


def test_dispatch_result_does_not_depend_on_backend(monkeypatch):
    x = np.array([0.0, 1.0, 2.0, 4.0])
    y = np.array([1.0, 3.0, 5.0, 9.5])
    w = np.ones(4)
    monkeypatch.setenv("GROWTHLENS_NO_JIT", "1")
    slow = _kernels.wls_line(x, y, w)
    monkeypatch.delenv("GROWTHLENS_NO_JIT")
    fast = _kernels.wls_line(x, y, w)
    np.testing.assert_allclose(slow, fast, rtol=1e-13)
