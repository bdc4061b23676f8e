"""Weighted least-squares line kernels.

Two implementations with the same contract: a numba ``@njit`` loop and a
vectorized numpy path. The numba path is used when numba imports and the
environment variable ``GROWTHLENS_NO_JIT`` is unset (or ``0``); set it to
``1`` to force the numpy path, e.g. for debugging or benchmarking.

Both return ``(slope, intercept, xbar, sw, sxx, ss_res, ss_tot)`` where the
sums are weighted and centered on the weighted mean of ``x``.
"""

from __future__ import annotations

import os

import numpy as np


def _jit_requested() -> bool:
    return os.environ.get("GROWTHLENS_NO_JIT", "0").strip().lower() in ("", "0", "false", "no")


def wls_line_numpy(x: np.ndarray, y: np.ndarray, w: np.ndarray):
    sw = w.sum()
    xbar = (w * x).sum() / sw
    ybar = (w * y).sum() / sw
    dx = x - xbar
    dy = y - ybar
    sxx = (w * dx * dx).sum()
    slope = (w * dx * dy).sum() / sxx
    intercept_c = ybar
    r = dy - slope * dx
    ss_res = (w * r * r).sum()
    ss_tot = (w * dy * dy).sum()
    return slope, intercept_c - slope * xbar, xbar, sw, sxx, ss_res, ss_tot


def _wls_line_loop(x, y, w):
    n = x.shape[0]
    sw = 0.0
    sx = 0.0
    sy = 0.0
    for i in range(n):
        sw += w[i]
        sx += w[i] * x[i]
        sy += w[i] * y[i]
    xbar = sx / sw
    ybar = sy / sw
    sxx = 0.0
    sxy = 0.0
    ss_tot = 0.0
    for i in range(n):
        dx = x[i] - xbar
        dy = y[i] - ybar
        sxx += w[i] * dx * dx
        sxy += w[i] * dx * dy
        ss_tot += w[i] * dy * dy
    slope = sxy / sxx
    ss_res = 0.0
    for i in range(n):
        r = (y[i] - ybar) - slope * (x[i] - xbar)
        ss_res += w[i] * r * r
    return slope, ybar - slope * xbar, xbar, sw, sxx, ss_res, ss_tot


try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

JIT_AVAILABLE = njit is not None

if JIT_AVAILABLE:
    wls_line_jit = njit(cache=True, nogil=True)(_wls_line_loop)
else:  # pragma: no cover
    wls_line_jit = None


def backend() -> str:
    """Name of the kernel path currently selected: ``"numba"`` or ``"numpy"``."""
    return "numba" if (JIT_AVAILABLE and _jit_requested()) else "numpy"


def wls_line(x: np.ndarray, y: np.ndarray, w: np.ndarray):
    """Dispatch to the selected kernel. Inputs must be contiguous float64."""
    if JIT_AVAILABLE and _jit_requested():
        return wls_line_jit(x, y, w)
    return wls_line_numpy(x, y, w)
