"""Small numerical helpers shared by the residual checks."""
from __future__ import annotations

import numpy as np

from .core import ErmakovLabError


class StencilError(ErmakovLabError, ValueError):
    """Samples are too few or not uniformly spaced for a difference stencil."""


def uniform_spacing(t, rtol: float = 1e-9) -> float:
    """Return the common spacing of ``t`` or raise :class:`StencilError`."""
    t = np.asarray(t, dtype=float)
    if t.size < 5:
        raise StencilError(f"need at least 5 samples, got {t.size}")
    steps = np.diff(t)
    h = (t[-1] - t[0]) / (t.size - 1)
    if not h > 0 or np.max(np.abs(steps - h)) > rtol * max(abs(h), np.max(np.abs(t))):
        raise StencilError("samples are not uniformly spaced")
    return float(h)


def central_diff4(f, h: float, axis: int = 0) -> np.ndarray:
    """Fourth-order central first derivative at interior points.

    Drops two samples at each end, so the result is 4 shorter along ``axis``.
    """
    f = np.moveaxis(np.asarray(f), axis, 0)
    d = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    return np.moveaxis(d, 0, axis)


def second_diff4(f, h: float) -> np.ndarray:
    """Fourth-order central second derivative at interior points (4 shorter)."""
    f = np.asarray(f)
    return (-f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]) / (12.0 * h * h)


def trapezoid(y, x) -> float:
    return float(np.trapezoid(y, x))


def fit_exponent(x, y) -> float:
    """Least-squares slope of log(y) against log(x)."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
