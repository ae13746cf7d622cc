"""Adaptive 1D quadrature helpers for radial integrals."""

from __future__ import annotations

import math
import warnings
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import QuadratureFailure

DEFAULT_RTOL = 1e-11


def quad_segments(
    fn: Callable[[float], float],
    breakpoints: Sequence[float],
    rtol: float = DEFAULT_RTOL,
    limit: int = 400,
) -> float:
    """Integrate ``fn`` over consecutive segments of ``breakpoints``.

    Any integration warning from QUADPACK is raised as QuadratureFailure so
    that a silently inaccurate value never propagates.
    """
    pts = sorted(float(p) for p in breakpoints)
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi <= lo:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, _err = integrate.quad(fn, lo, hi, epsabs=0.0, epsrel=rtol, limit=limit)
            except integrate.IntegrationWarning as exc:
                raise QuadratureFailure(f"quadrature on [{lo:.6g}, {hi:.6g}] failed: {exc}") from exc
        if not math.isfinite(val):
            raise QuadratureFailure(f"non-finite integral on [{lo:.6g}, {hi:.6g}]")
        total += val
    return total


def radial_integral(
    fn: Callable[[float], float],
    radii: Sequence[float],
    rtol: float = DEFAULT_RTOL,
) -> float:
    """2 pi int fn(r) r dr over [min(radii), max(radii)] with interior breakpoints.

    Integration runs in s = log r (the integrand becomes fn(e^s) e^{2s}), which
    resolves radii that span many decades.
    """
    logs = [math.log(r) for r in radii]

    def integrand(s: float) -> float:
        r = math.exp(s)
        return fn(r) * r * r

    return 2.0 * math.pi * quad_segments(integrand, logs, rtol)


def vectorize_scalar(fn: Callable[[np.ndarray], np.ndarray]) -> Callable[[float], float]:
    """Wrap an array function so QUADPACK can call it with floats."""

    def wrapped(r: float) -> float:
        return float(fn(np.asarray(r, dtype=float)))

    return wrapped
