"""Periodic grids, complex fields and the spectral primitives built on them.

Transforms use the unnormalized DFT of ``scipy.fft``. With that convention

    h^2 * sum |u|^2 = (h^2 / n^2) * sum |u_hat|^2,

so the Parseval weight of a grid is ``h**2 / n**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import InvalidField, RadiusOutOfBox

FFT_WORKERS = 1


def fft2(values: np.ndarray) -> np.ndarray:
    return sfft.fft2(values, workers=FFT_WORKERS)


def ifft2(values: np.ndarray) -> np.ndarray:
    return sfft.ifft2(values, workers=FFT_WORKERS)


@dataclass(frozen=True)
class GridSpec:
    """Square periodic box [-L, L)^2 sampled with n points per axis."""

    n: int
    half_width: float

    def __post_init__(self) -> None:
        n = self.n
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise InvalidField(f"n must be an integer, got {n!r}")
        if n < 8 or (n & (n - 1)) != 0:
            raise InvalidField(f"n must be a power of two >= 8, got {n}")
        L = float(self.half_width)
        if not math.isfinite(L) or L <= 0:
            raise InvalidField(f"half_width must be positive and finite, got {self.half_width!r}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "half_width", L)

    @property
    def spacing(self) -> float:
        # n is a power of two, so this division is exact in binary floating point.
        return 2.0 * self.half_width / self.n

    h = spacing

    @property
    def parseval_weight(self) -> float:
        return self.spacing**2 / self.n**2

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    @cached_property
    def x(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Signed wavenumbers pi*j/L in FFT order (j = 0..n/2-1, -n/2..-1)."""
        return np.pi * np.fft.fftfreq(self.n, d=1.0 / self.n) / self.half_width

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.x, indexing="ij")

    @cached_property
    def radius(self) -> np.ndarray:
        X, Y = self.mesh
        return np.hypot(X, Y)

    @cached_property
    def sup_radius(self) -> np.ndarray:
        X, Y = self.mesh
        return np.maximum(np.abs(X), np.abs(Y))

    @cached_property
    def kappa_sq(self) -> np.ndarray:
        k = self.wavenumbers
        return k[:, None] ** 2 + k[None, :] ** 2

    def zeros(self) -> "ComplexField":
        return ComplexField(self, np.zeros((self.n, self.n), dtype=complex))


@dataclass(frozen=True)
class ComplexField:
    """Complex samples on a grid, indexed ``values[i, j] = u(x_i, x_j)``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        n = self.grid.n
        if vals.shape != (n, n):
            raise InvalidField(f"expected shape {(n, n)}, got {vals.shape}")
        if not np.isfinite(vals).all():
            raise InvalidField("field contains non-finite samples")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: GridSpec, fn) -> "ComplexField":
        X, Y = grid.mesh
        return cls(grid, np.asarray(fn(X, Y), dtype=complex) * np.ones_like(X))

    def scaled(self, s: complex) -> "ComplexField":
        return ComplexField(self.grid, s * self.values)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        if other.grid != self.grid:
            raise InvalidField("fields live on different grids")
        return ComplexField(self.grid, self.values - other.values)


def to_spectrum(field: ComplexField) -> ComplexField:
    """Unnormalized DFT coefficients (zero mode at index [0, 0])."""
    return ComplexField(field.grid, fft2(field.values))


def from_spectrum(spectrum: ComplexField) -> ComplexField:
    return ComplexField(spectrum.grid, ifft2(spectrum.values))


def _mass_sum(values: np.ndarray, grid: GridSpec) -> float:
    return grid.cell_area * float(np.sum(values.real**2 + values.imag**2))


def _grad_sq_from_spectrum(spec: np.ndarray, grid: GridSpec) -> float:
    return grid.parseval_weight * float(np.sum(grid.kappa_sq * (spec.real**2 + spec.imag**2)))


def l2_norm(field: ComplexField) -> float:
    return math.sqrt(_mass_sum(field.values, field.grid))


def grad_l2_norm(field: ComplexField) -> float:
    return math.sqrt(_grad_sq_from_spectrum(fft2(field.values), field.grid))


def lp_norm(field: ComplexField, p: float) -> float:
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(field.values)
    return (field.grid.cell_area * float(np.sum(a**p))) ** (1.0 / p)


def linf_norm(field: ComplexField) -> float:
    return float(np.max(np.abs(field.values)))


def _pair_max(u: np.ndarray, a: int, b: int) -> float:
    """max |u(x + d) - u(x)| over non-wrapping pairs, d = (a, b) with a >= 0."""
    n = u.shape[0]
    if b >= 0:
        diff = u[a:, b:] - u[: n - a, : n - b]
    else:
        diff = u[a:, : n + b] - u[: n - a, -b:]
    if diff.size == 0:
        return 0.0
    return float(np.sqrt(np.max(diff.real**2 + diff.imag**2)))


def _half_plane_offsets(n: int, radius: float) -> list[tuple[int, int]]:
    r = int(math.floor(min(radius, math.hypot(n - 1, n - 1))))
    out = []
    for a in range(0, min(r, n - 1) + 1):
        for b in range(-min(r, n - 1), min(r, n - 1) + 1):
            if (a == 0 and b <= 0) or a * a + b * b > radius * radius:
                continue
            out.append((a, b))
    return out


def _canonical(a: int, b: int) -> tuple[int, int]:
    if a < 0 or (a == 0 and b < 0):
        return -a, -b
    return a, b


def holder_seminorm(field: ComplexField, beta: float, radius_cutoff: int | None = 4) -> float:
    """Lattice beta-Hölder seminorm over pairs with 0 < |x - y| <= radius_cutoff * h.

    Only pairs inside the box are compared (no periodic wrap). The result is a
    lower estimate of the continuum seminorm. ``radius_cutoff=None`` searches
    every lattice offset exactly, pruning offsets whose upper bound cannot beat
    the running maximum.
    """
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    u = field.values
    n = field.grid.n
    h = field.grid.spacing
    if radius_cutoff is not None:
        if radius_cutoff < 1:
            raise ValueError("radius_cutoff must be >= 1")
        best = 0.0
        for a, b in _half_plane_offsets(n, radius_cutoff):
            m = _pair_max(u, a, b)
            if m > 0:
                best = max(best, m / (h * math.hypot(a, b)) ** beta)
        return best
    return _holder_full(u, h, beta)


def _holder_full(u: np.ndarray, h: float, beta: float, stride: int = 8) -> float:
    n = u.shape[0]
    step = max(
        _pair_max(u, 1, 0),
        _pair_max(u, 0, 1),
    )
    if step == 0.0:
        return 0.0
    re, im = u.real, u.imag
    diam = math.hypot(float(re.max() - re.min()), float(im.max() - im.min()))

    def scale(a: int, b: int) -> float:
        return (h * math.hypot(a, b)) ** beta

    coarse: dict[tuple[int, int], float] = {(0, 0): 0.0}
    best = 0.0
    if stride >= n:
        stride = max(1, n // 4)
    for a in range(0, n, stride):
        for b in range(-(n - 1) // stride * stride, n, stride):
            if a == 0 and b <= 0:
                continue
            m = _pair_max(u, a, b)
            coarse[(a, b)] = m
            best = max(best, m / scale(a, b))

    def coarse_value(a: int, b: int) -> float:
        ca, cb = _canonical(a, b)
        return coarse.get((ca, cb), 0.0)

    candidates = []
    for a in range(0, n):
        fa = (a // stride) * stride
        for b in range(-(n - 1), n):
            if a == 0 and b <= 0:
                continue
            fb = int(math.copysign((abs(b) // stride) * stride, b))
            if (a, b) == (fa, fb):
                continue
            path = coarse_value(fa, fb) + step * (abs(a - fa) + abs(b - fb))
            bound = min(diam, path, step * (abs(a) + abs(b))) / scale(a, b)
            if bound > best:
                candidates.append((bound, a, b))
    candidates.sort(reverse=True)
    for bound, a, b in candidates:
        if bound <= best:
            break
        best = max(best, _pair_max(u, a, b) / scale(a, b))
    return best


def localized_mass(field: ComplexField, R: float) -> float:
    """Mass inside the closed disc |x| <= R."""
    L = field.grid.half_width
    if not 0 < R < L:
        raise RadiusOutOfBox(f"radius {R} must satisfy 0 < R < L = {L}")
    mask = field.grid.radius <= R
    v = field.values[mask]
    return field.grid.cell_area * float(np.sum(v.real**2 + v.imag**2))


def boundary_band_mass(field: ComplexField, width: float | None = None) -> float:
    """Mass in the band L - width <= |x|_inf < L (width defaults to min(1, L/4))."""
    L = field.grid.half_width
    w = min(1.0, L / 4) if width is None else float(width)
    mask = field.grid.sup_radius >= L - w
    v = field.values[mask]
    return field.grid.cell_area * float(np.sum(v.real**2 + v.imag**2))
