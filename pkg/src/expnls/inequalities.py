"""Moser-Trudinger functional, its Moser-function witnesses, and the logarithmic L-infinity estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .data import gaussian_field  # noqa: F401  (re-exported for callers of this module)
from .errors import InvalidFunctional, OverflowRisk, ZeroField
from .nonlinearity import DEFAULT_SAFETY, SafetyPolicy
from .quadrature import quad_segments
from .spectral import ComplexField, GridSpec, grad_l2_norm, holder_seminorm, l2_norm, linf_norm


def mt_functional(field: ComplexField, alpha_exp: float, safety: SafetyPolicy = DEFAULT_SAFETY) -> float:
    """h^2 sum (e^{alpha |u|^2} - 1)."""
    if not alpha_exp > 0:
        raise InvalidFunctional(f"alpha_exp must be positive, got {alpha_exp}")
    v = field.values
    x = alpha_exp * (v.real**2 + v.imag**2)
    xmax = float(x.max())
    if xmax > safety.max_exponent:
        idx = np.unravel_index(int(np.argmax(x)), x.shape)
        raise OverflowRisk(math.sqrt(xmax / alpha_exp), xmax, safety.max_exponent, idx)
    return field.grid.cell_area * float(np.sum(np.expm1(x)))


def moser_mt_functional(k: float, alpha_exp: float, rtol: float = 1e-12) -> float:
    """int (e^{alpha f_k^2} - 1) over R^2, exactly split into plateau disc and log annulus.

    With s = -log r the annulus part is 2 pi int_0^{k/2} expm1(alpha s^2/(k pi)) e^{-2s} ds,
    so no exponential larger than the integrand itself is formed.
    """
    if not alpha_exp > 0:
        raise InvalidFunctional(f"alpha_exp must be positive, got {alpha_exp}")
    c = alpha_exp / (k * math.pi)
    plateau = math.pi * math.exp(-k) * math.expm1(alpha_exp * k / (4.0 * math.pi))
    annulus = 2.0 * math.pi * quad_segments(
        lambda s: math.expm1(c * s * s) * math.exp(-2.0 * s), [0.0, 1.0, k / 4.0, k / 2.0], rtol
    )
    return plateau + annulus


def moser_l2_squared(k: float, rtol: float = 1e-12) -> float:
    """|f_k|^2 in L^2: (k/4) e^{-k} + (2/k) int_0^{k/2} s^2 e^{-2s} ds."""
    annulus = 2.0 / k * quad_segments(lambda s: s * s * math.exp(-2.0 * s), [0.0, 1.0, k / 2.0], rtol)
    return k / 4.0 * math.exp(-k) + annulus


@dataclass(frozen=True)
class MTRatio:
    k: float
    ratio: float
    functional: float
    l2_sq: float


def mt_ratio_scan(k_list: Iterable[float], alpha_exp: float) -> list[MTRatio]:
    ks = list(k_list)
    if not ks:
        raise ValueError("k_list must be nonempty")
    out = []
    for k in ks:
        F = moser_mt_functional(k, alpha_exp)
        m = moser_l2_squared(k)
        out.append(MTRatio(k, F / m, F, m))
    return out


def mu_norm(field: ComplexField, mu: float) -> float:
    """sqrt(|grad u|^2 + mu^2 |u|^2)."""
    return math.sqrt(grad_l2_norm(field) ** 2 + mu * mu * l2_norm(field) ** 2)


def log_estimate_constant(
    field: ComplexField,
    lam: float,
    mu: float = 1.0,
    beta: float = 0.5,
    holder_radius: int | None = None,
) -> float:
    """Minimal C turning the logarithmic L-infinity estimate into an equality for this field.

    C = exp(|u|_inf^2 / (lam |u|_mu^2)) - 8^beta mu^{-beta} |u|_{C^beta} / |u|_mu,
    where |u|_{C^beta} = |u|_inf + lattice seminorm. ``holder_radius=None``
    searches every lattice offset. The value can be negative.
    """
    if not 0 < mu <= 1:
        raise ValueError(f"mu must lie in (0, 1], got {mu}")
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    if lam < 1.0 / (2.0 * math.pi * beta) * (1 - 1e-12):
        raise ValueError(f"lambda must be >= 1/(2 pi beta) = {1 / (2 * math.pi * beta):.6g}, got {lam}")
    sup = linf_norm(field)
    if sup == 0.0:
        raise ZeroField("log estimate constant is undefined for the zero field")
    nm = mu_norm(field, mu)
    holder = sup + holder_seminorm(field, beta, holder_radius)
    return math.exp(sup * sup / (lam * nm * nm)) - 8.0**beta * mu ** (-beta) * holder / nm


def random_smooth_field(grid: GridSpec, rng: np.random.Generator, width_range: tuple[float, float] = (1.0, 4.0),
                        n_perturb: int = 3, perturb_amplitude: float = 0.1) -> ComplexField:
    """A unit Gaussian bump with random width, centre and phase plus small random Gaussian bumps.

    The family sup of the log-estimate constant is governed by the widest
    members, so it is stable under reseeding; sums of comparable bumps are not.
    """
    L = grid.half_width
    X, Y = grid.mesh

    def bump(cx, cy, w):
        return np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2.0 * w * w))

    w = rng.uniform(*width_range)
    cx, cy = rng.uniform(-L / 8, L / 8, size=2)
    vals = np.exp(2j * math.pi * rng.random()) * bump(cx, cy, w)
    for _ in range(n_perturb):
        px, py = rng.uniform(-L / 4, L / 4, size=2)
        pw = rng.uniform(*width_range)
        amp = perturb_amplitude * (rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2.0)
        vals = vals + amp * bump(px, py, pw)
    return ComplexField(grid, vals)


def log_estimate_family_sup(grid: GridSpec, n_fields: int, seed: int, lam: float,
                            mu: float = 1.0, beta: float = 0.5) -> float:
    """Largest log-estimate constant over a seeded family of smooth random fields."""
    rng = np.random.default_rng(seed)
    return max(log_estimate_constant(random_smooth_field(grid, rng), lam, mu, beta) for _ in range(n_fields))


def mt_admissible_sup(grid: GridSpec, n_fields: int, seed: int, grad_norm: float = 0.9,
                      alpha_exp: float = 4.0 * math.pi * 0.81) -> float:
    """max of mt_functional(u, alpha)/|u|^2 over a seeded family rescaled to |grad u| = grad_norm."""
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(n_fields):
        u = random_smooth_field(grid, rng)
        u = u.scaled(grad_norm / grad_l2_norm(u))
        best = max(best, mt_functional(u, alpha_exp) / l2_norm(u) ** 2)
    return best
