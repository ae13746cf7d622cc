"""Overflow-guarded evaluation of f(u) = u(e^{4 pi |u|^2} - 1) and the conserved functionals."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidFunctional, OverflowRisk
from .spectral import ComplexField, _grad_sq_from_spectrum, _mass_sum, fft2

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class SafetyPolicy:
    max_exponent: float = 600.0
    small_arg_cutoff: float = 1e-3

    def __post_init__(self) -> None:
        if not 0 < self.small_arg_cutoff < 1 < self.max_exponent < 709:
            raise ValueError(
                "need 0 < small_arg_cutoff < 1 < max_exponent < 709, got "
                f"{self.small_arg_cutoff}, {self.max_exponent}"
            )


DEFAULT_SAFETY = SafetyPolicy()


class Regime(str, enum.Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class RegimeLabel:
    kind: Regime
    margin: float


def _exponent(z, safety: SafetyPolicy) -> np.ndarray:
    z = np.asarray(z)
    rho = z.real**2 + z.imag**2 if np.iscomplexobj(z) else z * z
    x = FOUR_PI * rho
    if x.size and not np.all(x <= safety.max_exponent):
        bad = np.nanargmax(np.where(np.isfinite(x), x, np.inf))
        loc = np.unravel_index(bad, x.shape) if x.ndim else None
        xb = float(x.flat[bad])
        raise OverflowRisk(math.sqrt(xb / FOUR_PI) if math.isfinite(xb) else xb, xb,
                           safety.max_exponent, loc)
    return x


def _scalar_or_array(template, out):
    return out.item() if np.ndim(template) == 0 else out


def K_eval(z, safety: SafetyPolicy = DEFAULT_SAFETY):
    """K(z) = e^{4 pi |z|^2} - 1 (expm1, so accurate near zero)."""
    return _scalar_or_array(z, np.expm1(_exponent(z, safety)))


def f_eval(z, safety: SafetyPolicy = DEFAULT_SAFETY):
    """f(z) = z K(z). The real factor K >= 0 keeps the phase of z."""
    out = np.asarray(z) * np.expm1(_exponent(z, safety))
    return _scalar_or_array(z, out)


def _expm1_minus_x(x: np.ndarray, cutoff: float) -> np.ndarray:
    """e^x - 1 - x, with a six-term Taylor series below ``cutoff``."""
    x = np.asarray(x, dtype=float)
    out = np.expm1(x) - x
    small = x < cutoff
    if np.any(small):
        xs = x[small]
        # Horner form of x^2/2 + x^3/6 + ... + x^7/5040.
        poly = 1.0 / 5040.0
        for c in (1.0 / 720.0, 1.0 / 120.0, 1.0 / 24.0, 1.0 / 6.0, 1.0 / 2.0):
            poly = poly * xs + c
        out[small] = poly * xs * xs
    return out


def hamiltonian_density(z, safety: SafetyPolicy = DEFAULT_SAFETY):
    """(e^x - 1 - x) / (4 pi) with x = 4 pi |z|^2."""
    x = _exponent(z, safety)
    out = _expm1_minus_x(np.atleast_1d(x), safety.small_arg_cutoff).reshape(np.shape(x)) / FOUR_PI
    return _scalar_or_array(z, out)


def mass(field: ComplexField) -> float:
    return _mass_sum(field.values, field.grid)


def potential_energy(field: ComplexField, safety: SafetyPolicy = DEFAULT_SAFETY) -> float:
    return field.grid.cell_area * float(np.sum(hamiltonian_density(field.values, safety)))


def hamiltonian(field: ComplexField, safety: SafetyPolicy = DEFAULT_SAFETY) -> float:
    pot = potential_energy(field, safety)
    return _grad_sq_from_spectrum(fft2(field.values), field.grid) + pot


def classify_regime(H0: float, tol_crit: float = 1e-9) -> RegimeLabel:
    if not H0 >= 0 or not math.isfinite(H0):
        raise InvalidFunctional(f"Hamiltonian must be finite and nonnegative, got {H0}")
    if not tol_crit > 0:
        raise ValueError("tol_crit must be positive")
    margin = H0 - 1.0
    if margin < -tol_crit:
        kind = Regime.SUBCRITICAL
    elif margin > tol_crit:
        kind = Regime.SUPERCRITICAL
    else:
        kind = Regime.CRITICAL
    return RegimeLabel(kind, margin)


def _random_disc_pairs(rng: np.random.Generator, n_pairs: int, radius: float):
    def draw():
        r = radius * np.sqrt(rng.random(n_pairs))
        th = 2 * math.pi * rng.random(n_pairs)
        return r * np.exp(1j * th)

    z1 = draw()
    # Half of the partners are close to z1 so that the ratio sees its local regime.
    z2 = draw()
    near = rng.random(n_pairs) < 0.5
    jitter = 1e-3 * radius * (rng.standard_normal(n_pairs) + 1j * rng.standard_normal(n_pairs))
    z2 = np.where(near, z1 + jitter, z2)
    z2 = np.where(np.abs(z2) > radius, z2 / np.abs(z2) * radius, z2)
    return z1, z2


def lipschitz_ratio_max(
    n_pairs: int = 100_000, radius: float = 0.9, eps: float = 0.1, seed: int = 0
) -> float:
    """Smallest C with |f(z1)-f(z2)| <= C|z1-z2| sum_i (e^{4pi(1+eps)|z_i|^2}-1) on sampled pairs."""
    rng = np.random.default_rng(seed)
    z1, z2 = _random_disc_pairs(rng, n_pairs, radius)
    lhs = np.abs(f_eval(z1) - f_eval(z2))
    w = np.expm1(FOUR_PI * (1 + eps) * np.abs(z1) ** 2) + np.expm1(FOUR_PI * (1 + eps) * np.abs(z2) ** 2)
    denom = np.abs(z1 - z2) * w
    keep = denom > 0
    return float(np.max(lhs[keep] / denom[keep]))


def _df_real_jacobian(z: np.ndarray) -> np.ndarray:
    """Real 2x2 Jacobian of f viewed as a map on R^2: K I + 8 pi e^{4 pi |z|^2} z z^T."""
    x = FOUR_PI * np.abs(z) ** 2
    K = np.expm1(x)
    d = 2.0 * FOUR_PI * np.exp(x)
    a, b = z.real, z.imag
    J = np.empty(z.shape + (2, 2))
    J[..., 0, 0] = K + d * a * a
    J[..., 0, 1] = d * a * b
    J[..., 1, 0] = d * a * b
    J[..., 1, 1] = K + d * b * b
    return J


def derivative_lipschitz_ratio_max(
    n_pairs: int = 100_000, radius: float = 0.9, eps: float = 0.1, seed: int = 0
) -> float:
    """Smallest C with |Df(z1)-Df(z2)| <= C|z1-z2| sum_i (|z_i| + e^{4pi(1+eps)|z_i|^2} - 1) on sampled pairs.

    The operator norm of the Jacobian difference is used.
    """
    rng = np.random.default_rng(seed)
    z1, z2 = _random_disc_pairs(rng, n_pairs, radius)
    dJ = _df_real_jacobian(z1) - _df_real_jacobian(z2)
    lhs = np.linalg.norm(dJ, ord=2, axis=(-2, -1))
    w = sum(np.abs(z) + np.expm1(FOUR_PI * (1 + eps) * np.abs(z) ** 2) for z in (z1, z2))
    denom = np.abs(z1 - z2) * w
    keep = denom > 0
    return float(np.max(lhs[keep] / denom[keep]))


def power_gaussian_sup(m: float, gamma: float) -> float:
    """sup_{x >= 0} x^m e^{-gamma x^2} = (m / (2 gamma))^{m/2} e^{-m/2}."""
    if m <= 0 or gamma <= 0:
        raise ValueError("m and gamma must be positive")
    return (m / (2.0 * gamma)) ** (m / 2.0) * math.exp(-m / 2.0)
