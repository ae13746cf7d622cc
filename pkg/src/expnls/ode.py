"""Exact dispersionless solution Phi_0 = g e^{-itK(g)} and its ring decoherence quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams
from .moser import QUINTIC, CutoffProfile, MoserParams, g_radial, g_radial_prime, support_breakpoints
from .nonlinearity import DEFAULT_SAFETY, FOUR_PI, SafetyPolicy, K_eval
from .quadrature import radial_integral


@dataclass(frozen=True)
class RingSpec:
    """The ring 2e^{-k/2} <= |y| <= 3e^{-k/2}."""

    k: int

    @property
    def inner(self) -> float:
        return 2.0 * math.exp(-self.k / 2.0)

    @property
    def outer(self) -> float:
        return 3.0 * math.exp(-self.k / 2.0)

    @classmethod
    def for_params(cls, params: MoserParams) -> "RingSpec":
        ring = cls(params.k)
        if not params.nu > ring.outer:
            raise InvalidParams(f"ring outer radius {ring.outer:.6g} must lie below nu={params.nu:.6g}")
        return ring


def critical_time(k: float, epsilon: float) -> float:
    if k < 4 or epsilon <= 0:
        raise ValueError("need k >= 4 and epsilon > 0")
    return epsilon * math.exp(-k) / math.sqrt(k)


def decoherence_lower_bound(alpha: float, epsilon: float) -> float:
    """epsilon (e^{2 alpha} - 1); the scale of the pair separation lower bound."""
    if alpha < 0 or epsilon <= 0:
        raise ValueError("need alpha >= 0 and epsilon > 0")
    return epsilon * math.expm1(2.0 * alpha)


def phi0_eval(params: MoserParams, profile: CutoffProfile, t: float, y, safety: SafetyPolicy = DEFAULT_SAFETY):
    y = np.asarray(y, dtype=float)
    g = g_radial(params, profile, np.hypot(y[..., 0], y[..., 1]))
    return g * np.exp(-1j * t * np.asarray(K_eval(g, safety)))


def phi0_radial(params: MoserParams, profile: CutoffProfile, t: float, r, safety: SafetyPolicy = DEFAULT_SAFETY):
    g = np.asarray(g_radial(params, profile, r))
    return g * np.exp(-1j * t * np.asarray(K_eval(g, safety)))


def phi0_radial_gradient(params: MoserParams, profile: CutoffProfile, t: float, r,
                         safety: SafetyPolicy = DEFAULT_SAFETY):
    """Radial component of grad Phi_0: g'(1 - 8 pi i t g^2 e^{4 pi g^2}) e^{-i t K(g)}."""
    g = np.asarray(g_radial(params, profile, r))
    dg = np.asarray(g_radial_prime(params, profile, r))
    K = np.asarray(K_eval(g, safety))
    return dg * (1.0 - 2j * FOUR_PI * t * g * g * (K + 1.0)) * np.exp(-1j * t * K)


def ring_integrals(params: MoserParams, profile: CutoffProfile = QUINTIC) -> tuple[float, float]:
    """(I, J) with I = |grad g|^2 and J = |g^2 e^{4 pi g^2} grad g|^2, both over the ring."""
    ring = RingSpec.for_params(params)
    pts = [ring.inner, ring.outer]

    def i_int(r):
        return float(g_radial_prime(params, profile, r)) ** 2

    def j_int(r):
        g = float(g_radial(params, profile, r))
        return (g * g * math.exp(FOUR_PI * g * g)) ** 2 * i_int(r)

    return radial_integral(i_int, pts), radial_integral(j_int, pts)


def ring_grad_norm(params: MoserParams, profile: CutoffProfile, t: float) -> float:
    """|grad Phi_0(t)| in L^2 of the ring, from sqrt(I + 64 pi^2 t^2 J)."""
    I, J = ring_integrals(params, profile)
    return math.sqrt(I + 64.0 * math.pi**2 * t * t * J)


def ode_pair_separation(
    params_alpha: MoserParams,
    params_zero: MoserParams,
    profile: CutoffProfile,
    t: float,
    region: str = "ring",
) -> float:
    """|grad(Phi_0^alpha - Phi_0^0)(t)| in L^2 of the ring (or of the whole data support)."""
    if (params_alpha.k, params_alpha.A) != (params_zero.k, params_zero.A):
        raise InvalidParams("the pair must share k and A")
    if region == "ring":
        ring = RingSpec.for_params(params_alpha)
        pts = [ring.inner, ring.outer]
    elif region == "support":
        pts = support_breakpoints(params_alpha)
    else:
        raise ValueError(f"unknown region {region!r}")

    def integrand(r):
        d = phi0_radial_gradient(params_alpha, profile, t, r) - phi0_radial_gradient(params_zero, profile, t, r)
        return float(abs(d)) ** 2

    return math.sqrt(radial_integral(integrand, pts))


def ode_pair_l2_difference(params_alpha: MoserParams, params_zero: MoserParams,
                           profile: CutoffProfile, t: float) -> float:
    """|Phi_0^alpha(t) - Phi_0^0(t)| in L^2 over the data support."""
    pts = support_breakpoints(params_alpha)

    def integrand(r):
        return float(abs(phi0_radial(params_alpha, profile, t, r) - phi0_radial(params_zero, profile, t, r))) ** 2

    return math.sqrt(radial_integral(integrand, pts))


def ring_bound_sides(params: MoserParams, epsilon: float, C: float = 1.0) -> tuple[float, float]:
    """Scales of the two-sided ring bound at t_k^eps, with the unspecified constant set to C.

    lower = eps e^{2a} e^{-Ca/k} e^{-Ca^2/k^2}, upper = (1+a/k)^3 (1/k + eps e^{2a} e^{Ca^2/k}).
    """
    k, al = params.k, params.alpha
    lower = epsilon * math.exp(2 * al - C * al / k - C * al**2 / k**2)
    upper = params.prefactor**3 * (1.0 / k + epsilon * math.exp(2 * al + C * al**2 / k))
    return lower, upper


def fit_ring_bound_constant(params_list, profile: CutoffProfile = QUINTIC, epsilon: float = 0.05) -> float:
    """Smallest C >= 0 for which both ring bound sides hold at t_k^eps for every params with alpha > 0."""
    C = 0.0
    for p in params_list:
        if p.alpha <= 0:
            continue
        k, al = p.k, p.alpha
        value = ring_grad_norm(p, profile, critical_time(k, epsilon))
        base = epsilon * math.exp(2 * al)
        if value < base:
            C = max(C, -math.log(value / base) / (al / k + al**2 / k**2))
        excess = value / p.prefactor**3 - 1.0 / k
        if excess > base:
            C = max(C, k / al**2 * math.log(excess / base))
    return C
