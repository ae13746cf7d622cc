"""Moser functions f_k, the smoothed and rescaled data g_{alpha,A,k}, and its energy terms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParams, RadiusOutOfBox, ResolutionTooCoarse
from .nonlinearity import DEFAULT_SAFETY, SafetyPolicy, hamiltonian, hamiltonian_density
from .quadrature import quad_segments, radial_integral
from .spectral import ComplexField, GridSpec

LOG2 = math.log(2.0)
MIN_ANNULUS_CELLS = 16


@dataclass(frozen=True)
class MoserParams:
    """The triple (k, alpha, A); rejects triples with nu outside (2e^{-k/2}, 1)."""

    k: int
    alpha: float = 0.0
    A: float = 1.0

    def __post_init__(self) -> None:
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 4:
            raise InvalidParams(f"k must be an integer >= 4, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise InvalidParams(f"alpha must be >= 0, got {self.alpha}")
        if not (math.isfinite(self.A) and self.A > 0):
            raise InvalidParams(f"A must be > 0, got {self.A}")
        if not 2.0 * self.plateau_radius < self.nu < 1.0:
            raise InvalidParams(
                f"nu={self.nu:.6g} must lie in (2e^(-k/2), 1) = ({2 * self.plateau_radius:.6g}, 1)"
            )

    @property
    def nu(self) -> float:
        return math.exp(-math.sqrt(self.k) / self.A)

    @property
    def prefactor(self) -> float:
        return 1.0 + self.alpha / self.k

    @property
    def plateau_radius(self) -> float:
        return math.exp(-self.k / 2.0)

    def with_alpha(self, alpha: float) -> "MoserParams":
        return MoserParams(self.k, alpha, self.A)


def _quintic(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def _quintic_prime(t):
    t = np.clip(t, 0.0, 1.0)
    return 30.0 * t * t * (1.0 - t) ** 2


def _bump_psi(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _smooth(t):
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    a, b = _bump_psi(t), _bump_psi(1.0 - t)
    return a / (a + b)


def _smooth_prime(t):
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    a, b = _bump_psi(t), _bump_psi(1.0 - t)
    with np.errstate(divide="ignore", invalid="ignore"):
        da = np.where(t > 0, a / np.where(t > 0, t * t, 1.0), 0.0)
        db = np.where(t < 1, b / np.where(t < 1, (1 - t) ** 2, 1.0), 0.0)
    return (da * b + a * db) / (a + b) ** 2


_STEPS: dict[str, tuple[Callable, Callable]] = {
    "quintic": (_quintic, _quintic_prime),
    "smooth": (_smooth, _smooth_prime),
}


@dataclass(frozen=True)
class CutoffProfile:
    """Transition step s on [0, 1] defining chi(tau) = s(2 tau - 3) and phi(r) = 1 - s(r - 1).

    ``quintic`` is 6t^5 - 15t^4 + 10t^3 (C^2); ``smooth`` is the C-infinity
    quotient of e^{-1/t} bumps.
    """

    name: str = "quintic"

    def __post_init__(self) -> None:
        if self.name not in _STEPS:
            raise InvalidParams(f"unknown profile {self.name!r}; choose from {sorted(_STEPS)}")

    def step(self, t):
        return _STEPS[self.name][0](t)

    def step_prime(self, t):
        return _STEPS[self.name][1](t)

    def chi(self, tau):
        return self.step(2.0 * np.asarray(tau, dtype=float) - 3.0)

    def chi_prime(self, tau):
        return 2.0 * self.step_prime(2.0 * np.asarray(tau, dtype=float) - 3.0)

    def phi(self, r):
        return 1.0 - self.step(np.asarray(r, dtype=float) - 1.0)

    def phi_prime(self, r):
        return -self.step_prime(np.asarray(r, dtype=float) - 1.0)


QUINTIC = CutoffProfile("quintic")


def f_k_eval(k: float, r):
    """Moser function: plateau sqrt(k/4pi), then -log r / sqrt(k pi), zero for r >= 1."""
    r = np.asarray(r, dtype=float)
    rp = math.exp(-k / 2.0)
    with np.errstate(divide="ignore"):
        logpart = -np.log(np.where(r > 0, r, 1.0)) / math.sqrt(k * math.pi)
    out = np.where(r >= 1.0, 0.0, np.where(r <= rp, math.sqrt(k / (4.0 * math.pi)), logpart))
    return out if out.ndim else float(out)


def f_k_prime(k: float, r):
    r = np.asarray(r, dtype=float)
    rp = math.exp(-k / 2.0)
    inside = (r > rp) & (r < 1.0)
    out = np.where(inside, -1.0 / (math.sqrt(k * math.pi) * np.where(inside, r, 1.0)), 0.0)
    return out if out.ndim else float(out)


def eta_k(k: float, r, profile: CutoffProfile = QUINTIC):
    e = math.exp(k / 2.0)
    r = np.asarray(r, dtype=float)
    return profile.chi(e * r) * profile.chi(e * (1.0 - r))


def eta_k_prime(k: float, r, profile: CutoffProfile = QUINTIC):
    e = math.exp(k / 2.0)
    r = np.asarray(r, dtype=float)
    a, b = e * r, e * (1.0 - r)
    return e * (profile.chi_prime(a) * profile.chi(b) - profile.chi(a) * profile.chi_prime(b))


def g_radial(params: MoserParams, profile: CutoffProfile, r):
    """g as a function of |y|."""
    r = np.asarray(r, dtype=float)
    out = params.prefactor * eta_k(params.k, r, profile) * f_k_eval(params.k, r) * profile.phi(r / params.nu)
    return out if out.ndim else float(out)


def g_radial_prime(params: MoserParams, profile: CutoffProfile, r):
    """Radial derivative of g."""
    r = np.asarray(r, dtype=float)
    k, nu = params.k, params.nu
    eta, deta = eta_k(k, r, profile), eta_k_prime(k, r, profile)
    f, df = f_k_eval(k, r), f_k_prime(k, r)
    ph, dph = profile.phi(r / nu), profile.phi_prime(r / nu) / nu
    out = params.prefactor * (deta * f * ph + eta * df * ph + eta * f * dph)
    return out if out.ndim else float(out)


def g_eval(params: MoserParams, profile: CutoffProfile, y):
    """g at a point (or array of points with a trailing axis of length 2)."""
    y = np.asarray(y, dtype=float)
    return g_radial(params, profile, np.hypot(y[..., 0], y[..., 1]))


def support_breakpoints(params: MoserParams) -> list[float]:
    """Radii where the radial profile of g changes formula, inner edge first."""
    e = params.plateau_radius
    pts = [1.5 * e, 2.0 * e, params.nu, 2.0 * params.nu]
    for p in (1.0 - 2.0 * e, 1.0 - 1.5 * e, 1.0):
        if pts[0] < p < pts[-1]:
            pts.append(p)
    return sorted(pts)


def sample_initial_data(
    params: MoserParams,
    profile: CutoffProfile,
    grid: GridSpec,
    frame: str = "rescaled_y",
) -> ComplexField:
    """Sample u(0,x) = g(nu x) (``physical_x``) or v(0,y) = g(y) (``rescaled_y``)."""
    nu = params.nu
    if frame == "physical_x":
        scale, support = nu, 2.0
        annulus = 1.0 - 2.0 * params.plateau_radius / nu
    elif frame == "rescaled_y":
        scale, support = 1.0, 2.0 * nu
        annulus = nu - 2.0 * params.plateau_radius
    else:
        raise ValueError(f"unknown frame {frame!r}")
    if grid.half_width < 2.0 * support:
        raise RadiusOutOfBox(
            f"{frame} data needs half-width >= {2 * support:.6g}, got {grid.half_width:.6g}"
        )
    cells = annulus / grid.spacing
    if cells < MIN_ANNULUS_CELLS:
        raise ResolutionTooCoarse(
            f"annulus [2e^(-k/2), nu] spans {cells:.3g} cells; need >= {MIN_ANNULUS_CELLS}"
        )
    vals = g_radial(params, profile, scale * grid.radius)
    return ComplexField(grid, vals.astype(complex))


@dataclass(frozen=True)
class HamiltonianTerms:
    """Closed forms and direct quadratures of the ring/annulus gradient terms.

    ``term_I`` is the printed closed form; ``term_I_exact`` is the exact
    (1+a/k)^2 (1 - 2/(A sqrt k) - 2 log2 / k), which differs by O(alpha^2/k^2).
    """

    term_I: float
    term_I_exact: float
    term_I_quadrature: float
    term_a: float
    term_a_quadrature: float
    term_b: float
    term_b_lower: float
    term_b_upper: float
    term_c: float
    term_c_quadrature: float
    term_II_quadrature: float
    C1: float
    a: float
    b: float
    phi_sq_over_r: float


def profile_constants(profile: CutoffProfile, rtol: float = 1e-12) -> dict[str, float]:
    """Profile integrals: C1 = |grad phi|^2, a, b and int_1^2 phi^2/r dr."""

    def q(fn):
        return quad_segments(fn, [1.0, 2.0], rtol)

    C1 = 2.0 * math.pi * q(lambda r: float(profile.phi_prime(r)) ** 2 * r)
    a = 4.0 * math.pi * q(lambda r: math.log(r) * float(profile.phi(r) * profile.phi_prime(r)))
    b = 4.0 * math.pi * q(lambda r: float(profile.phi(r) * profile.phi_prime(r)))
    phi_sq = q(lambda r: float(profile.phi(r)) ** 2 / r)
    return {"C1": C1, "a": a, "b": b, "phi_sq_over_r": phi_sq}


def term_I_closed_form(params: MoserParams) -> float:
    k, al, A = params.k, params.alpha, params.A
    sk = math.sqrt(k)
    return 1.0 - 2.0 / (A * sk) + 2.0 * (al - LOG2) / k - 4.0 * al / (A * k * sk) - 4.0 * al * LOG2 / k**2


def hamiltonian_terms(params: MoserParams, profile: CutoffProfile = QUINTIC) -> HamiltonianTerms:
    """Evaluate the decomposition of |grad g|^2 over {2e^{-k/2} <= |y| <= nu} and {nu <= |y| <= 2nu}."""
    k, A, nu = params.k, params.A, params.nu
    e = params.plateau_radius
    if 2.0 * nu > 1.0 - 2.0 * e:
        raise InvalidParams("term formulas need 2 nu <= 1 - 2e^(-k/2)")
    c2 = params.prefactor**2
    sk = math.sqrt(k)
    consts = profile_constants(profile)
    C1, a, b = consts["C1"], consts["a"], consts["b"]

    def fprime_sq(r):
        return float(f_k_prime(k, r)) ** 2

    term_I_quad = c2 * radial_integral(fprime_sq, [2.0 * e, nu])
    term_I_exact = c2 * (1.0 - 2.0 / (A * sk) - 2.0 * LOG2 / k)

    outer = [nu, 2.0 * nu]
    term_a_quad = c2 * radial_integral(lambda r: fprime_sq(r) * float(profile.phi(r / nu)) ** 2, outer)
    term_b_quad = c2 / nu**2 * radial_integral(
        lambda r: float(f_k_eval(k, r)) ** 2 * float(profile.phi_prime(r / nu)) ** 2, outer
    )
    term_c_quad = 2.0 * c2 / nu * radial_integral(
        lambda r: float(f_k_eval(k, r) * f_k_prime(k, r) * profile.phi(r / nu) * profile.phi_prime(r / nu)),
        outer,
    )
    term_II_quad = radial_integral(lambda r: float(g_radial_prime(params, profile, r)) ** 2, outer)

    return HamiltonianTerms(
        term_I=term_I_closed_form(params),
        term_I_exact=term_I_exact,
        term_I_quadrature=term_I_quad,
        term_a=2.0 / k * c2 * consts["phi_sq_over_r"],
        term_a_quadrature=term_a_quad,
        term_b=term_b_quad,
        term_b_lower=c2 * (C1 / (math.pi * A**2) - 2.0 * LOG2 * C1 / (math.pi * A * sk) + C1 * LOG2**2 / (math.pi * k)),
        term_b_upper=c2 * C1 / (math.pi * A**2),
        term_c=c2 * (a / (math.pi * k) - b / (math.pi * A * sk)),
        term_c_quadrature=term_c_quad,
        term_II_quadrature=term_II_quad,
        C1=C1,
        a=a,
        b=b,
        phi_sq_over_r=consts["phi_sq_over_r"],
    )


def radial_hamiltonian(
    params: MoserParams,
    profile: CutoffProfile = QUINTIC,
    safety: SafetyPolicy = DEFAULT_SAFETY,
) -> tuple[float, float]:
    """(|grad g|^2, int G(g) dy) by radial quadrature; H(g(nu .)) = first + second / nu^2."""
    pts = support_breakpoints(params)
    grad = radial_integral(lambda r: float(g_radial_prime(params, profile, r)) ** 2, pts)
    pot = radial_integral(lambda r: float(hamiltonian_density(g_radial(params, profile, r), safety)), pts)
    return grad, pot


def supercriticality_margin(
    params: MoserParams,
    profile: CutoffProfile = QUINTIC,
    grid: GridSpec | None = None,
    safety: SafetyPolicy = DEFAULT_SAFETY,
) -> float:
    """H(u(0, .)) - 1 for u(0, x) = g(nu x).

    With ``grid`` the data are sampled in the physical frame and the discrete
    Hamiltonian is used; without it the value comes from radial quadrature,
    which is the only feasible route once e^{-k/2}/nu falls below the grid
    spacing.
    """
    if grid is None:
        grad, pot = radial_hamiltonian(params, profile, safety)
        return grad + pot / params.nu**2 - 1.0
    u = sample_initial_data(params, profile, grid, "physical_x")
    return hamiltonian(u, safety) - 1.0


def moser_grad_norm_sq(k: float) -> float:
    """|grad f_k|^2 by radial quadrature over [e^{-k/2}, 1]."""
    return radial_integral(lambda r: float(f_k_prime(k, r)) ** 2, [math.exp(-k / 2.0), 1.0])


def moser_field(k: float, grid: GridSpec) -> ComplexField:
    return ComplexField(grid, f_k_eval(k, grid.radius).astype(complex))
