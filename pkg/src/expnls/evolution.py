"""Strang split-step pseudospectral evolution of i v_t + nu^2 Lap v = sigma f(v).

One step is linear(dt/2), then the exact nonlinear phase flow for dt, then
linear(dt/2). The state is kept in spectral space between steps, so a step
costs two FFTs plus one pointwise exponential.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import BlowupSuspected, ConfigInvalid, InvalidParams, OverflowRisk, RadiusOutOfBox
from .moser import CutoffProfile, MoserParams, QUINTIC, sample_initial_data
from .nonlinearity import DEFAULT_SAFETY, FOUR_PI, SafetyPolicy, K_eval, potential_energy
from .ode import critical_time, decoherence_lower_bound, ode_pair_separation
from .spectral import (
    ComplexField,
    GridSpec,
    _grad_sq_from_spectrum,
    _mass_sum,
    boundary_band_mass,
    fft2,
    ifft2,
    localized_mass,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvolveConfig:
    """Parameters of one run.

    ``linear_scale`` and ``nonlinear_scale`` multiply the Laplacian and the
    nonlinearity; they exist so tests can switch either flow off.
    A negative ``dt`` integrates backwards in time to ``-t_end``.
    """

    dt: float
    t_end: float
    nu_sq: float = 1.0
    sigma: int = 1
    record_every: int = 1
    dealias: str = "none"
    safety: SafetyPolicy = DEFAULT_SAFETY
    localized_mass_radii: tuple[float, ...] = ()
    stability_factor: float = 0.1
    override_stability: bool = False
    band_width: float | None = None
    leak_tolerance: float = 1e-8
    linear_scale: float = 1.0
    nonlinear_scale: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "localized_mass_radii", tuple(float(r) for r in self.localized_mass_radii))
        if not (math.isfinite(self.dt) and self.dt != 0):
            raise ConfigInvalid(f"dt must be finite and nonzero, got {self.dt}")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigInvalid(f"t_end must be positive, got {self.t_end}")
        if not self.nu_sq > 0:
            raise ConfigInvalid(f"nu_sq must be positive, got {self.nu_sq}")
        if self.sigma not in (1, -1):
            raise ConfigInvalid(f"sigma must be +1 or -1, got {self.sigma}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ConfigInvalid(f"record_every must be an integer >= 1, got {self.record_every}")
        if self.dealias not in ("none", "two_thirds"):
            raise ConfigInvalid(f"dealias must be 'none' or 'two_thirds', got {self.dealias!r}")
        if not self.stability_factor > 0:
            raise ConfigInvalid("stability_factor must be positive")
        if any(r <= 0 for r in self.localized_mass_radii):
            raise ConfigInvalid("localized mass radii must be positive")

    @property
    def n_steps(self) -> int:
        steps = self.t_end / abs(self.dt)
        n = int(round(steps))
        if n < 1 or abs(n - steps) > 1e-9 * max(1.0, steps):
            raise ConfigInvalid(f"t_end={self.t_end} is not an integer multiple of |dt|={abs(self.dt)}")
        return n


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    hamiltonian: float
    grad_l2: float
    l4_norm: float
    linf: float
    localized_mass: dict[float, float]
    boundary_band_mass: float


@dataclass
class EvolveResult:
    final: ComplexField
    series: list[DiagnosticsRecord]
    t_final: float
    blowup: BlowupSuspected | None = None
    leak_exceeded: bool = False

    @property
    def completed(self) -> bool:
        return self.blowup is None


def nonlinear_substep(
    field_in: ComplexField, tau: float, sigma: int = 1, safety: SafetyPolicy = DEFAULT_SAFETY
) -> ComplexField:
    """Exact flow of i u_t = sigma f(u) for time tau: u e^{-i sigma tau K(u)}."""
    K = K_eval(field_in.values, safety)
    return ComplexField(field_in.grid, field_in.values * np.exp(-1j * sigma * tau * K))


def linear_substep(field_in: ComplexField, tau: float, nu_sq: float = 1.0) -> ComplexField:
    """Exact flow of i u_t + nu^2 Lap u = 0 for time tau."""
    mult = np.exp(-1j * nu_sq * field_in.grid.kappa_sq * tau)
    return ComplexField(field_in.grid, ifft2(mult * fft2(field_in.values)))


def two_thirds_mask(grid: GridSpec) -> np.ndarray:
    k = np.abs(grid.wavenumbers)
    keep = k <= (2.0 / 3.0) * k.max()
    return keep[:, None] & keep[None, :]


def diagnostics(
    values: np.ndarray,
    spectrum: np.ndarray,
    grid: GridSpec,
    t: float,
    cfg: EvolveConfig,
) -> DiagnosticsRecord:
    fld = ComplexField(grid, values)
    grad_sq = _grad_sq_from_spectrum(spectrum, grid)
    rho = values.real**2 + values.imag**2
    pot = potential_energy(fld, cfg.safety)
    return DiagnosticsRecord(
        t=t,
        mass=_mass_sum(values, grid),
        hamiltonian=cfg.linear_scale * grad_sq + cfg.nonlinear_scale * pot,
        grad_l2=math.sqrt(grad_sq),
        l4_norm=(grid.cell_area * float(np.sum(rho * rho))) ** 0.25,
        linf=math.sqrt(float(rho.max())),
        localized_mass={R: localized_mass(fld, R) for R in cfg.localized_mass_radii},
        boundary_band_mass=boundary_band_mass(fld, cfg.band_width),
    )


def check_stability(u0: ComplexField, cfg: EvolveConfig) -> float:
    """Return dt * max K(u0) (scaled); raise ConfigInvalid when it exceeds the guard."""
    kmax = float(np.max(K_eval(u0.values, cfg.safety))) if u0.values.size else 0.0
    stiffness = abs(cfg.dt) * kmax * abs(cfg.nonlinear_scale)
    if stiffness > cfg.stability_factor and not cfg.override_stability:
        raise ConfigInvalid(
            f"dt * max K(u0) = {stiffness:.4g} exceeds stability factor {cfg.stability_factor}"
        )
    return stiffness


Observer = Callable[[int, float, np.ndarray], None]


def evolve(u0: ComplexField, cfg: EvolveConfig, observer: Observer | None = None) -> EvolveResult:
    """March u0 to t_end, recording diagnostics at t=0 and every ``record_every`` steps.

    ``observer(step, t, values)`` is called after every step with the physical
    samples (read-only use). On overflow or non-finite values the run stops and
    the result carries a BlowupSuspected marker and the last valid state.
    """
    grid = u0.grid
    L = grid.half_width
    for R in cfg.localized_mass_radii:
        if R >= L:
            raise RadiusOutOfBox(f"localized mass radius {R} must be below L = {L}")
    n_steps = cfg.n_steps
    check_stability(u0, cfg)

    dt = cfg.dt
    sign = 1.0 if dt > 0 else -1.0
    half = np.exp(-0.5j * dt * cfg.nu_sq * cfg.linear_scale * grid.kappa_sq)
    mask = two_thirds_mask(grid) if cfg.dealias == "two_thirds" else None
    phase_rate = -cfg.sigma * dt * cfg.nonlinear_scale
    cap = cfg.safety.max_exponent

    spec = fft2(u0.values)
    if mask is not None:
        spec *= mask
    values = ifft2(spec) if mask is not None else u0.values.copy()
    series = [diagnostics(values, spec, grid, 0.0, cfg)]
    mass0 = series[0].mass
    leak = series[0].boundary_band_mass > cfg.leak_tolerance * mass0
    t_last = 0.0
    blowup = None
    last_good = values

    rho = np.empty(values.shape)
    for step in range(1, n_steps + 1):
        spec *= half
        u = ifft2(spec)
        np.multiply(u.real, u.real, out=rho)
        rho += u.imag * u.imag
        rho *= FOUR_PI
        xmax = float(rho.max())
        if not (xmax <= cap):
            idx = np.unravel_index(int(np.nanargmax(np.where(np.isfinite(rho), rho, np.inf))), rho.shape)
            reason = "non-finite samples" if not math.isfinite(xmax) else f"exponent {xmax:.4g} > cap {cap}"
            blowup = BlowupSuspected(t_last, idx, reason)
            log.warning("%s", blowup)
            break
        np.expm1(rho, out=rho)
        rho *= phase_rate
        u *= np.exp(1j * rho)
        spec = fft2(u)
        if mask is not None:
            spec *= mask
        spec *= half
        t = sign * step * abs(dt)
        need_record = step % cfg.record_every == 0 or step == n_steps
        if observer is not None or need_record:
            values = ifft2(spec)
            if not np.isfinite(values).all():
                blowup = BlowupSuspected(t_last, None, "non-finite samples")
                break
            if need_record:
                try:
                    rec = diagnostics(values, spec, grid, t, cfg)
                except OverflowRisk as exc:
                    blowup = BlowupSuspected(t, exc.location, str(exc))
                    log.warning("%s", blowup)
                    break
            last_good = values
            if observer is not None:
                observer(step, t, values)
            if need_record:
                series.append(rec)
                if rec.boundary_band_mass > cfg.leak_tolerance * mass0:
                    leak = True
        t_last = t

    if blowup is None:
        last_good = ifft2(spec)
    if leak:
        log.warning("boundary band mass exceeded %.3g of total mass", cfg.leak_tolerance)
    return EvolveResult(ComplexField(grid, last_good), series, t_last, blowup, leak)


def _lookup_radius(rec: DiagnosticsRecord, R: float) -> float:
    for key, val in rec.localized_mass.items():
        if abs(key - R) <= 1e-12 * max(1.0, R):
            return val
    raise KeyError(f"radius {R} was not recorded; add it to localized_mass_radii")


@dataclass(frozen=True)
class NakanishiFit:
    violated: bool
    fitted_C: float


def nakanishi_check(series: Sequence[DiagnosticsRecord], u0: ComplexField, R: float, R_prime: float) -> NakanishiFit:
    """Minimal C with M_{R+R'}(t) >= M_R(u0) - C t / R' over the recorded times."""
    L = u0.grid.half_width
    if not (R > 0 and R_prime > 0 and R + R_prime < L):
        raise RadiusOutOfBox(f"need 0 < R, R' and R + R' < L = {L}; got {R}, {R_prime}")
    base = localized_mass(u0, R)
    C = 0.0
    violated = False
    for rec in series:
        deficit = base - _lookup_radius(rec, R + R_prime)
        if rec.t == 0.0:
            # B(R) lies inside B(R+R'); allow for summation rounding only.
            if deficit > 1e-12 * max(base, 1.0):
                violated = True
            continue
        C = max(C, R_prime * deficit / abs(rec.t))
    return NakanishiFit(violated, C)


@dataclass
class SupercriticalOutcome:
    """Result row of one (alpha, 0) pair experiment in the rescaled frame."""

    k: int
    alpha: float
    A: float
    epsilon: float
    n: int
    t_end: float
    steps: int
    pde_separation: float
    ode_separation: float
    ode_separation_ring: float
    ode_separation_grid: float
    residual_l2: float
    residual_grad: float
    residual_l2_zero: float
    residual_scale: float
    decoherence_bound: float

    @property
    def residual_ratio(self) -> float:
        return self.residual_l2 / self.residual_scale

    @property
    def separation_rel_error(self) -> float:
        return abs(self.pde_separation - self.ode_separation) / self.ode_separation


def supercritical_experiment(
    params_alpha: MoserParams,
    params_zero: MoserParams,
    profile: CutoffProfile = QUINTIC,
    n: int = 512,
    epsilon: float = 0.05,
    steps: int = 40,
    box_factor: float = 4.0,
    overrides: dict | None = None,
) -> SupercriticalOutcome:
    """Evolve v^alpha and v^0 in the rescaled frame to t_k^eps and compare with Phi_0.

    The PDE residual |v - Phi_0|_{L^2} is maximized over all steps. The ODE
    pair separation is computed over the full data support by radial
    quadrature, which is the quantity the grid gradient difference measures.
    """
    if (params_alpha.k, params_alpha.A) != (params_zero.k, params_zero.A):
        raise ConfigInvalid("the pair must share k and A")
    k, nu = params_alpha.k, params_alpha.nu
    grid = GridSpec(n, box_factor * nu)
    t_end = critical_time(k, epsilon)
    cfg = EvolveConfig(dt=t_end / steps, t_end=t_end, nu_sq=nu * nu, record_every=steps)
    if overrides:
        cfg = replace(cfg, **overrides)

    finals = {}
    residuals = {}
    grad_residual = 0.0
    for tag, params in (("alpha", params_alpha), ("zero", params_zero)):
        v0 = sample_initial_data(params, profile, grid, "rescaled_y")
        g0 = v0.values.real
        K0 = np.expm1(FOUR_PI * g0 * g0)
        worst = [0.0]

        def observe(step, t, values, g0=g0, K0=K0, worst=worst):
            diff = values - g0 * np.exp(-1j * cfg.sigma * t * K0)
            worst[0] = max(worst[0], math.sqrt(_mass_sum(diff, grid)))

        res = evolve(v0, cfg, observe)
        if res.blowup is not None:
            raise res.blowup
        finals[tag] = res.final.values
        residuals[tag] = worst[0]
        if tag == "alpha":
            phi_end = g0 * np.exp(-1j * cfg.sigma * t_end * K0)
            grad_residual = math.sqrt(_grad_sq_from_spectrum(fft2(res.final.values - phi_end), grid))

    def grad_norm(values):
        return math.sqrt(_grad_sq_from_spectrum(fft2(values), grid))

    g_a = sample_initial_data(params_alpha, profile, grid, "rescaled_y").values.real
    g_z = sample_initial_data(params_zero, profile, grid, "rescaled_y").values.real
    phi_a = g_a * np.exp(-1j * t_end * np.expm1(FOUR_PI * g_a * g_a))
    phi_z = g_z * np.exp(-1j * t_end * np.expm1(FOUR_PI * g_z * g_z))

    try:
        ring_separation = ode_pair_separation(params_alpha, params_zero, profile, t_end, region="ring")
    except InvalidParams:
        ring_separation = math.nan

    return SupercriticalOutcome(
        k=k,
        alpha=params_alpha.alpha,
        A=params_alpha.A,
        epsilon=epsilon,
        n=n,
        t_end=t_end,
        steps=steps,
        pde_separation=grad_norm(finals["alpha"] - finals["zero"]),
        ode_separation=ode_pair_separation(params_alpha, params_zero, profile, t_end, region="support"),
        ode_separation_ring=ring_separation,
        ode_separation_grid=grad_norm(phi_a - phi_z),
        residual_l2=residuals["alpha"],
        residual_grad=grad_residual,
        residual_l2_zero=residuals["zero"],
        residual_scale=math.exp(-k / 2.0) * nu**1.5,
        decoherence_bound=decoherence_lower_bound(params_alpha.alpha, epsilon),
    )


@dataclass(frozen=True)
class OrderStudy:
    dts: tuple[float, ...]
    errors: tuple[float, ...]
    pairwise_orders: tuple[float, ...]
    fitted_order: float


def convergence_order_study(u0: ComplexField, cfg: EvolveConfig, dts: Sequence[float],
                            reference_dt: float) -> OrderStudy:
    """Final-state L^2 error of each dt against a fine reference run of the same data.

    The fitted order is the least-squares slope of log(error) against log(dt).
    """
    def final(dt: float) -> np.ndarray:
        res = evolve(u0, replace(cfg, dt=dt, record_every=10**9))
        if res.blowup is not None:
            raise res.blowup
        return res.final.values

    ref = final(reference_dt)
    dts = tuple(sorted((float(d) for d in dts), reverse=True))
    errors = tuple(math.sqrt(_mass_sum(final(dt) - ref, u0.grid)) for dt in dts)
    pair = tuple(
        math.log(errors[i] / errors[i + 1]) / math.log(dts[i] / dts[i + 1]) for i in range(len(dts) - 1)
    )
    slope = float(np.polyfit(np.log(dts), np.log(errors), 1)[0])
    return OrderStudy(dts, errors, pair, slope)
