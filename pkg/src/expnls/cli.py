"""Command-line entry point: ``expnls <command> --config cfg.json [--out DIR] [--workers N] [--seed S]``.

Exit codes: 0 success, 2 configuration error, 3 numerical guard tripped,
4 at least one verdict failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import checkpoint
from .constants import constant
from .data import gaussian_amplitude_for_hamiltonian, gaussian_field
from .errors import BlowupSuspected, ConfigInvalid, ExpNLSError, InvalidParams, OverflowRisk, QuadratureFailure
from .evolution import EvolveConfig, convergence_order_study, evolve, nakanishi_check, supercritical_experiment
from .inequalities import log_estimate_family_sup, mt_ratio_scan
from .moser import CutoffProfile, MoserParams, g_radial, radial_hamiltonian, sample_initial_data, support_breakpoints
from .nonlinearity import SafetyPolicy, classify_regime, hamiltonian, mass
from .quadrature import radial_integral
from .report import ExperimentReport, Verdict, diagnostics_table, emit
from .spectral import ComplexField, GridSpec, grad_l2_norm

log = logging.getLogger("expnls")

EXIT_OK, EXIT_CONFIG, EXIT_GUARD, EXIT_VERDICT = 0, 2, 3, 4


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridConfig(Strict):
    n: int = 256
    L: float = 12.0


class SafetyConfig(Strict):
    max_exponent: float = 600.0
    small_arg_cutoff: float = 1e-3

    def policy(self) -> SafetyPolicy:
        return SafetyPolicy(self.max_exponent, self.small_arg_cutoff)


class DataConfig(Strict):
    kind: Literal["gaussian", "moser", "zero", "checkpoint"] = "gaussian"
    amplitude: float | None = None
    target_hamiltonian: float | None = None
    width: float = 1.0
    k: int = 16
    alpha: float = 0.0
    A: float = 1.0
    profile: Literal["quintic", "smooth"] = "quintic"
    frame: Literal["physical_x", "rescaled_y"] = "physical_x"
    path: str | None = None


class EvolveSection(Strict):
    dt: float = 1e-4
    t_end: float = 1.0
    nu_sq: float = 1.0
    sigma: Literal[1, -1] = 1
    record_every: int = 100
    dealias: Literal["none", "two_thirds"] = "none"
    localized_mass_radii: list[float] = Field(default_factory=list)
    stability_factor: float = 0.1
    override_stability: bool = False
    band_width: float | None = None
    leak_tolerance: float = 1e-8
    linear_scale: float = 1.0
    nonlinear_scale: float = 1.0

    def build(self, safety: SafetyPolicy) -> EvolveConfig:
        d = self.model_dump()
        d["localized_mass_radii"] = tuple(d["localized_mass_radii"])
        return EvolveConfig(safety=safety, **d)


class OrderStudyConfig(Strict):
    dts: list[float] = Field(default_factory=lambda: [4e-4, 2e-4, 1e-4])
    reference_dt: float = 2.5e-5
    target_order: float = 2.0
    tolerance: float = 0.2


class Tolerances(Strict):
    mass_drift: float = 1e-10
    hamiltonian_drift: float = 1e-6
    gradient_slack: float = 1e-4


class ClassifyConfig(Strict):
    data: DataConfig = Field(default_factory=DataConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    safety: SafetyConfig = Field(default_factory=SafetyConfig)
    tol_crit: float = 1e-9
    moser_by_quadrature: bool = True


class EvolveCommandConfig(Strict):
    data: DataConfig = Field(default_factory=DataConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    safety: SafetyConfig = Field(default_factory=SafetyConfig)
    evolve: EvolveSection = Field(default_factory=EvolveSection)
    order_study: OrderStudyConfig | None = None
    tolerances: Tolerances = Field(default_factory=Tolerances)
    checkpoint: bool = False


class SupercriticalConfig(Strict):
    k_list: list[int] = Field(default_factory=lambda: [9, 12, 16])
    alpha: float = 1.0
    A: float = 1.0
    epsilon: float = 0.05
    n: int = 512
    steps: int = 40
    box_factor: float = 4.0
    profile: Literal["quintic", "smooth"] = "quintic"
    residual_band: float = 5.0
    separation_rel_tol: float = 0.25
    separation_k_list: list[int] = Field(default_factory=lambda: [9, 12])


class LogEstimateConfig(Strict):
    n: int = 128
    L: float = 16.0
    n_fields: int = 50
    lam: float = 1.0 / math.pi + 0.01
    beta: float = 0.5
    mu: float = 1.0


class InequalitiesConfig(Strict):
    k_list: list[float] = Field(default_factory=lambda: list(range(20, 65, 5)))
    alpha_exp: float = 4.0 * math.pi
    band: list[float] = Field(default_factory=lambda: [0.8 * 2 * math.pi, 1.2 * 2 * math.pi])
    cap_k_list: list[float] = Field(default_factory=lambda: list(range(10, 65, 5)))
    cap_alpha_exp: float = 2.0 * math.pi
    log_estimate: LogEstimateConfig = Field(default_factory=LogEstimateConfig)


class NakanishiConfig(Strict):
    data: DataConfig = Field(default_factory=lambda: DataConfig(target_hamiltonian=0.5))
    grid: GridConfig = Field(default_factory=GridConfig)
    safety: SafetyConfig = Field(default_factory=SafetyConfig)
    evolve: EvolveSection = Field(default_factory=lambda: EvolveSection(localized_mass_radii=[4, 5, 6, 7]))
    pairs: list[tuple[float, float]] = Field(default_factory=lambda: [(2, 2), (2, 4), (3, 2), (3, 4)])
    stability_tol: float = 0.2


def build_data(cfg: DataConfig, grid: GridSpec, safety: SafetyPolicy) -> ComplexField:
    if cfg.kind == "zero":
        return grid.zeros()
    if cfg.kind == "gaussian":
        if cfg.amplitude is not None and cfg.target_hamiltonian is not None:
            raise ConfigInvalid("give either amplitude or target_hamiltonian, not both")
        if cfg.target_hamiltonian is not None:
            amp = gaussian_amplitude_for_hamiltonian(grid, cfg.target_hamiltonian, cfg.width, safety)
        else:
            amp = 0.3 if cfg.amplitude is None else cfg.amplitude
        return gaussian_field(grid, amp, cfg.width)
    if cfg.kind == "moser":
        params = MoserParams(cfg.k, cfg.alpha, cfg.A)
        return sample_initial_data(params, CutoffProfile(cfg.profile), grid, cfg.frame)
    if cfg.path is None:
        raise ConfigInvalid("checkpoint data needs a path")
    field, _ = checkpoint.read_checkpoint(cfg.path)
    return field


def _grid(cfg: GridConfig) -> GridSpec:
    return GridSpec(cfg.n, cfg.L)


def cmd_classify(cfg: ClassifyConfig, seed: int, workers: int) -> ExperimentReport:
    safety = cfg.safety.policy()
    if cfg.data.kind == "moser" and cfg.moser_by_quadrature:
        # Physical frame u(x) = g(nu x): the gradient norm is dilation invariant, mass scales by nu^-2.
        params = MoserParams(cfg.data.k, cfg.data.alpha, cfg.data.A)
        profile = CutoffProfile(cfg.data.profile)
        grad_sq, pot = radial_hamiltonian(params, profile, safety)
        nu2 = params.nu**2
        H = grad_sq + pot / nu2
        M = radial_integral(lambda r: float(g_radial(params, profile, r)) ** 2, support_breakpoints(params)) / nu2
        grad = math.sqrt(grad_sq)
    else:
        u0 = build_data(cfg.data, _grid(cfg.grid), safety)
        M, H, grad = mass(u0), hamiltonian(u0, safety), grad_l2_norm(u0)
    label = classify_regime(H, cfg.tol_crit)
    print(f"M = {M:.12g}\nH = {H:.12g}\n|grad u0| = {grad:.12g}\nregime = {label.kind.value} (margin {label.margin:+.6g})")
    return ExperimentReport(
        "classify", {}, ["mass", "hamiltonian", "grad_l2", "margin"], [[M, H, grad, label.margin]],
        summary={"regime": label.kind.value, "margin": label.margin},
    )


def cmd_evolve(cfg: EvolveCommandConfig, seed: int, workers: int, out: Path | None = None) -> ExperimentReport:
    safety = cfg.safety.policy()
    u0 = build_data(cfg.data, _grid(cfg.grid), safety)
    ecfg = cfg.evolve.build(safety)
    res = evolve(u0, ecfg)
    columns, rows = diagnostics_table(res.series)
    s0, s1 = res.series[0], res.series[-1]
    mass_drift = max(abs(r.mass - s0.mass) for r in res.series) / max(s0.mass, 1e-300)
    ham_drift = max(abs(r.hamiltonian - s0.hamiltonian) for r in res.series) / max(s0.hamiltonian, 1e-300)
    tol = cfg.tolerances
    verdicts = [
        Verdict("mass_drift", "mass conservation", mass_drift <= tol.mass_drift,
                f"{mass_drift:.3e} <= {tol.mass_drift:g}"),
        Verdict("hamiltonian_drift", "Hamiltonian conservation", ham_drift <= tol.hamiltonian_drift,
                f"{ham_drift:.3e} <= {tol.hamiltonian_drift:g}"),
    ]
    if s0.hamiltonian < 1.0:
        gmax = max(r.grad_l2 for r in res.series)
        bound = math.sqrt(s0.hamiltonian) + tol.gradient_slack
        verdicts.append(Verdict("gradient_bound", "subcritical gradient bound", gmax <= bound,
                                f"max |grad u| = {gmax:.9g} <= {bound:.9g}"))
    summary: dict[str, Any] = {
        "t_final": res.t_final, "mass_drift": mass_drift, "hamiltonian_drift": ham_drift,
        "leak_exceeded": res.leak_exceeded, "blowup": None if res.blowup is None else str(res.blowup),
    }
    if cfg.order_study is not None:
        os_cfg = cfg.order_study
        study = convergence_order_study(u0, ecfg, os_cfg.dts, os_cfg.reference_dt)
        ok = abs(study.fitted_order - os_cfg.target_order) <= os_cfg.tolerance
        summary["order_study"] = {"dts": study.dts, "errors": study.errors,
                                  "pairwise_orders": study.pairwise_orders, "fitted_order": study.fitted_order}
        verdicts.append(Verdict("splitting_order", "Strang order", ok,
                                f"fitted order {study.fitted_order:.4f} vs {os_cfg.target_order} +- {os_cfg.tolerance}"))
    report = ExperimentReport("evolve", {}, columns, rows, verdicts, summary)
    if cfg.checkpoint and out is not None:
        out.mkdir(parents=True, exist_ok=True)
        ck = checkpoint.write_checkpoint(out / "final.ckpt", res.final, res.t_final, ecfg.nu_sq,
                                         {"config": cfg.model_dump(mode="json"), "seed": seed})
        report.artifacts += [str(ck), str(checkpoint.sidecar_path(ck))]
    if res.blowup is not None:
        report.summary["guard"] = str(res.blowup)
    return report


def _supercritical_point(args: tuple[int, float, float, float, int, int, float, str]):
    k, alpha, A, eps, n, steps, box, profile = args
    p = MoserParams(k, alpha, A)
    return supercritical_experiment(p, p.with_alpha(0.0), CutoffProfile(profile), n, eps, steps, box)


def cmd_supercritical(cfg: SupercriticalConfig, seed: int, workers: int) -> ExperimentReport:
    jobs = [(k, cfg.alpha, cfg.A, cfg.epsilon, cfg.n, cfg.steps, cfg.box_factor, cfg.profile)
            for k in sorted(set(cfg.k_list))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_supercritical_point, jobs))
    else:
        outcomes = [_supercritical_point(j) for j in jobs]
    outcomes.sort(key=lambda o: o.k)
    c0 = constant("decoherence_c0")
    columns = ["k", "t_end [time]", "pde_separation", "ode_separation", "ode_separation_ring",
               "residual_l2", "residual_grad", "residual_scale", "residual_ratio", "decoherence_bound"]
    rows = [[o.k, o.t_end, o.pde_separation, o.ode_separation, o.ode_separation_ring, o.residual_l2,
             o.residual_grad, o.residual_scale, o.residual_ratio, o.decoherence_bound] for o in outcomes]
    verdicts = []
    res = [o.residual_l2 for o in outcomes]
    if len(res) > 1:
        dec = all(b < a for a, b in zip(res, res[1:]))
        ratios = [o.residual_ratio for o in outcomes]
        band = max(ratios) / min(ratios) if min(ratios) > 0 else math.inf
        verdicts.append(Verdict("residual_decreasing", "residual trend", dec,
                                "residuals " + ", ".join(f"{r:.3e}" for r in res)))
        verdicts.append(Verdict("residual_band", "residual ratio band", band <= cfg.residual_band,
                                f"max/min ratio {band:.3f} <= {cfg.residual_band}"))
    if cfg.alpha > 0:
        for o in outcomes:
            if o.k not in cfg.separation_k_list:
                continue
            ok = o.separation_rel_error <= cfg.separation_rel_tol and o.pde_separation >= c0 * o.decoherence_bound
            verdicts.append(Verdict(f"separation_k{o.k}", "instability shadow", ok,
                                    f"PDE {o.pde_separation:.6g} vs ODE {o.ode_separation:.6g}, "
                                    f"floor {c0 * o.decoherence_bound:.4g}"))
    return ExperimentReport("supercritical", {}, columns, rows, verdicts)


def cmd_inequalities(cfg: InequalitiesConfig, seed: int, workers: int) -> ExperimentReport:
    scan = mt_ratio_scan(cfg.k_list, cfg.alpha_exp)
    caps = mt_ratio_scan(cfg.cap_k_list, cfg.cap_alpha_exp)
    columns = ["k", "mt_ratio", "mt_ratio_over_k", "functional", "l2_sq"]
    rows = [[r.k, r.ratio, r.ratio / r.k, r.functional, r.l2_sq] for r in scan]
    inc = all(b.ratio > a.ratio for a, b in zip(scan, scan[1:]))
    last = scan[-1].ratio / scan[-1].k
    lo, hi = cfg.band
    cap = constant("mt_cap_alpha_2pi")
    cap_max = max(r.ratio for r in caps)
    le = cfg.log_estimate
    sup = log_estimate_family_sup(GridSpec(le.n, le.L), le.n_fields, seed, le.lam, le.mu, le.beta)
    frozen = constant("log_estimate_C_lambda")
    verdicts = [
        Verdict("mt_increasing", "MT ratio increasing", inc, ""),
        Verdict("mt_band", "ratio/k band at largest k", lo <= last <= hi,
                f"ratio/k = {last:.5g} in [{lo:.5g}, {hi:.5g}]"),
        Verdict("mt_cap", "bounded ratio below 4 pi", cap_max <= cap, f"{cap_max:.5g} <= {cap}"),
        Verdict("log_estimate_family", "empirical C_lambda",
                math.isfinite(sup) and abs(sup - frozen) <= 0.1 * abs(frozen),
                f"sup {sup:.5g} vs frozen {frozen} (+-10%)"),
    ]
    return ExperimentReport("inequalities", {}, columns, rows, verdicts,
                            {"log_estimate_sup": sup, "cap_scan_max": cap_max})


def cmd_nakanishi(cfg: NakanishiConfig, seed: int, workers: int) -> ExperimentReport:
    safety = cfg.safety.policy()
    u0 = build_data(cfg.data, _grid(cfg.grid), safety)
    needed = sorted({float(R + Rp) for R, Rp in cfg.pairs} | set(cfg.evolve.localized_mass_radii))
    ecfg = cfg.evolve.model_copy(update={"localized_mass_radii": needed}).build(safety)
    res = evolve(u0, ecfg)
    columns = ["R", "R_prime", "fitted_C", "violated_at_t0"]
    fits = {(R, Rp): nakanishi_check(res.series, u0, R, Rp) for R, Rp in cfg.pairs}
    rows = [[R, Rp, f.fitted_C, int(f.violated)] for (R, Rp), f in sorted(fits.items())]
    cs = [f.fitted_C for f in fits.values()]
    mean = sum(cs) / len(cs)
    stable = all(math.isfinite(c) for c in cs) and mean > 0 and all(abs(c - mean) <= cfg.stability_tol * mean for c in cs)
    verdicts = [
        Verdict("no_violation_t0", "t=0 inequality", not any(f.violated for f in fits.values())),
        Verdict("fitted_C_stable", "C(E) stability", stable,
                "C = " + ", ".join(f"{c:.4g}" for c in cs) + f"; tolerance {cfg.stability_tol:.0%} of mean"),
    ]
    return ExperimentReport("nakanishi", {}, columns, rows, verdicts, {"leak_exceeded": res.leak_exceeded})


COMMANDS = {
    "classify": (ClassifyConfig, cmd_classify),
    "evolve": (EvolveCommandConfig, cmd_evolve),
    "supercritical": (SupercriticalConfig, cmd_supercritical),
    "inequalities": (InequalitiesConfig, cmd_inequalities),
    "nakanishi": (NakanishiConfig, cmd_nakanishi),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="expnls", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", type=Path, help="JSON configuration (defaults used when omitted)")
    ap.add_argument("--out", type=Path, default=None, help="output directory for CSV/JSON artifacts")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def run(argv: list[str] | None = None) -> tuple[int, ExperimentReport | None]:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    model, fn = COMMANDS[args.command]
    try:
        raw = json.loads(args.config.read_text()) if args.config else {}
        cfg = model.model_validate(raw)
        if args.workers < 1:
            raise ConfigInvalid("--workers must be >= 1")
    except (OSError, json.JSONDecodeError, ValidationError, ConfigInvalid) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG, None

    t0 = time.perf_counter()
    try:
        if args.command == "evolve":
            report = fn(cfg, args.seed, args.workers, args.out)
        else:
            report = fn(cfg, args.seed, args.workers)
    except (OverflowRisk, BlowupSuspected, QuadratureFailure) as exc:
        print(f"numerical guard tripped: {exc}", file=sys.stderr)
        return EXIT_GUARD, None
    except (ConfigInvalid, InvalidParams, ExpNLSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG, None
    report.config = {"command": args.command, "seed": args.seed, "config": cfg.model_dump(mode="json")}
    report.wall_clock_s = time.perf_counter() - t0
    if args.out is not None:
        emit(report, args.out)
    for v in report.verdicts:
        print(f"{'PASS' if v.passed else 'FAIL'}  {v.name}: {v.detail}  [{v.criterion}]")
    if "guard" in report.summary:
        print(f"numerical guard tripped: {report.summary['guard']}", file=sys.stderr)
        return EXIT_GUARD, report
    return (EXIT_OK if report.passed else EXIT_VERDICT), report


def main(argv: list[str] | None = None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
