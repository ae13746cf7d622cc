from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from expnls.constants import constant
from expnls.errors import InvalidParams, RadiusOutOfBox, ResolutionTooCoarse
from expnls.moser import (
    LOG2,
    QUINTIC,
    CutoffProfile,
    MoserParams,
    eta_k,
    eta_k_prime,
    f_k_eval,
    f_k_prime,
    g_eval,
    g_radial,
    g_radial_prime,
    hamiltonian_terms,
    moser_field,
    moser_grad_norm_sq,
    profile_constants,
    sample_initial_data,
    supercriticality_margin,
    term_I_closed_form,
)
from expnls.spectral import GridSpec, grad_l2_norm, l2_norm

PROFILES = [QUINTIC, CutoffProfile("smooth")]


class TestParams:
    @pytest.mark.parametrize("k", [3, 4.5, True, -1])
    def test_bad_k(self, k):
        with pytest.raises(InvalidParams):
            MoserParams(k)

    def test_nu_window(self):
        # A large enough that nu -> 1 is excluded, tiny A drives nu below 2e^{-k/2}.
        with pytest.raises(InvalidParams):
            MoserParams(16, 0.0, 0.01)
        with pytest.raises(InvalidParams):
            MoserParams(16, -1.0)
        p = MoserParams(16, 1.0, 1.0)
        assert p.nu == pytest.approx(math.exp(-4.0))
        assert 2 * p.plateau_radius < p.nu < 1

    def test_unknown_profile(self):
        with pytest.raises(InvalidParams):
            CutoffProfile("cubic")


class TestProfiles:
    @pytest.mark.parametrize("profile", PROFILES)
    def test_chi_phi_ranges(self, profile):
        tau = np.linspace(0, 3, 3001)
        chi = profile.chi(tau)
        assert np.all((chi >= 0) & (chi <= 1))
        assert np.all(chi[tau <= 1.5] == 0) and np.all(chi[tau >= 2] == 1)
        r = np.linspace(0, 3, 3001)
        phi = profile.phi(r)
        assert np.all((phi >= 0) & (phi <= 1))
        assert np.all(phi[r <= 1] == 1) and np.all(phi[r >= 2] == 0)

    @pytest.mark.parametrize("profile", PROFILES)
    def test_derivatives_match_finite_differences(self, profile):
        t = np.linspace(0.05, 0.95, 19)
        h = 1e-6
        fd = (profile.step(t + h) - profile.step(t - h)) / (2 * h)
        assert np.allclose(profile.step_prime(t), fd, rtol=1e-6, atol=1e-8)

    def test_quintic_is_c2_at_ends(self):
        h = 1e-4
        for t0 in (0.0, 1.0):
            second = (QUINTIC.step_prime(t0 + h) - QUINTIC.step_prime(t0 - h)) / (2 * h)
            assert abs(second) <= 20 * h


class TestMoserFunction:
    @pytest.mark.parametrize("k", [9, 16, 25])
    def test_boundary_and_plateau(self, k):
        assert f_k_eval(k, 1.0) == 0.0
        assert f_k_eval(k, math.exp(-k / 2)) == pytest.approx(math.sqrt(k / (4 * math.pi)), rel=1e-14)

    def test_k16_plateau_value(self):
        assert f_k_eval(16, math.exp(-8)) == pytest.approx(1.128379, abs=1e-6)

    @pytest.mark.parametrize("k", [9, 16, 25, 36])
    def test_unit_gradient_norm(self, k):
        assert abs(moser_grad_norm_sq(k) - 1.0) <= 1e-10

    @pytest.mark.parametrize("k", [9, 16])
    def test_gradient_norm_independent_oracle(self, k):
        # Oracle: 2 pi int (1/(k pi r^2)) r dr over [e^{-k/2}, 1] in plain scipy.
        val = 2 * math.pi * quad(lambda r: r / (k * math.pi * r * r), math.exp(-k / 2), 1, epsabs=0, epsrel=1e-13,
                                 limit=500, points=[math.exp(-k / 4)])[0]
        assert val == pytest.approx(moser_grad_norm_sq(k), rel=1e-10)

    def test_grid_gradient_norm_k9(self):
        u = moser_field(9, GridSpec(2048, 1.5))
        assert abs(grad_l2_norm(u) ** 2 - 1.0) <= 1e-2

    def test_derivative(self):
        r = np.array([0.01, 0.3, 0.9])
        h = 1e-7
        fd = (f_k_eval(9, r + h) - f_k_eval(9, r - h)) / (2 * h)
        assert np.allclose(f_k_prime(9, r), fd, rtol=1e-6)


class TestG:
    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
    def test_vanishes_outside_2nu(self, alpha):
        p = MoserParams(16, alpha, 1.0)
        assert g_eval(p, QUINTIC, [3 * p.nu, 0.0]) == 0.0
        assert g_radial(p, QUINTIC, 2 * p.nu) == 0.0

    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_midpoint_uses_log_profile(self, alpha):
        p = MoserParams(16, alpha, 1.0)
        r = (p.nu + 2 * p.plateau_radius) / 2
        expected = (1 + alpha / 16) * (-math.log(r)) / math.sqrt(16 * math.pi)
        assert g_eval(p, QUINTIC, np.array([0.0, r])) == pytest.approx(expected, rel=1e-14)

    def test_value_at_nu(self):
        # nu = e^{-4} for k=16, A=1; the value 0.2821 belongs to f_16 at e^{-2}.
        p = MoserParams(16, 0.0, 1.0)
        assert g_radial(p, QUINTIC, p.nu) == pytest.approx(4 / math.sqrt(16 * math.pi), rel=1e-14)
        assert f_k_eval(16, math.exp(-2)) == pytest.approx(2 / math.sqrt(16 * math.pi), rel=1e-14)
        assert f_k_eval(16, math.exp(-2)) == pytest.approx(0.2821, abs=1e-4)

    @pytest.mark.parametrize("profile", PROFILES)
    @pytest.mark.parametrize("k", [9, 16])
    def test_nonincreasing_outside_plateau(self, profile, k):
        p = MoserParams(k, 1.0, 1.0)
        r = np.geomspace(2 * p.plateau_radius, 3 * p.nu, 20001)
        assert np.all(np.diff(g_radial(p, profile, r)) <= 1e-15)

    def test_derivative_matches_finite_differences(self):
        p = MoserParams(9, 1.0, 1.0)
        r = np.array([1.7 * p.plateau_radius, 0.5 * p.nu, 1.4 * p.nu])
        h = 1e-9
        fd = (g_radial(p, QUINTIC, r + h) - g_radial(p, QUINTIC, r - h)) / (2 * h)
        assert np.allclose(g_radial_prime(p, QUINTIC, r), fd, rtol=1e-5)

    @pytest.mark.parametrize("k", [9, 16, 25])
    def test_eta_derivative_bound(self, k):
        e = math.exp(-k / 2)
        r = np.concatenate([np.linspace(0, 3 * e, 20001), np.linspace(1 - 3 * e, 1, 20001)])
        # Quintic step: max s' = 15/8, so max |eta'| = 2 * 15/8 * e^{k/2}.
        peak = np.max(np.abs(eta_k_prime(k, r)))
        assert peak <= 3.75 * math.exp(k / 2) * (1 + 1e-12)
        assert peak >= 3.75 * math.exp(k / 2) * (1 - 1e-6)
        assert np.all(eta_k(k, np.linspace(2.001 * e, 1 - 2.001 * e, 101)) == 1.0)


class TestSampling:
    def test_physical_frame_support(self):
        p = MoserParams(9, 1.0, 1.0)
        g = GridSpec(256, 4.0)
        u = sample_initial_data(p, QUINTIC, g, "physical_x")
        assert np.all(u.values[g.radius > 2.0] == 0)

    def test_box_too_small(self):
        p = MoserParams(9, 1.0, 1.0)
        with pytest.raises(RadiusOutOfBox):
            sample_initial_data(p, QUINTIC, GridSpec(256, 3.0), "physical_x")

    def test_too_coarse(self):
        p = MoserParams(9, 1.0, 1.0)
        with pytest.raises(ResolutionTooCoarse):
            sample_initial_data(p, QUINTIC, GridSpec(16, 4 * p.nu), "rescaled_y")

    def test_unknown_frame(self):
        with pytest.raises(ValueError):
            sample_initial_data(MoserParams(9), QUINTIC, GridSpec(256, 4.0), "polar")

    def test_rescaled_mass_against_quadrature(self):
        p = MoserParams(9, 1.0, 1.0)
        g = GridSpec(512, 4 * p.nu)
        u = sample_initial_data(p, QUINTIC, g, "rescaled_y")
        pts = [1.5 * p.plateau_radius, 2 * p.plateau_radius, p.nu, 2 * p.nu]
        oracle = sum(
            2 * math.pi * quad(lambda r: g_radial(p, QUINTIC, r) ** 2 * r, a, b, epsabs=0, epsrel=1e-12)[0]
            for a, b in zip(pts, pts[1:])
        )
        assert l2_norm(u) ** 2 == pytest.approx(oracle, rel=1e-2)

    @given(st.floats(0.01, 3.0))
    @settings(max_examples=10, deadline=None)
    def test_alpha_enters_as_prefactor(self, alpha):
        p0 = MoserParams(9, 0.0, 1.0)
        g = GridSpec(256, 4 * p0.nu)
        u0 = sample_initial_data(p0, QUINTIC, g, "rescaled_y").values
        ua = sample_initial_data(p0.with_alpha(alpha), QUINTIC, g, "rescaled_y").values
        assert np.allclose(ua, (1 + alpha / 9) * u0, rtol=1e-15, atol=0)


class TestHamiltonianTerms:
    def test_term_I_example(self):
        assert term_I_closed_form(MoserParams(16, 1.0, 1.0)) == pytest.approx(0.4650262, abs=1e-7)

    @pytest.mark.parametrize("A", [1.0, 2.0])
    @pytest.mark.parametrize("k", [16, 25])
    def test_term_I_alpha_zero(self, A, k):
        assert term_I_closed_form(MoserParams(k, 0.0, A)) == pytest.approx(
            1 - 2 / (A * math.sqrt(k)) - 2 * LOG2 / k, rel=1e-15
        )

    def test_profile_constants_quintic(self):
        c = profile_constants(QUINTIC)
        assert c["C1"] == pytest.approx(30 * math.pi / 7, rel=1e-12)
        assert c["b"] == pytest.approx(-2 * math.pi, rel=1e-12)
        assert c["a"] == pytest.approx(-2.03814, abs=1e-5)
        assert c["phi_sq_over_r"] == pytest.approx(0.32438, abs=1e-5)

    def test_C1_reproducible_across_refinement(self):
        coarse = profile_constants(QUINTIC, rtol=1e-9)["C1"]
        fine = profile_constants(QUINTIC, rtol=1e-13)["C1"]
        assert coarse > 0 and abs(coarse - fine) <= 1e-8

    def test_decomposition_example(self):
        t = hamiltonian_terms(MoserParams(16, 1.0, 1.0))
        assert abs(t.term_I_quadrature - t.term_I_exact) <= 1e-10
        assert abs(t.term_I - t.term_I_quadrature) <= 5 * (1 / 16) ** 2
        assert t.term_a == pytest.approx(t.term_a_quadrature, abs=1e-8)
        assert t.term_c == pytest.approx(t.term_c_quadrature, abs=1e-8)
        assert t.term_II_quadrature == pytest.approx(t.term_a_quadrature + t.term_b + t.term_c_quadrature, rel=1e-10)
        assert t.term_b_lower <= t.term_b <= t.term_b_upper

    def test_rejects_overlapping_support(self):
        with pytest.raises(InvalidParams):
            hamiltonian_terms(MoserParams(4, 0.0, 4.0))


class TestMargin:
    def test_k16_supercritical_and_frozen(self):
        m = supercriticality_margin(MoserParams(16, 1.0, 1.0))
        assert m > 0
        assert m == pytest.approx(constant("supercritical_margin_k16"), rel=1e-9)

    def test_nondecreasing_in_alpha(self):
        ms = [supercriticality_margin(MoserParams(16, a, 1.0)) for a in (0.0, 0.5, 1.0)]
        assert ms[0] <= ms[1] <= ms[2]

    def test_grid_agrees_with_quadrature_k9(self):
        p = MoserParams(9, 1.0, 1.0)
        quad_m = supercriticality_margin(p)
        grid_m = supercriticality_margin(p, grid=GridSpec(1024, 4.0))
        assert grid_m == pytest.approx(quad_m, rel=0.05)
