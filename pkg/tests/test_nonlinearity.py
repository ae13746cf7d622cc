from __future__ import annotations

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from expnls.constants import constant
from expnls.data import gaussian_field
from expnls.errors import InvalidFunctional, OverflowRisk
from expnls.nonlinearity import (
    K_eval,
    Regime,
    SafetyPolicy,
    classify_regime,
    derivative_lipschitz_ratio_max,
    f_eval,
    hamiltonian,
    hamiltonian_density,
    lipschitz_ratio_max,
    mass,
    power_gaussian_sup,
)
from expnls.spectral import ComplexField, GridSpec, grad_l2_norm, l2_norm


def series_expm1(x: float, terms: int = 60) -> float:
    """Oracle: sum_{n>=1} x^n / n! with exact rational coefficients."""
    total, term = Fraction(0), Fraction(1)
    xf = Fraction(x)
    for n in range(1, terms):
        term = term * xf / n
        total += term
    return float(total)


def series_expm1_minus_x(x: float, terms: int = 60) -> float:
    total, term = Fraction(0), Fraction(1)
    xf = Fraction(x)
    for n in range(1, terms):
        term = term * xf / n
        if n >= 2:
            total += term
    return float(total)


class TestSafetyPolicy:
    @pytest.mark.parametrize("cap,cut", [(800, 1e-3), (0.5, 1e-3), (600, 0), (600, 1.5)])
    def test_rejects(self, cap, cut):
        with pytest.raises(ValueError):
            SafetyPolicy(cap, cut)


class TestPointwise:
    def test_f_zero(self):
        assert f_eval(0j) == 0

    def test_f_k9(self):
        z = math.sqrt(9 / (4 * math.pi))
        assert abs(f_eval(z)) == pytest.approx(z * (math.exp(9) - 1), rel=1e-14)
        assert math.exp(9) - 1 == pytest.approx(8102.08, abs=0.01)

    def test_f_small_against_series(self):
        x = 4 * math.pi * 0.01
        assert abs(f_eval(0.1)) == pytest.approx(0.1 * series_expm1(x), rel=1e-14)
        assert abs(f_eval(0.1)) == pytest.approx(0.013390, abs=5e-7)

    @given(st.floats(0, 1.0), st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi))
    def test_gauge_invariance(self, r, phi, theta):
        z = r * cmath.exp(1j * phi)
        lhs = f_eval(cmath.exp(1j * theta) * z)
        rhs = cmath.exp(1j * theta) * f_eval(z)
        assert abs(lhs - rhs) <= 1e-14 * max(1.0, abs(rhs))

    @given(st.floats(1.0, 6.0), st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi))
    def test_gauge_invariance_large_modulus(self, r, phi, theta):
        # Rounding of |z|^2 is amplified by the exponent x = 4 pi |z|^2.
        z = r * cmath.exp(1j * phi)
        lhs = f_eval(cmath.exp(1j * theta) * z)
        rhs = cmath.exp(1j * theta) * f_eval(z)
        assert abs(lhs - rhs) <= 1e-14 * (4 * math.pi * r * r) * abs(rhs)

    @given(st.floats(1e-6, 3.0), st.floats(-math.pi, math.pi))
    def test_phase_preserved(self, r, phi):
        z = r * cmath.exp(1j * phi)
        w = f_eval(z)
        assert abs(cmath.phase(w) - cmath.phase(z)) <= 1e-12 or abs(abs(cmath.phase(w) - cmath.phase(z)) - 2 * math.pi) <= 1e-12

    def test_K_values(self):
        assert K_eval(0.0) == 0.0
        assert K_eval(math.sqrt(1 / (4 * math.pi))) == pytest.approx(math.e - 1, rel=1e-14)
        assert K_eval(math.sqrt(16 / (4 * math.pi))) == pytest.approx(8.8861e6, rel=1e-4)

    def test_overflow_guard_scalar(self):
        z = math.sqrt(601 / (4 * math.pi))
        with pytest.raises(OverflowRisk) as info:
            f_eval(z)
        assert info.value.modulus == pytest.approx(z)

    def test_overflow_guard_location(self):
        g = GridSpec(8, 1.0)
        vals = np.zeros((8, 8), complex)
        vals[3, 5] = 10.0
        with pytest.raises(OverflowRisk) as info:
            hamiltonian(ComplexField(g, vals))
        assert info.value.location == (3, 5)
        assert info.value.modulus == pytest.approx(10.0)

    def test_density_zero_and_small(self):
        assert hamiltonian_density(0.0) == 0.0
        z = math.sqrt(1e-6 / (4 * math.pi))
        assert hamiltonian_density(z) == pytest.approx(series_expm1_minus_x(1e-6) / (4 * math.pi), rel=1e-13)
        assert hamiltonian_density(z) == pytest.approx(3.979e-14, rel=1e-3)

    def test_density_at_tenth(self):
        x = 4 * math.pi * 0.01
        expected = series_expm1_minus_x(x) / (4 * math.pi)
        assert hamiltonian_density(0.1) == pytest.approx(expected, rel=1e-14)
        # The rounded published figure 6.548e-4 carries a small arithmetic slip; exact is 6.5549e-4.
        assert hamiltonian_density(0.1) == pytest.approx(6.548e-4, rel=2e-3)

    @given(st.floats(0.0, 0.5))
    def test_density_matches_series_both_sides_of_cutoff(self, r):
        x = 4 * math.pi * r * r
        got = hamiltonian_density(r)
        assert got >= 0
        assert got == pytest.approx(series_expm1_minus_x(x) / (4 * math.pi), rel=2e-12, abs=1e-300)

    @given(st.floats(1e-8, 1.0))
    def test_density_positive_away_from_zero(self, r):
        assert hamiltonian_density(r) > 0


class TestFunctionals:
    def test_zero(self):
        z = GridSpec(16, 2.0).zeros()
        assert mass(z) == 0.0 and hamiltonian(z) == 0.0

    def test_plane_wave(self):
        g = GridSpec(32, 3.0)
        a = 0.2
        kx, ky = g.wavenumbers[2], g.wavenumbers[-3]
        X, Y = g.mesh
        u = ComplexField(g, a * np.exp(1j * (kx * X + ky * Y)))
        x = 4 * math.pi * a * a
        expected = (kx**2 + ky**2) * a * a * 36 + 36 * (math.expm1(x) - x) / (4 * math.pi)
        assert hamiltonian(u) == pytest.approx(expected, rel=1e-12)

    def test_gaussian_against_radial_quadrature(self):
        a = 0.5
        g = GridSpec(256, 12.0)
        u = gaussian_field(g, a, 1.0)
        # Oracle: H = int |grad u|^2 + int G(u) over R^2 for a radial Gaussian.
        grad = quad(lambda r: (a * r * math.exp(-r * r / 2)) ** 2 * 2 * math.pi * r, 0, 40, epsabs=0, epsrel=1e-12)[0]

        def G(r):
            x = 4 * math.pi * (a * math.exp(-r * r / 2)) ** 2
            return (math.expm1(x) - x) / (4 * math.pi) * 2 * math.pi * r

        pot = quad(G, 0, 40, epsabs=0, epsrel=1e-12, limit=200)[0]
        assert hamiltonian(u) == pytest.approx(grad + pot, rel=1e-6)

    @given(st.floats(0.0, 0.8), st.floats(0.3, 2.0))
    @settings(max_examples=20, deadline=None)
    def test_hamiltonian_dominates_gradient(self, a, w):
        u = gaussian_field(GridSpec(64, 8.0), a, w)
        assert hamiltonian(u) >= grad_l2_norm(u) ** 2
        assert mass(u) == pytest.approx(l2_norm(u) ** 2, rel=1e-15)


class TestClassify:
    def test_examples(self):
        lab = classify_regime(0.5)
        assert lab.kind is Regime.SUBCRITICAL and lab.margin == -0.5
        assert classify_regime(1 + 1e-12, 1e-9).kind is Regime.CRITICAL
        lab = classify_regime(1.2)
        assert lab.kind is Regime.SUPERCRITICAL and lab.margin == pytest.approx(0.2)

    def test_negative_rejected(self):
        with pytest.raises(InvalidFunctional):
            classify_regime(-0.1)

    @given(st.floats(0, 3), st.floats(1e-12, 1e-2))
    def test_label_consistent_with_margin(self, H, tol):
        lab = classify_regime(H, tol)
        m = H - 1
        expected = Regime.SUBCRITICAL if m < -tol else Regime.SUPERCRITICAL if m > tol else Regime.CRITICAL
        assert lab.kind is expected and lab.margin == m


class TestLipschitzBounds:
    def test_f_bound_stable_and_frozen(self):
        cs = [lipschitz_ratio_max(seed=s) for s in range(3)]
        assert all(math.isfinite(c) for c in cs)
        assert max(cs) / min(cs) < 1.01
        assert cs[0] == pytest.approx(constant("lipschitz_f_C"), rel=1e-3)

    def test_derivative_bound_stable_and_frozen(self):
        cs = [derivative_lipschitz_ratio_max(seed=s) for s in range(3)]
        assert all(math.isfinite(c) for c in cs)
        assert max(cs) / min(cs) < 1.01
        assert cs[0] == pytest.approx(constant("lipschitz_df_C"), rel=1e-3)

    def test_jacobian_matches_finite_differences(self):
        from expnls.nonlinearity import _df_real_jacobian

        z = 0.3 - 0.4j
        J = _df_real_jacobian(np.array([z]))[0]
        h = 1e-7
        for col, dz in enumerate((h, 1j * h)):
            d = (f_eval(z + dz) - f_eval(z - dz)) / (2 * h)
            assert J[0, col] == pytest.approx(d.real, rel=1e-6)
            assert J[1, col] == pytest.approx(d.imag, rel=1e-6)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("gamma", [1.0, 4 * math.pi])
def test_power_gaussian_sup_identity(m, gamma):
    x = np.linspace(0, 5 / math.sqrt(gamma), 2_000_001)
    grid_sup = float(np.max(x**m * np.exp(-gamma * x * x)))
    assert power_gaussian_sup(m, gamma) == pytest.approx(grid_sup, rel=1e-6)
