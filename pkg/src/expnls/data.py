"""Initial-data builders shared by the experiments."""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .nonlinearity import DEFAULT_SAFETY, SafetyPolicy, hamiltonian
from .spectral import ComplexField, GridSpec


def gaussian_field(grid: GridSpec, amplitude: complex = 1.0, width: float = 1.0,
                   center: tuple[float, float] = (0.0, 0.0)) -> ComplexField:
    """amplitude * exp(-|x - center|^2 / (2 width^2))."""
    X, Y = grid.mesh
    r2 = (X - center[0]) ** 2 + (Y - center[1]) ** 2
    return ComplexField(grid, amplitude * np.exp(-r2 / (2.0 * width * width)))


def gaussian_amplitude_for_hamiltonian(grid: GridSpec, target: float, width: float = 1.0,
                                       safety: SafetyPolicy = DEFAULT_SAFETY) -> float:
    """Amplitude a > 0 for which the discrete Hamiltonian of the Gaussian equals ``target``."""
    if target <= 0:
        raise ValueError("target Hamiltonian must be positive")
    base = gaussian_field(grid, 1.0, width)

    def excess(a: float) -> float:
        return hamiltonian(base.scaled(a), safety) - target

    hi = 1.0
    while excess(hi) < 0:
        hi *= 2.0
    return brentq(excess, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
