"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class ExpNLSError(Exception):
    """Base class for all package errors."""


class InvalidField(ExpNLSError, ValueError):
    """Field samples are non-finite or do not match their grid."""


class RadiusOutOfBox(ExpNLSError, ValueError):
    """A radius or support does not fit inside the computational box."""


class InvalidFunctional(ExpNLSError, ValueError):
    """A functional value is outside its admissible range."""


class InvalidParams(ExpNLSError, ValueError):
    """Parameter triple violates the construction's constraints."""


class ResolutionTooCoarse(ExpNLSError, ValueError):
    """The grid cannot resolve the features of the requested data."""


class QuadratureFailure(ExpNLSError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ConfigInvalid(ExpNLSError, ValueError):
    """Evolution or experiment configuration is inconsistent."""


class ZeroField(ExpNLSError, ValueError):
    """Operation is undefined for the zero field."""


class OverflowRisk(ExpNLSError, FloatingPointError):
    """Exponent 4*pi*|u|^2 exceeds the safety cap.

    ``modulus`` is the offending |u| and ``location`` the grid index (or None
    for scalar input).
    """

    def __init__(self, modulus: float, exponent: float, cap: float, location=None):
        self.modulus = float(modulus)
        self.exponent = float(exponent)
        self.cap = float(cap)
        self.location = location
        where = "" if location is None else f" at index {tuple(int(i) for i in location)}"
        super().__init__(
            f"exponent {self.exponent:.6g} exceeds cap {self.cap:.6g} (|u|={self.modulus:.6g}){where}"
        )


class BlowupSuspected(ExpNLSError, FloatingPointError):
    """Evolution stopped because values overflowed the guard or became non-finite.

    Instances are attached to partial evolution results; the CLI raises them.
    """

    def __init__(self, t: float, location=None, reason: str = ""):
        self.t = float(t)
        self.location = location
        self.reason = reason
        where = "" if location is None else f" near index {tuple(int(i) for i in location)}"
        super().__init__(f"blow-up suspected after t={self.t:.6g}{where}: {reason}")
