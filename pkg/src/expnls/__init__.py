"""Numerical laboratory for the 2D defocusing NLS with exponential nonlinearity."""

from .errors import (
    BlowupSuspected,
    ConfigInvalid,
    ExpNLSError,
    InvalidField,
    InvalidFunctional,
    InvalidParams,
    OverflowRisk,
    QuadratureFailure,
    RadiusOutOfBox,
    ResolutionTooCoarse,
    ZeroField,
)
from .spectral import ComplexField, GridSpec

__version__ = "0.1.0"

__all__ = [
    "BlowupSuspected",
    "ComplexField",
    "ConfigInvalid",
    "ExpNLSError",
    "GridSpec",
    "InvalidField",
    "InvalidFunctional",
    "InvalidParams",
    "OverflowRisk",
    "QuadratureFailure",
    "RadiusOutOfBox",
    "ResolutionTooCoarse",
    "ZeroField",
]
