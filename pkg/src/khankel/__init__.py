"""Numerical toolkit for the (k,1)-generalized Fourier transform and its translations."""

from .dunkl import DunklContext, ScalarField, AdmissibilityError

__all__ = ["DunklContext", "ScalarField", "AdmissibilityError"]
__version__ = "0.1.0"
