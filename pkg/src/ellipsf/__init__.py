"""Compactly supported elliptic scaling functions from isotropic integer
dilation matrices: mask synthesis, Fourier-domain analysis, lattice
evaluation, operator relations, and a property-verification harness."""

from . import cascade, digits, errors, matana, operators, properties, spectral, trigpoly
from .matana import DilationMatrix, QuadraticForm, certify_isotropy, orthogonal_part, solve_quadratic_form, validate_dilation
from .spectral import SpectralProfile, estimate_B, make_profile, mu, M_eval, phi_hat, riesz_verdict
from .trigpoly import TrigPoly, build_G, build_mask, refinement_coefficients

__all__ = [
    "DilationMatrix", "QuadraticForm", "SpectralProfile", "TrigPoly",
    "validate_dilation", "certify_isotropy", "solve_quadratic_form",
    "orthogonal_part", "make_profile", "mu", "M_eval", "phi_hat",
    "estimate_B", "riesz_verdict", "build_G", "build_mask",
    "refinement_coefficients",
    "cascade", "digits", "errors", "matana", "operators",
    "properties", "spectral", "trigpoly",
]

__version__ = "0.1.0"
