"""Semiclassical spectral asymptotics for operators with rough coefficients.

Modules
-------
coeffs       Hölder coefficient fields, mollification, framing pairs.
symcalc      Exact symbolic calculus: symbols, Moyal terms, derivative atoms.
quantize     Discrete Weyl / t-quantization and form operators.
funcalc      Resolvent parametrix, functional calculus, Helffer-Sjöstrand.
spectra      Sturm counting, eigenvalues, Riesz means, smoothed densities.
asymptotics  Phase-space volumes, coarea densities, stationary phase.
cli          Scenario-driven validation runs.
"""

__version__ = "0.1.0"

from .coeffs import build_framing_symbols, make_test_field, mollify
from .symcalc import PolySymbol, SymbolExpr, moyal_terms, symbol
from .quantize import PhaseGrid, assemble_form_operator, weyl_quantize_on_torus
from .funcalc import FunctionProfile, hs_apply, resolvent_symbols
from .spectra import eigenvalues_below, riesz_mean, sturm_count_below
from .asymptotics import riesz_phase_terms, stationary_phase_expand, weyl_volume

__all__ = [
    "FunctionProfile",
    "PhaseGrid",
    "PolySymbol",
    "SymbolExpr",
    "assemble_form_operator",
    "build_framing_symbols",
    "eigenvalues_below",
    "hs_apply",
    "make_test_field",
    "mollify",
    "moyal_terms",
    "resolvent_symbols",
    "riesz_mean",
    "riesz_phase_terms",
    "stationary_phase_expand",
    "sturm_count_below",
    "symbol",
    "weyl_quantize_on_torus",
    "weyl_volume",
]
