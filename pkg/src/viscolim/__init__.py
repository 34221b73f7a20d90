"""Scattering resonances of 1-D Schrodinger operators, computed directly and as
limits of eigenvalues under a complex absorbing potential."""
from .eigensolver import (SectorWindow, Spectrum, cap_spectrum, eig_dense, filter_sector,
                          resolvent_norm, stability_filter)
from .errors import (BoundaryTooCloseToZero, BudgetExceeded, ConfigError, NoConvergence,
                     NonCompactSupport, NumericalFailure, QuadratureOrderTooLow, ViscolimError,
                     ZeroWavenumber)
from .harness import (ConvergenceReport, SweepConfig, Target, conjugation_check, example4_sweep,
                      match_spectra, pseudospectrum_scan, run_sweep)
from .oscillator_basis import CapConfig, GalerkinMatrix, assemble_cap_matrix
from .potentials import AnalyticPotential, PiecewiseConstantPotential
from .resonance_direct import KRectangle, Pole, ResonanceSet, find_resonances, matching_function

__version__ = "0.1.0"

__all__ = [
    "AnalyticPotential", "BoundaryTooCloseToZero", "BudgetExceeded", "CapConfig", "ConfigError",
    "ConvergenceReport", "GalerkinMatrix", "KRectangle", "NoConvergence", "NonCompactSupport",
    "NumericalFailure", "PiecewiseConstantPotential", "Pole", "QuadratureOrderTooLow",
    "ResonanceSet", "SectorWindow", "Spectrum", "SweepConfig", "Target", "ViscolimError",
    "ZeroWavenumber", "assemble_cap_matrix", "cap_spectrum", "conjugation_check", "eig_dense",
    "example4_sweep", "filter_sector", "find_resonances", "match_spectra", "matching_function",
    "pseudospectrum_scan", "resolvent_norm", "run_sweep", "stability_filter",
]
