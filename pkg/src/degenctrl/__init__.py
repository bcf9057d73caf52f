"""Numerical lab for the degenerate parabolic operator u_t - (x^alpha u_x)_x, 1 <= alpha < 2."""

__version__ = "0.1.0"

from .besselnu import bessel_j, bessel_j_prime, bessel_zero, bessel_zeros, gap_certificate, zero_table
from .spectrum import DegenerateOperator, EigenPair, eigenpair, eigenvalues, make_operator
from .moment import BiorthogonalFamily, biorthogonal_solve, make_system
from .control import InitialData, synthesize_boundary, synthesize_distributed
from .eigenmass import MassReport, lower_bound_sweep, mass_direct, mass_via_L
from .costlab import SweepConfig, SweepPoint, fit_rate, run_sweep

__all__ = [
    "bessel_j", "bessel_j_prime", "bessel_zero", "bessel_zeros", "gap_certificate", "zero_table",
    "DegenerateOperator", "EigenPair", "eigenpair", "eigenvalues", "make_operator",
    "BiorthogonalFamily", "biorthogonal_solve", "make_system",
    "InitialData", "synthesize_boundary", "synthesize_distributed",
    "MassReport", "lower_bound_sweep", "mass_direct", "mass_via_L",
    "SweepConfig", "SweepPoint", "fit_rate", "run_sweep",
]
