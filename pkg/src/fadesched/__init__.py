"""Opportunistic multiuser scheduling over time-correlated Rayleigh fading.

Single-user link design (rate and codeword length from the random-coding
error exponent), three user-selection strategies, their large-K throughput
laws, and a seeded Monte-Carlo harness to compare them.
"""

from .error_exponent import LinkDesign, exponent_exact_mc, exponent_theorem1, pe_upper_bound
from .fading_channel import FadingParams, UniformAlpha, i0_scaled
from .link_optimizer import OptimalityInputs, integer_operating_point, solve_operating_point
from .scheduler import Population, Strategy
from .sim_harness import SweepConfig, run_sweep

__version__ = "0.1.0"

__all__ = [
    "FadingParams",
    "UniformAlpha",
    "i0_scaled",
    "LinkDesign",
    "exponent_exact_mc",
    "exponent_theorem1",
    "pe_upper_bound",
    "OptimalityInputs",
    "solve_operating_point",
    "integer_operating_point",
    "Population",
    "Strategy",
    "SweepConfig",
    "run_sweep",
]
