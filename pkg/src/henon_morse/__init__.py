"""Nodal radial solutions of the Hénon problem, their singular radial
spectrum and Morse indices, computed through the fractional-dimension
Lane-Emden transformation."""

__version__ = "0.1.0"

from .closed_forms import (  # noqa: E402
    ProblemParams,
    critical_exponent,
    fractional_dimension,
    harmonic_multiplicity,
)
from .errors import DomainError, NumericalError  # noqa: E402
from .shooting import extract_nodal_structure, find_nodal_solution  # noqa: E402
from .spectrum import limit_spectrum, negative_spectrum, solve_spectrum  # noqa: E402
from .morse import limit_morse_index, lower_bound, morse_index  # noqa: E402
from .bessel import bessel_j, nth_zero, p1_limit_morse, solve_beta  # noqa: E402

__all__ = [
    "ProblemParams", "critical_exponent", "fractional_dimension", "harmonic_multiplicity",
    "DomainError", "NumericalError", "find_nodal_solution", "extract_nodal_structure",
    "solve_spectrum", "negative_spectrum", "limit_spectrum", "morse_index",
    "limit_morse_index", "lower_bound", "bessel_j", "nth_zero", "solve_beta", "p1_limit_morse",
]
