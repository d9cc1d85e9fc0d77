import os
import sys
from functools import lru_cache

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from henon_morse.shooting import extract_nodal_structure, find_nodal_solution  # noqa: E402
from henon_morse.spectrum import derivative_mode_offsets, solve_spectrum  # noqa: E402
from henon_morse.closed_forms import critical_exponent  # noqa: E402


def _sweep(N, alpha, m):
    pc = critical_exponent(N, alpha)
    return [(N, alpha, m, pc - 0.5 * 4.0 ** -k) for k in range(4)]


# every (N, alpha, m, p) whose spectrum is computed anywhere in the suite
SPECTRAL_INSTANCES = (
    [(3, 0, 2, 4.5), (3, 0, 2, 4.9), (3, 1, 2, 6.5), (4, 2, 2, 4.5), (3, 0, 1, 2.0),
     (3, 0, 1, 3.0), (3, 1.5, 2, 6.0), (3, 0, 3, 4.5), (5, 0.5, 2, 2.5),
     # instances behind the command-line and sweep tests
     (3, 0, 2, 4.99), (3, 1, 2, 6.9), (3, 0, 1, 4.0), (3, 0, 1, 4.5), (3, 0, 1, 4.8)]
    + _sweep(3, 0, 1) + _sweep(3, 0, 2) + _sweep(3, 1, 1) + _sweep(3, 1, 2) + _sweep(4, 2, 2)
)


@lru_cache(maxsize=None)
def solved(N, alpha, m, p):
    """``(profile, structure, spectral result, offsets)`` for a registered instance."""
    assert (N, alpha, m, p) in SPECTRAL_INSTANCES, "register the instance in SPECTRAL_INSTANCES"
    prof = find_nodal_solution(N, alpha, p, m)
    st = extract_nodal_structure(prof)
    spec = solve_spectrum(prof, st)
    off = derivative_mode_offsets(spec, prof).best()
    return prof, st, spec, off


@pytest.fixture(scope="session")
def solve_instance():
    return solved


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
