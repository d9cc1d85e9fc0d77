"""Closed-form quantities of the Hénon / radially extended Lane-Emden problem.

All functions are pure and evaluated in double precision.  Functions taking a
radius accept scalars or numpy arrays and return the same shape.
"""

from dataclasses import dataclass, field
from numbers import Integral

import numpy as np

from .errors import DomainError

INT64_MAX = 2**63 - 1


def _check_N_alpha(N, alpha):
    if not isinstance(N, Integral) or N < 3:
        raise DomainError(f"dimension N must be an integer >= 3, got {N!r}")
    if not alpha >= 0:
        raise DomainError(f"alpha must be >= 0, got {alpha!r}")


def _check_M(M):
    if not M > 2:
        raise DomainError(f"fractional dimension M must exceed 2, got {M!r}")


def critical_exponent(N, alpha):
    """Threshold exponent ``p_alpha = (N + 2 + 2 alpha) / (N - 2)``."""
    _check_N_alpha(N, alpha)
    return (N + 2 + 2 * alpha) / (N - 2)


def fractional_dimension(N, alpha):
    """Dimension ``M = 2 (N + alpha) / (2 + alpha)`` of the transformed problem."""
    _check_N_alpha(N, alpha)
    return 2 * (N + alpha) / (2 + alpha)


def critical_exponent_M(M):
    """Critical exponent ``(M + 2) / (M - 2)`` written in terms of ``M``."""
    _check_M(M)
    return (M + 2) / (M - 2)


def hardy_threshold(M):
    """Upper limit ``((M - 2) / 2)**2`` of admissible singular eigenvalues."""
    _check_M(M)
    return ((M - 2) / 2) ** 2


@dataclass(frozen=True)
class ProblemParams:
    """Parameters ``(N, alpha, p)`` with the derived ``M`` and ``p_M``.

    ``alpha`` is kept as given (float, int, str or Fraction); ``alpha_value``
    is its float value.  String input keeps the exact decimal around for the
    even-integer test in :mod:`henon_morse.morse`.
    """

    N: int
    alpha: object
    p: float
    alpha_value: float = field(init=False)
    M: float = field(init=False)
    p_crit: float = field(init=False)

    def __post_init__(self):
        a = float(self.alpha)
        _check_N_alpha(self.N, a)
        if not self.p > 1:
            raise DomainError(f"p must exceed 1, got {self.p!r}")
        object.__setattr__(self, "alpha_value", a)
        object.__setattr__(self, "M", fractional_dimension(self.N, a))
        object.__setattr__(self, "p_crit", critical_exponent(self.N, a))

    @property
    def subcritical(self):
        return 1 < self.p < self.p_crit


def harmonic_multiplicity(N, j):
    """Multiplicity ``N_j`` of the eigenvalue ``j (N + j - 2)`` on the sphere.

    Uses the exact integer recursion
    ``N_j = N_{j-1} (N + 2j - 2)(N + j - 3) / ((N + 2j - 4) j)``.
    Raises ``OverflowError`` if the value does not fit into a signed 64-bit
    integer (the width of the exported integer columns).
    """
    if not isinstance(N, Integral) or N < 3:
        raise DomainError(f"dimension N must be an integer >= 3, got {N!r}")
    if not isinstance(j, Integral) or j < 0:
        raise DomainError(f"harmonic order j must be a nonnegative integer, got {j!r}")
    n = 1
    for k in range(1, j + 1):
        num = n * (N + 2 * k - 2) * (N + k - 3)
        den = (N + 2 * k - 4) * k
        n, rem = divmod(num, den)
        assert rem == 0
    if n > INT64_MAX:
        raise OverflowError(f"N_j for N={N}, j={j} exceeds the int64 range")
    return int(n)


def laplace_beltrami_eigenvalue(N, j):
    """Eigenvalue ``j (N + j - 2)`` of the Laplace-Beltrami operator on S^{N-1}."""
    return float(j * (N + j - 2))


def bubble_V(M, t):
    """Limit bubble ``V_M(t) = (1 + t^2 / (M (M - 2)))^{-(M - 2)/2}``."""
    _check_M(M)
    t = np.asarray(t, dtype=float)
    return (1.0 + t * t / (M * (M - 2))) ** (-(M - 2) / 2)


def bubble_V_prime(M, t):
    """Derivative of :func:`bubble_V`."""
    _check_M(M)
    t = np.asarray(t, dtype=float)
    K = M * (M - 2)
    return -(M - 2) / K * t * (1.0 + t * t / K) ** (-M / 2)


def bubble_U(N, alpha, r):
    """Hénon bubble ``U_alpha(r)``, the bounded radial solution with ``U(0) = 1``."""
    _check_N_alpha(N, alpha)
    r = np.asarray(r, dtype=float)
    return (1.0 + r ** (2 + alpha) / ((N + alpha) * (N - 2))) ** (-(N - 2) / (2 + alpha))


def limit_potential_W(M, r):
    """Limit potential ``W = p_M V_M^{p_M - 1} = p_M (1 + r^2/(M(M-2)))^{-2}``."""
    _check_M(M)
    r = np.asarray(r, dtype=float)
    return (M + 2) / (M - 2) * (1.0 + r * r / (M * (M - 2))) ** (-2)


def eta1(M, r):
    """Limit eigenfunction for ``beta = -(M - 1)``."""
    _check_M(M)
    r = np.asarray(r, dtype=float)
    return r * (1.0 + r * r / (M * (M - 2))) ** (-M / 2)


def eta2(M, r):
    """Limit eigenfunction for ``beta = 0``; vanishes at ``r = sqrt(M (M - 2))``."""
    _check_M(M)
    r = np.asarray(r, dtype=float)
    x = r * r / (M * (M - 2))
    return (1.0 - x) * (1.0 + x) ** (-M / 2)


def F_limit(M, r):
    """``F(r) = r^2 W(r)``, the limit of the rescaled functions ``p r^2 |v|^{p-1}``."""
    r = np.asarray(r, dtype=float)
    return r * r * limit_potential_W(M, r)


def xi_bar(M):
    """Maximum point ``sqrt(M (M - 2))`` of :func:`F_limit`.

    From ``F'(r) = 0``: ``2 r (1 + x) - 4 r x = 0`` with ``x = r^2 / (M(M-2))``,
    hence ``x = 1``.
    """
    _check_M(M)
    return float(np.sqrt(M * (M - 2)))
