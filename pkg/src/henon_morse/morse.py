"""Morse indices from singular radial eigenvalues.

A negative radial eigenvalue ``nu`` combines with the spherical harmonics of
degree ``j`` whenever ``j < J(nu)``; each such pair contributes the
multiplicity ``N_j`` of that degree.
"""

from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
import math

import numpy as np

from .closed_forms import (
    fractional_dimension,
    harmonic_multiplicity,
    hardy_threshold,
    laplace_beltrami_eigenvalue,
)
from .errors import DomainError

INTEGER_FLAG_TOL = 1e-12
DEGENERACY_TOL = 1e-6


def exact_alpha(alpha):
    """Exact rational value of ``alpha``.

    Strings are read as decimals (``"2.0000000001"`` stays non-integral);
    floats are converted exactly from their binary value.
    """
    if isinstance(alpha, Fraction):
        return alpha
    if isinstance(alpha, str):
        try:
            return Fraction(Decimal(alpha.strip()))
        except Exception as exc:
            raise DomainError(f"cannot parse alpha {alpha!r}") from exc
    if isinstance(alpha, (int, float, Decimal)):
        if isinstance(alpha, float) and not math.isfinite(alpha):
            raise DomainError(f"alpha must be finite, got {alpha!r}")
        return Fraction(alpha)
    raise DomainError(f"unsupported alpha type {type(alpha).__name__}")


def is_even_integer(alpha):
    a = exact_alpha(alpha)
    return a.denominator == 1 and a.numerator % 2 == 0


def _floor_half(alpha):
    return math.floor(exact_alpha(alpha) / 2)


def J_of_nu(alpha, M, nu):
    """``J = ((2 + alpha)/2) (sqrt(((M-2)/2)^2 - nu) - (M-2)/2)``."""
    a = float(alpha)
    h = hardy_threshold(M)
    nu = np.asarray(nu, dtype=float)
    if np.any(nu >= h):
        raise DomainError(f"nu must lie below the Hardy threshold {h}")
    out = (2 + a) / 2 * (np.sqrt(h - nu) - (M - 2) / 2)
    return float(out) if out.ndim == 0 else out


def degeneracy_grid(N, alpha, j):
    """Grid value ``-(2/(2+alpha))^2 j (N - 2 + j)`` of degree ``j``."""
    a = float(alpha)
    return -((2 / (2 + a)) ** 2) * j * (N - 2 + j)


def _harmonic_sum(N, upto):
    return sum(harmonic_multiplicity(N, j) for j in range(upto + 1))


def _check(N, alpha, m):
    if not isinstance(N, int) or N < 3:
        raise DomainError(f"N must be an integer >= 3, got {N!r}")
    if exact_alpha(alpha) < 0:
        raise DomainError(f"alpha must be >= 0, got {alpha!r}")
    if not isinstance(m, int) or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")


def limit_morse_index(N, alpha, m):
    """Morse index of the ``m``-zone radial solution for ``p`` close to the threshold.

    ``alpha`` not an even integer: ``m sum_{j=0}^{1+[alpha/2]} N_j``.
    ``alpha`` even (including 0): ``m sum_{j=0}^{alpha/2} N_j + (m-1) N_{1+alpha/2}``.
    """
    _check(N, alpha, m)
    k = _floor_half(alpha)
    if is_even_integer(alpha):
        return m * _harmonic_sum(N, k) + (m - 1) * harmonic_multiplicity(N, k + 1)
    return m * _harmonic_sum(N, k + 1)


def lower_bound(N, alpha, m):
    """``1 + (m - 1) sum_{j=0}^{1+[alpha/2]} N_j``, valid for every admissible ``p``."""
    _check(N, alpha, m)
    return 1 + (m - 1) * _harmonic_sum(N, _floor_half(alpha) + 1)


def _count_below(N, J):
    """``sum_{0 <= j < J} N_j`` with strict inequality."""
    total, j = 0, 0
    while j < J:
        total += harmonic_multiplicity(N, j)
        j += 1
    return total


@dataclass(frozen=True)
class MorseReport:
    N: int
    alpha: object
    M: float
    nu: tuple
    J: tuple
    contributions: tuple
    total: int
    radial_index: int
    integer_boundary: tuple
    degenerate: bool
    degeneracy_witness: object
    degeneracy_distance: float
    limit_prediction: int
    lower_bound: int

    @property
    def one_sided_split(self):
        """``J_i > 1 + alpha/2`` for ``i < m`` and ``J_m < 1 + alpha/2``."""
        if not self.J:
            return False
        mid = 1 + float(self.alpha) / 2
        return all(j > mid for j in self.J[:-1]) and self.J[-1] < mid

    def as_dict(self):
        return {
            "N": self.N,
            "alpha": str(self.alpha),
            "M": self.M,
            "nu": list(self.nu),
            "J": list(self.J),
            "contributions": list(self.contributions),
            "total": self.total,
            "radial_index": self.radial_index,
            "integer_boundary": list(self.integer_boundary),
            "degenerate": self.degenerate,
            "degeneracy_witness": self.degeneracy_witness,
            "degeneracy_distance": self.degeneracy_distance,
            "limit_prediction": self.limit_prediction,
            "lower_bound": self.lower_bound,
            "one_sided_split": self.one_sided_split,
        }


def _nu_values(spectral):
    return np.asarray(getattr(spectral, "nu", spectral), dtype=float)


def morse_index(spectral, N, alpha, offsets=None, tol=DEGENERACY_TOL):
    """Morse index ``sum_i sum_{0 <= j < J_i} N_j`` from the negative radial eigenvalues.

    ``spectral`` is a :class:`~henon_morse.spectrum.SpectralResult` or a
    plain sequence of eigenvalues.  ``offsets`` (values ``nu_i + (M - 1)``
    from the derivative mode) refine the degeneracy decision, see
    :func:`degeneracy_check`.  ``J_i`` within ``1e-12`` of an integer are
    listed in ``integer_boundary``; the strict count is still reported.
    """
    nu = _nu_values(spectral)
    M = fractional_dimension(N, float(alpha))
    J = J_of_nu(alpha, M, nu) if nu.size else np.empty(0)
    J = np.atleast_1d(J)
    contributions = tuple(_count_below(N, float(x)) for x in J)
    boundary = tuple(i for i, x in enumerate(J) if abs(x - round(x)) < INTEGER_FLAG_TOL)
    deg = degeneracy_check(nu, N, alpha, tol=tol, offsets=offsets)
    m = max(nu.size, 1)
    return MorseReport(
        N=N,
        alpha=alpha,
        M=M,
        nu=tuple(float(x) for x in nu),
        J=tuple(float(x) for x in J),
        contributions=contributions,
        total=int(sum(contributions)),
        radial_index=int(nu.size),
        integer_boundary=boundary,
        degenerate=deg.degenerate,
        degeneracy_witness=deg.witness,
        degeneracy_distance=deg.distance,
        limit_prediction=limit_morse_index(N, alpha, m),
        lower_bound=lower_bound(N, alpha, m),
    )


@dataclass(frozen=True)
class FullEigenvalue:
    value: float
    k: int
    j: int
    multiplicity: int


def full_spectrum_decomposition(spectral, N, alpha):
    """All negative ``((2+alpha)/2)^2 nu_k + j (N + j - 2)`` with multiplicity ``N_j``.

    ``k`` is 1-based.  Sorted by value.
    """
    nu = _nu_values(spectral)
    c = ((2 + float(alpha)) / 2) ** 2
    out = []
    for k, x in enumerate(nu, start=1):
        j = 0
        while True:
            lam = c * x + laplace_beltrami_eigenvalue(N, j)
            if lam >= 0:
                break
            out.append(FullEigenvalue(float(lam), k, j, harmonic_multiplicity(N, j)))
            j += 1
    out.sort(key=lambda e: (e.value, e.k, e.j))
    return out


@dataclass(frozen=True)
class DegeneracyResult:
    degenerate: bool
    distance: float
    witness: object  # (k, j) of the nearest grid point, k 1-based
    certified: tuple = field(default=())


def degeneracy_check(spectral, N, alpha, tol=DEGENERACY_TOL, offsets=None):
    """Is some ``nu_k`` on the grid ``-(2/(2+alpha))^2 j (N - 2 + j)``, ``j >= 1``?

    Distances are compared with ``tol * (|g| + 1)``.  When ``alpha = 2(j - 1)``
    the grid point ``g_j`` equals ``-(M - 1)``.  If ``offsets`` supplies the
    derivative-mode values of ``nu_k + (M - 1)``, those give the distance to
    that point, and an offset with the expected sign (negative for ``k < m``,
    positive for ``k = m``) certifies that ``nu_k`` stays off the grid even
    below the tolerance; such pairs are listed in ``certified``.
    """
    nu = _nu_values(spectral)
    M = fractional_dimension(N, float(alpha))
    a = float(alpha)
    best, witness = math.inf, None
    flagged = False
    certified = []
    j = 1
    while nu.size:
        g = degeneracy_grid(N, a, j)
        scale = tol * (abs(g) + 1)
        on_limit = abs(g + (M - 1)) <= 1e-12 * (M - 1)
        for k, x in enumerate(nu, start=1):
            if on_limit and offsets is not None:
                off = float(offsets[k - 1])
                d = abs(off)
                side_ok = off > 0 if k == nu.size else off < 0
                if d < scale:
                    if side_ok:
                        certified.append((k, j))
                    else:
                        flagged = True
            else:
                d = abs(x - g)
                flagged |= bool(d < scale)
            if d < best:
                best, witness = d, (k, j)
        # grid values decrease in j; stop once past the lowest eigenvalue
        if g < nu.min() - 1:
            break
        j += 1
    return DegeneracyResult(flagged, float(best), witness, tuple(certified))


__all__ = [
    "exact_alpha", "is_even_integer", "J_of_nu", "degeneracy_grid", "limit_morse_index",
    "lower_bound", "MorseReport", "morse_index", "FullEigenvalue", "full_spectrum_decomposition",
    "DegeneracyResult", "degeneracy_check",
]
