"""Real-order Bessel functions of the first kind and the small-exponent index.

``J_beta(x)`` is summed from its power series for ``x <= X_SWITCH`` and
continued beyond by integrating the Bessel equation in Liouville normal form.
"""

from decimal import Decimal, localcontext
from functools import lru_cache
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .closed_forms import harmonic_multiplicity
from .errors import BracketError, ConvergenceError, DomainError, PrecisionLossError

X_SWITCH = 20.0
X_MAX = 1e4
SCAN_STEP = 0.2
ZERO_XTOL = 1e-14
BETA_XTOL = 1e-13
_DIGITS = 60

# Lanczos coefficients, g = 7, n = 9
_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x):
    """Gamma function of a real argument (Lanczos approximation, reflection below 1/2)."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    a = _LANCZOS[0]
    t = x + _LANCZOS_G + 0.5
    for k in range(1, len(_LANCZOS)):
        a += _LANCZOS[k] / (x + k)
    return math.sqrt(2 * math.pi) * t ** (x + 0.5) * math.exp(-t) * a


def _check_beta(beta):
    if not beta >= 0:
        raise DomainError(f"order beta must be >= 0, got {beta!r}")


def _series_sum(beta, x):
    # sum_k (-x^2/4)^k / (k! (beta+1)_k) in 60-digit decimal arithmetic: the
    # terms grow to ~e^x before cancelling, far beyond double precision
    with localcontext() as ctx:
        ctx.prec = _DIGITS
        b = Decimal(beta)
        q = -(Decimal(x) ** 2) / 4
        term = Decimal(1)
        total = Decimal(1)
        k = 0
        tiny = Decimal(10) ** -50
        while True:
            k += 1
            term = term * q / (k * (b + k))
            total += term
            if k > x and (abs(term) <= Decimal("1e-18") * abs(total) or abs(term) < tiny):
                return float(total)


def _series(beta, x):
    if x == 0.0:
        return 1.0 if beta == 0 else 0.0
    return (x / 2) ** beta / gamma(1 + beta) * _series_sum(beta, x)


def _series_derivative(beta, x):
    # J'_beta = (beta/x) J_beta - J_{beta+1}
    return beta / x * _series(beta, x) - _series(beta + 1, x)


@lru_cache(maxsize=256)
def _continuation(beta, x_end):
    """Dense solution of ``y'' + (1 - (beta^2 - 1/4)/x^2) y = 0``, ``y = sqrt(x) J``."""
    x0 = X_SWITCH
    j0 = _series(beta, x0)
    dj0 = _series_derivative(beta, x0)
    y0 = math.sqrt(x0) * j0
    dy0 = 0.5 / math.sqrt(x0) * j0 + math.sqrt(x0) * dj0
    c = beta * beta - 0.25

    def rhs(x, y):
        return [y[1], -(1.0 - c / (x * x)) * y[0]]

    sol = solve_ivp(rhs, (x0, x_end), [y0, dy0], method="DOP853", rtol=1e-13, atol=1e-15,
                    dense_output=True)
    if sol.status != 0:
        raise ConvergenceError(f"Bessel continuation failed: {sol.message}",
                               {"beta": beta, "x_end": x_end})
    return sol.sol


def bessel_j(beta, x):
    """``J_beta(x)`` for ``beta >= 0`` and ``0 <= x <= 1e4``."""
    _check_beta(beta)
    x = float(x)
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x > X_MAX:
        raise PrecisionLossError(f"J_beta(x) is not validated beyond x = {X_MAX:g}")
    beta = float(beta)
    if x <= X_SWITCH:
        return _series(beta, x)
    # continuation cached per power-of-two window end
    x_end = min(X_MAX, 2.0 ** math.ceil(math.log2(max(x, 2 * X_SWITCH))))
    return float(_continuation(beta, x_end)(x)[0]) / math.sqrt(x)


def _refine(beta, a, b):
    f = lambda s: bessel_j(beta, s)
    return brentq(f, a, b, xtol=ZERO_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)


def bessel_zeros(beta, n):
    """The first ``n`` positive zeros of ``J_beta``, ascending."""
    _check_beta(beta)
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"zero index must be a positive integer, got {n!r}")
    beta = float(beta)
    zeros = []
    # J_beta > 0 on (0, beta]; consecutive zeros lie within pi + beta of each other
    a = max(beta, SCAN_STEP)
    fa = bessel_j(beta, a)
    limit = a + math.pi + beta + 2.0
    while len(zeros) < n:
        b = a + SCAN_STEP
        if b > limit or b > X_MAX:
            raise BracketError(f"no sign change found for zero {len(zeros) + 1} of J_{beta}")
        fb = bessel_j(beta, b)
        if fa == 0.0:
            zeros.append(a)
        elif fa * fb < 0:
            zeros.append(_refine(beta, a, b))
        else:
            a, fa = b, fb
            continue
        limit = zeros[-1] + math.pi + beta + 2.0
        a, fa = b, fb
    return zeros


def nth_zero(beta, n):
    """``n``-th positive zero ``j_{beta, n}``."""
    return bessel_zeros(beta, n)[-1]


def _check_nam(N, alpha, m):
    if not isinstance(N, int) or N < 3:
        raise DomainError(f"N must be an integer >= 3, got {N!r}")
    if not float(alpha) >= 0:
        raise DomainError(f"alpha must be >= 0, got {alpha!r}")
    if not isinstance(m, int) or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")


def base_order(N, alpha):
    """``(N - 2)/(2 + alpha)``, the order attached to the last zone."""
    return (N - 2) / (2 + float(alpha))


def solve_beta(N, alpha, m, i):
    """Order ``beta_i`` whose ``i``-th zero equals the ``m``-th zero of ``J_{(N-2)/(2+alpha)}``."""
    _check_nam(N, alpha, m)
    if not 1 <= i <= m:
        raise DomainError(f"need 1 <= i <= m, got i={i}, m={m}")
    b0 = base_order(N, alpha)
    if i == m:
        return b0
    target = nth_zero(b0, m)

    def f(b):
        return nth_zero(b, i) - target

    hi = 1.0
    while f(hi) <= 0:
        hi *= 2
        if hi > 1e3:
            raise BracketError(f"could not bracket beta_{i} for (N={N}, alpha={alpha}, m={m})")
    beta = brentq(f, 0.0, hi, xtol=BETA_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)
    return beta


def J_from_beta(N, alpha, beta):
    """``J = ((2 + alpha) beta - (N - 2)) / 2``."""
    return ((2 + float(alpha)) * beta - (N - 2)) / 2


def p1_limit_morse(N, alpha, m):
    """Morse index as ``p -> 1``: ``1 + sum_{i<m} sum_{0<=j<J_i} N_j``."""
    _check_nam(N, alpha, m)
    total = 1
    for i in range(1, m):
        J = J_from_beta(N, alpha, solve_beta(N, alpha, m, i))
        j = 0
        while j < J:
            total += harmonic_multiplicity(N, j)
            j += 1
    return total


def p1_report(N, alpha, m):
    """Per-zone ``beta_i``, ``J_i`` and the margins ``J_i - (2 + alpha)(m - i)``."""
    _check_nam(N, alpha, m)
    rows = []
    for i in range(1, m):
        b = solve_beta(N, alpha, m, i)
        J = J_from_beta(N, alpha, b)
        rows.append({
            "i": i,
            "beta": b,
            "J": J,
            "margin": J - (2 + float(alpha)) * (m - i),
            "residual": abs(nth_zero(b, i) - nth_zero(base_order(N, alpha), m)),
        })
    return rows


__all__ = [
    "gamma", "bessel_j", "bessel_zeros", "nth_zero", "base_order", "solve_beta", "J_from_beta",
    "p1_limit_morse", "p1_report", "X_SWITCH", "X_MAX",
]
