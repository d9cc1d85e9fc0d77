"""Singular weighted Sturm-Liouville eigenproblems.

Discretizes

    -(t^{M-1} psi')' - t^{M-1} q(t) psi = nu t^{M-3} psi,   psi(t_hi) = 0,

with continuous piecewise linear elements on a geometrically graded mesh.
The left end carries no essential condition.  The weights ``t^{M-1}`` and
``t^{M-3}`` are integrated exactly element by element; the potential ``q`` by
two-point Gauss quadrature.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .closed_forms import eta1, eta2, hardy_threshold, limit_potential_W
from .errors import DomainError
from .tridiag import TridiagonalPencil

NEGATIVE_TOL = 1e-8
DEFAULT_NODES = 4000
DEFAULT_LIMIT_NODES = 8000
DEFAULT_FIRST_REL = 1e-8
BUBBLE_RESOLUTION = 1e-3
_SERIES_TERMS = 64


@dataclass(frozen=True, eq=False)
class GradedMesh:
    """Nodes on ``[t_lo, t_hi]`` with element lengths growing by ``ratio``."""

    nodes: np.ndarray = field(repr=False)
    ratio: float
    t_lo: float
    t_hi: float

    @property
    def size(self):
        return self.nodes.size


def graded_mesh(t_lo, t_hi, n_nodes=DEFAULT_NODES, first=None):
    """Geometric mesh whose first element has length ``first``.

    ``first`` defaults to ``1e-8 (t_hi - t_lo)``.
    """
    if n_nodes < 100:
        raise DomainError("a graded mesh needs at least 100 nodes")
    if not 0 <= t_lo < t_hi:
        raise DomainError(f"invalid mesh interval [{t_lo}, {t_hi}]")
    L = t_hi - t_lo
    h0 = DEFAULT_FIRST_REL * L if first is None else first
    n_el = n_nodes - 1
    if h0 * n_el >= L:
        ratio = 1.0
        h = np.full(n_el, L / n_el)
    else:
        # h0 (r^n - 1) / (r - 1) = L, solved in log r
        def excess(logr):
            return h0 * np.expm1(n_el * logr) / np.expm1(logr) - L

        # the last element alone reaches L at the upper end of the bracket
        logr = brentq(excess, 1e-14, np.log(L / h0) / (n_el - 1), xtol=1e-16, rtol=1e-15,
                      maxiter=500)
        ratio = float(np.exp(logr))
        h = h0 * np.exp(logr * np.arange(n_el))
    nodes = t_lo + np.concatenate(([0.0], np.cumsum(h)))
    nodes[-1] = t_hi
    return GradedMesh(nodes, ratio, t_lo, t_hi)


def profile_mesh(profile, structure, n_nodes=DEFAULT_NODES):
    """Mesh on [0, 1] for a solved profile.

    The first element is the smaller of ``1e-8`` and ``1e-3 / M~_0`` so that
    the innermost bubble (width ``1 / M~_0``) is resolved.
    """
    inner = 1.0 / float(structure.scaled_extremal_values[0])
    return graded_mesh(0.0, 1.0, n_nodes, first=min(DEFAULT_FIRST_REL, BUBBLE_RESOLUTION * inner))


def _binom_series(q, delta, kind):
    # sum_n C(q, n) delta^n c_n with c_n the Beta moments of s^n against the
    # products of the two hat functions on [0, 1]
    total = np.zeros_like(delta)
    coef = np.ones_like(delta)
    for n in range(_SERIES_TERMS):
        if kind == "aa":
            c = 2.0 / ((n + 1) * (n + 2) * (n + 3))
        elif kind == "ab":
            c = 1.0 / ((n + 2) * (n + 3))
        else:
            c = 1.0 / (n + 3)
        total += coef * c
        coef = coef * (q - n) / (n + 1) * delta
    return total


def weight_moments(a, b, q):
    """Exact element integrals ``int_a^b t^q la lb`` for linear hats ``la, lb``.

    Returns ``(aa, ab, bb)`` where ``la = (b - t)/h`` and ``lb = (t - a)/h``.
    Short elements away from 0 use the convergent binomial expansion of
    ``(1 + delta s)^q`` (no cancellation); the rest the power rule.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    h = b - a
    aa = np.empty_like(h)
    ab = np.empty_like(h)
    bb = np.empty_like(h)
    with np.errstate(divide="ignore"):
        delta = np.where(a > 0, h / np.where(a > 0, a, 1.0), np.inf)
    ser = delta < 0.5
    if ser.any():
        d = delta[ser]
        pre = h[ser] * a[ser] ** q
        aa[ser] = pre * _binom_series(q, d, "aa")
        ab[ser] = pre * _binom_series(q, d, "ab")
        bb[ser] = pre * _binom_series(q, d, "bb")
    pw = ~ser
    if pw.any():
        A, B, H = a[pw], b[pw], h[pw]

        def I(r):
            return (B ** (r + 1) - A ** (r + 1)) / (r + 1)

        i0, i1, i2 = I(q), I(q + 1), I(q + 2)
        aa[pw] = (B * B * i0 - 2 * B * i1 + i2) / H ** 2
        ab[pw] = (-A * B * i0 + (A + B) * i1 - i2) / H ** 2
        bb[pw] = (A * A * i0 - 2 * A * i1 + i2) / H ** 2
    return aa, ab, bb


@dataclass(frozen=True, eq=False)
class WeightedOperatorPair:
    """Stiffness-minus-potential form ``A`` and singular mass form ``B``.

    Unknowns are the nodal values at all nodes but the last (where the
    function vanishes).  With ``robin`` set, the last node is free and the
    boundary term of ``psi' = -(M-2)/t_hi psi`` is added to ``A``.
    """

    mesh: GradedMesh
    M: float
    pencil: TridiagonalPencil = field(repr=False)
    robin: bool = False
    # couplings of the eliminated last node to its neighbour, for fluxes
    last_coupling: tuple = (0.0, 0.0)

    @property
    def hardy_threshold(self):
        return hardy_threshold(self.M)

    def full_vector(self, x):
        """Nodal values on the whole mesh (appending the boundary zero)."""
        if self.robin:
            return np.asarray(x)
        return np.concatenate((x, np.zeros((1,) + np.shape(x)[1:])))


def assemble_pair(mesh, M, potential=None, robin=False):
    """Assemble ``(A, B)`` for weight exponent ``M`` and potential ``q(t)``.

    ``potential`` is a vectorized callable; ``None`` means zero potential.
    """
    if not M > 2:
        raise DomainError(f"M must exceed 2, got {M}")
    t = mesh.nodes
    a, b = t[:-1], t[1:]
    h = b - a
    ka, kab, kb = weight_moments(a, b, M - 1)
    kint = (ka + 2 * kab + kb) / h ** 2
    ma, mab, mb = weight_moments(a, b, M - 3)
    n = t.size
    ad = np.zeros(n)
    bd = np.zeros(n)
    ad[:-1] += kint
    ad[1:] += kint
    a_off = -kint.copy()
    bd[:-1] += ma
    bd[1:] += mb
    b_off = mab.copy()
    if potential is not None:
        g = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
        for s in g:
            x = a + s * h
            w = 0.5 * h * x ** (M - 1) * potential(x)
            la, lb = 1 - s, s
            ad[:-1] -= w * la * la
            ad[1:] -= w * lb * lb
            a_off -= w * la * lb
    if robin:
        ad[-1] += (M - 2) * t[-1] ** (M - 2)
        pencil = TridiagonalPencil(ad, a_off, bd, b_off)
    else:
        pencil = TridiagonalPencil(ad[:-1], a_off[:-1], bd[:-1], b_off[:-1])
    return WeightedOperatorPair(mesh, M, pencil, robin, (float(a_off[-1]), float(b_off[-1])))


def assemble(profile, mesh):
    """Weak form ``int t^{M-1} psi' phi' - p int t^{M-1} |v_p|^{p-1} psi phi``
    against ``int t^{M-3} psi phi`` for a solved profile."""
    if mesh.t_lo != 0.0 or mesh.t_hi != 1.0:
        raise DomainError("the profile eigenproblem lives on [0, 1]")
    p = profile.p

    def potential(x):
        v, _ = profile.dense_eval(x)
        return p * np.abs(v) ** (p - 1)

    return assemble_pair(mesh, profile.M, potential)


@dataclass(frozen=True, eq=False)
class SpectralResult:
    """Eigenvalues below a cut-off with B-orthonormal eigenfunctions."""

    nu: np.ndarray
    psi: np.ndarray = field(repr=False)
    mesh: GradedMesh = field(repr=False)
    M: float
    # t^{M-1} psi_k'(t_hi), from the residual of the eliminated boundary row
    boundary_flux: np.ndarray = field(repr=False, default=None)

    @property
    def hardy_threshold(self):
        return hardy_threshold(self.M)

    @property
    def count(self):
        return self.nu.size

    def b_gram(self):
        """Matrix of ``int t^{M-3} psi_j psi_k`` with exact element weights."""
        return mass_product(self.mesh, self.M, self.psi, self.psi)

    def sign_changes(self, j, rel=0.0):
        """Interior sign changes of the ``j``-th (0-based) eigenfunction.

        The node at ``t = 0`` is skipped (eigenfunctions of negative
        eigenvalues vanish there and its value is rounding noise), as are
        exact zeros and values below ``rel`` times the maximum.
        """
        x = self.psi[1:, j]
        x = x[np.abs(x) > rel * np.abs(x).max()]
        return int(np.count_nonzero(np.sign(x[:-1]) != np.sign(x[1:])))


def mass_product(mesh, M, X, Y):
    """``int t^{M-3} x y`` for nodal columns ``X, Y`` (P1 interpolants, exact weights)."""
    t = mesh.nodes
    ma, mab, mb = weight_moments(t[:-1], t[1:], M - 3)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    vec = X.ndim == 1 and Y.ndim == 1
    X = X.reshape(t.size, -1)
    Y = Y.reshape(t.size, -1)
    xa, xb, ya, yb = X[:-1], X[1:], Y[:-1], Y[1:]
    G = (xa * ma[:, None]).T @ ya + (xa * mab[:, None]).T @ yb \
        + (xb * mab[:, None]).T @ ya + (xb * mb[:, None]).T @ yb
    return float(G[0, 0]) if vec else G


def _spectral_result(ops, vals, vecs):
    flux = None
    if not ops.robin and vals.size:
        # residual of the dropped row: t^{M-1} psi'(t_hi) = (A psi - nu B psi)_last
        a_last, b_last = ops.last_coupling
        flux = (a_last - vals * b_last) * vecs[-1, :]
    return SpectralResult(vals, ops.full_vector(vecs), ops.mesh, ops.M, flux)


def negative_spectrum(ops, k_max=None, negative_tol=NEGATIVE_TOL):
    """All eigenvalues below ``-negative_tol`` (at most ``k_max``), ascending."""
    k = ops.pencil.n if k_max is None else k_max
    vals, vecs = ops.pencil.lowest(k, upper=-negative_tol)
    return _spectral_result(ops, vals, vecs)


def lowest_spectrum(ops, k):
    """The ``k`` lowest eigenpairs regardless of sign (capped by the Hardy threshold)."""
    vals, vecs = ops.pencil.lowest(k, upper=ops.hardy_threshold)
    return _spectral_result(ops, vals, vecs)


def solve_spectrum(profile, structure, n_nodes=DEFAULT_NODES, k_max=None):
    """Convenience: mesh, assemble and extract the negative spectrum."""
    mesh = profile_mesh(profile, structure, n_nodes)
    return negative_spectrum(assemble(profile, mesh), k_max)


@dataclass(frozen=True)
class ModeOffsets:
    """Offsets ``nu_k + (M - 1)`` obtained from the derivative mode.

    ``v_p'`` solves the eigen-equation with ``nu = -(M - 1)`` exactly but
    misses the boundary condition.  Pairing it with the eigenfunction gives

        (nu_k + (M - 1)) int t^{M-3} psi_k v_p' = -v_p'(1) psi_k'(1),

    which resolves offsets far below the discretization error of ``nu_k``
    when ``psi_k`` is close to ``v_p'`` (``overlap`` near 1).
    """

    identity: np.ndarray
    direct: np.ndarray
    overlap: np.ndarray

    def best(self, min_overlap=0.5):
        """Identity value where the overlap is strong, the direct difference otherwise."""
        return np.where(np.abs(self.overlap) >= min_overlap, self.identity, self.direct)


def derivative_mode_offsets(result, profile):
    """Offsets of the eigenvalues from ``-(M - 1)``; see :class:`ModeOffsets`."""
    if result.boundary_flux is None:
        raise DomainError("offsets need a Dirichlet spectral result")
    t = result.mesh.nodes
    w = profile.dense_eval(t)[1]
    pw = mass_product(result.mesh, result.M, result.psi, w[:, None])[:, 0]
    ww = mass_product(result.mesh, result.M, w, w)
    ident = -w[-1] * result.boundary_flux / pw
    return ModeOffsets(ident, result.nu + (result.M - 1), pw / np.sqrt(ww))


@dataclass(frozen=True, eq=False)
class RescaledEigenfunction:
    """``M~_i^{(2-M)/2} psi_j(r / M~_i)`` on the stretched zone, zero outside."""

    i: int
    j: int
    lo: float
    hi: float
    stretch: float
    nodes: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r > self.lo) & (r < self.hi)
        return np.where(inside, np.interp(r, self.nodes, self.values), 0.0)


def rescale_eigenfunction(result, structure, i, j):
    """Rescale eigenfunction ``j`` (1-based) to the scale of zone ``i`` (0-based)."""
    if not 0 <= i < structure.m:
        raise IndexError(f"zone index {i} outside 0..{structure.m - 1}")
    if not 1 <= j <= result.count:
        raise IndexError(f"eigenfunction index {j} outside 1..{result.count}")
    Mt = float(structure.scaled_extremal_values[i])
    lo, hi = structure.zone(i)
    t = result.mesh.nodes
    keep = (t >= lo) & (t <= hi)
    vals = Mt ** ((2 - result.M) / 2) * result.psi[keep, j - 1]
    nodes = t[keep] * Mt
    # linear interpolation up to the zone ends
    end_vals = Mt ** ((2 - result.M) / 2) * np.interp([lo, hi], t, result.psi[:, j - 1])
    nodes = np.concatenate(([lo * Mt], nodes, [hi * Mt]))
    vals = np.concatenate(([end_vals[0]], vals, [end_vals[1]]))
    nodes, idx = np.unique(nodes, return_index=True)
    return RescaledEigenfunction(i, j, lo * Mt, hi * Mt, Mt, nodes, vals[idx])


@dataclass(frozen=True, eq=False)
class LimitSpectrum:
    """Nonpositive eigenpairs of the limit problem on ``[0, R]`` plus the next eigenvalue."""

    M: float
    R: float
    nu: np.ndarray
    psi: np.ndarray = field(repr=False)
    mesh: GradedMesh = field(repr=False)
    next_eigenvalue: float
    boundary: str

    def closed_form_errors(self):
        """Per eigenpair: (|nu - beta|, sup |psi - eta|) against ``-(M-1), 0`` and
        ``eta_1, eta_2``, each ``eta`` normalized in the discrete B-norm on the mesh
        and sign-matched."""
        betas = [-(self.M - 1), 0.0]
        etas = [eta1, eta2]
        t = self.mesh.nodes
        out = []
        for k in range(min(2, self.nu.size)):
            e = etas[k](self.M, t)
            e = e / np.sqrt(mass_product(self.mesh, self.M, e, e))
            x = self.psi[:, k]
            if np.dot(x, e) < 0:
                x = -x
            out.append((abs(self.nu[k] - betas[k]), float(np.max(np.abs(x - e)))))
        return out


def limit_spectrum(M, R=200.0, n_nodes=DEFAULT_LIMIT_NODES, boundary="robin", nonpositive_tol=1e-3):
    """Eigenpairs of ``-(r^{M-1} psi')' - r^{M-1} W psi = beta r^{M-3} psi`` on ``[0, R]``.

    ``boundary="robin"`` imposes the decay condition ``psi'(R) = -(M-2)/R psi(R)``
    of the zero-energy tail; ``"dirichlet"`` imposes ``psi(R) = 0``.  Returned
    eigenvalues are those ``<= nonpositive_tol``.
    """
    if boundary not in ("robin", "dirichlet"):
        raise DomainError(f"unknown boundary condition {boundary!r}")
    mesh = graded_mesh(0.0, R, n_nodes)
    ops = assemble_pair(mesh, M, lambda r: limit_potential_W(M, r), robin=boundary == "robin")
    # the truncated problem is regular, so the third value need not sit below the Hardy level
    vals, vecs = ops.pencil.lowest(3)
    keep = vals <= nonpositive_tol
    nxt = float(vals[keep.sum()]) if keep.sum() < vals.size else float("nan")
    psi = ops.full_vector(vecs[:, keep])
    return LimitSpectrum(M, R, vals[keep], psi, mesh, nxt, boundary)


__all__ = [
    "GradedMesh", "graded_mesh", "profile_mesh", "weight_moments", "WeightedOperatorPair",
    "assemble_pair", "assemble", "SpectralResult", "negative_spectrum", "lowest_spectrum",
    "solve_spectrum", "mass_product", "ModeOffsets", "derivative_mode_offsets",
    "RescaledEigenfunction", "rescale_eigenfunction", "LimitSpectrum",
    "limit_spectrum",
]
