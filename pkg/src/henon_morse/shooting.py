"""Nodal radial solutions of the radially extended Lane-Emden problem.

The boundary value problem

    -(t^{M-1} v')' = t^{M-1} |v|^{p-1} v   on (0, 1),   v'(0) = 0,  v(1) = 0

is solved by shooting once from ``v(0) = 1`` and rescaling: if the initial
value solution has its m-th zero at ``T``, then
``v_p(t) = T^{2/(p-1)} v_ivp(T t)`` has exactly m nodal zones on [0, 1].
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .closed_forms import ProblemParams, bubble_V
from .errors import DomainError, IntegrationError, NoMthZeroError, StructureError

T_SERIES = 1e-4
T_CAP = 1e30
P_MARGIN = 1e-6
DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12


@dataclass(frozen=True)
class Tolerance:
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL


def _series(M, p, tau):
    # v = 1 - tau^2/(2M) + p tau^4 / (8 M (M+2)) + O(tau^6)
    tau2 = tau * tau
    c4 = p / (8 * M * (M + 2))
    v = 1.0 - tau2 / (2 * M) + c4 * tau2 * tau2
    dv = -tau / M + 4 * c4 * tau2 * tau
    return v, dv


class Trajectory:
    """Dense solution of the initial value problem ``v(0) = 1, v'(0) = 0``.

    Calling the object with an array of ``t >= 0`` returns ``(v, v')``; on
    ``[0, t_series]`` the Taylor start is used, beyond it the integrator's
    dense output.
    """

    def __init__(self, M, p, sol, t_series, zeros):
        self.M = M
        self.p = p
        self.t_series = t_series
        self.t_end = float(sol.t[-1])
        self.t_steps = np.asarray(sol.t)
        self.zeros = np.asarray(zeros, dtype=float)
        self._sol = sol.sol

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any(t > self.t_end * (1 + 1e-12)):
            raise DomainError(f"trajectory evaluated beyond its end t={self.t_end}")
        v = np.empty_like(t)
        dv = np.empty_like(t)
        inner = t <= self.t_series
        if inner.any():
            v[inner], dv[inner] = _series(self.M, self.p, t[inner])
        outer = ~inner
        if outer.any():
            y = self._sol(np.minimum(t[outer], self.t_end))
            v[outer], dv[outer] = y[0], y[1]
        if scalar:
            return v[0], dv[0]
        return v, dv


def integrate_ivp(M, p, t_max, tol=Tolerance(), stop_after_zeros=None):
    """Integrate ``v'' + (M-1)/t v' + |v|^{p-1} v = 0`` from ``v(0)=1, v'(0)=0``.

    Parameters
    ----------
    M, p : float
        Dimension (> 2) and exponent (> 1).
    t_max : float
        End of the integration interval.
    tol : Tolerance
        Relative / absolute tolerances of the DOP853 integrator.
    stop_after_zeros : int, optional
        Stop at the given number of sign changes of ``v``.

    Returns
    -------
    Trajectory
    """
    if not M > 2 or not p > 1 or not t_max > 0:
        raise DomainError(f"integrate_ivp needs M > 2, p > 1, t_max > 0 (got {M}, {p}, {t_max})")
    ts = min(T_SERIES, 0.5 * t_max)
    v0, dv0 = _series(M, p, ts)

    def rhs(t, y):
        v, dv = y
        return [dv, -(M - 1) / t * dv - abs(v) ** (p - 1) * v]

    def crossing(t, y):
        return y[0]

    crossing.terminal = stop_after_zeros if stop_after_zeros else False
    sol = solve_ivp(rhs, (ts, t_max), [v0, dv0], method="DOP853", rtol=tol.rtol,
                    atol=tol.atol, events=crossing, dense_output=True)
    if sol.status == -1:
        raise IntegrationError(f"integration failed: {sol.message}", t_reached=float(sol.t[-1]))
    return Trajectory(M, p, sol, ts, sol.t_events[0])


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Nodal solution ``v_p`` on [0, 1] obtained by rescaling a trajectory.

    ``scale`` is the position ``T`` of the m-th zero of the initial value
    solution, so ``v_p(t) = scale^{2/(p-1)} v_ivp(scale t)``.
    """

    params: ProblemParams
    m: int
    scale: float
    trajectory: Trajectory = field(repr=False)
    grid: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    dv: np.ndarray = field(repr=False)

    @property
    def M(self):
        return self.params.M

    @property
    def p(self):
        return self.params.p

    @property
    def amplitude(self):
        """``v_p(0) = scale^{2/(p-1)}``."""
        return self.scale ** (2 / (self.p - 1))

    def dense_eval(self, t):
        """Return ``(v_p(t), v_p'(t))`` for ``t`` in [0, 1]."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > 1 + 1e-12):
            raise DomainError("profile is defined on [0, 1]")
        w, dw = self.trajectory(self.scale * np.minimum(t, 1.0))
        a = self.amplitude
        return a * w, a * self.scale * dw


def find_nodal_solution(N, alpha, p, m, tol=Tolerance(), margin=P_MARGIN, t_cap=T_CAP):
    """Radial solution with ``m`` nodal zones and ``v_p(0) > 0``.

    Raises
    ------
    DomainError
        For ``p <= 1``, ``m < 1`` or ``p`` within ``margin`` below the
        critical exponent.
    NoMthZeroError
        If fewer than ``m`` zeros occur before ``t_cap`` (in particular for
        ``p >= p_M``).
    """
    params = ProblemParams(N, alpha, p)
    if m < 1:
        raise DomainError(f"number of nodal zones must be >= 1, got {m}")
    if p >= params.p_crit:
        # no nodal solution exists; integrating would only chase roundoff zeros
        raise NoMthZeroError(
            f"no m-th zero: p={p} at or above critical {params.p_crit}",
            zeros_found=0, t_reached=0.0)
    if params.p_crit - margin < p < params.p_crit:
        raise DomainError(
            f"p={p} lies within margin {margin} of the critical exponent {params.p_crit}")
    traj = integrate_ivp(params.M, p, t_cap, tol, stop_after_zeros=m)
    if traj.zeros.size < m:
        raise NoMthZeroError(
            f"no m-th zero: found {traj.zeros.size} of {m} zeros before t={traj.t_end:.3g}"
            f" (p={p}, p_M={params.p_crit}); p at or above critical or t_cap too small",
            zeros_found=int(traj.zeros.size), t_reached=traj.t_end)
    T = float(traj.zeros[m - 1])
    inner = traj.t_steps[traj.t_steps < T] / T
    grid = np.unique(np.concatenate(([0.0], traj.t_series / T * np.linspace(0, 1, 9)[1:], inner, [1.0])))
    prof = RadialProfile(params, m, T, traj, grid, np.empty(0), np.empty(0))
    v, dv = prof.dense_eval(grid)
    v[-1] = 0.0
    object.__setattr__(prof, "v", v)
    object.__setattr__(prof, "dv", dv)
    return prof


def ode_residual(profile, t, h_rel=1e-4):
    """Relative residual of the ODE at interior points ``t``.

    ``v''`` is obtained by central differencing the dense ``v'``; the residual
    ``v'' + (M-1)/t v' + |v|^{p-1} v`` is divided by the sum of the absolute
    values of its three terms.
    """
    t = np.asarray(t, dtype=float)
    h = h_rel * t
    M, p = profile.M, profile.p
    v, dv = profile.dense_eval(t)
    _, dvp = profile.dense_eval(np.minimum(t + h, 1.0))
    _, dvm = profile.dense_eval(t - h)
    hp = np.minimum(t + h, 1.0) - t
    d2v = (dvp - dvm) / (hp + h)
    terms = np.array([d2v, (M - 1) / t * dv, np.abs(v) ** (p - 1) * v])
    return np.abs(terms.sum(axis=0)) / np.abs(terms).sum(axis=0)


@dataclass(frozen=True)
class NodalStructure:
    """Zeros ``t_i``, extremal points ``s_i``, values ``M_i`` and zeros ``xi_i`` of
    ``z_p = t v' + 2/(p-1) v``, all on the [0, 1] scale."""

    p: float
    zeros: np.ndarray
    extremal_points: np.ndarray
    extremal_values: np.ndarray
    z_zeros: np.ndarray

    @property
    def m(self):
        return len(self.zeros)

    @property
    def scaled_extremal_values(self):
        """``M~_i = M_i^{(p-1)/2}``."""
        return self.extremal_values ** ((self.p - 1) / 2)

    def zone(self, i):
        lo = 0.0 if i == 0 else float(self.zeros[i - 1])
        return lo, float(self.zeros[i])


def _sign_changes(f, lo, hi, n):
    x = np.linspace(lo, hi, n)
    y = f(x)
    idx = np.nonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)[0]
    return [(x[k], x[k + 1]) for k in idx]


def _zone_samples(traj, lo, hi, per_step=16):
    steps = traj.t_steps[(traj.t_steps > lo) & (traj.t_steps < hi)]
    knots = np.concatenate(([lo], steps, [hi]))
    pieces = [np.linspace(a, b, per_step, endpoint=False) for a, b in zip(knots[:-1], knots[1:])]
    return np.concatenate(pieces + [[hi]])


def extract_nodal_structure(profile):
    """Locate zeros, extrema and the zeros of ``z_p`` zone by zone.

    Root finding runs on the trajectory (``tau = T t``) where the scales are
    O(1) per zone; results are mapped back to [0, 1].
    """
    traj, T, m, p = profile.trajectory, profile.scale, profile.m, profile.p
    a = 2 / (p - 1)
    amp = profile.amplitude
    Z = np.concatenate(([0.0], traj.zeros[:m]))

    def dv(x):
        return traj(x)[1]

    def z(x):
        w, dw = traj(x)
        return x * dw + a * w

    zeros, s_pts, m_vals, xis = [], [], [], []
    for i in range(m):
        lo, hi = Z[i], Z[i + 1]
        xs = _zone_samples(traj, lo, hi)
        if i == 0:
            s = 0.0
            interior = xs[1:-1]
            if np.any(dv(interior) >= 0):
                raise StructureError("v is not strictly decreasing in its first nodal zone")
        else:
            inner = xs[1:-1]
            d = dv(inner)
            flips = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]
            if len(flips) != 1:
                raise StructureError(f"zone {i}: expected one critical point, found {len(flips)}")
            k = flips[0]
            s = brentq(dv, inner[k], inner[k + 1], xtol=1e-15 * inner[k + 1], rtol=1e-15)
        w_s = traj(s)[0]
        zs = np.concatenate(([s], xs[xs > s]))
        zv = z(zs)
        flips = np.nonzero(np.sign(zv[:-1]) * np.sign(zv[1:]) < 0)[0]
        if len(flips) != 1:
            raise StructureError(f"zone {i}: expected one zero of z_p, found {len(flips)}")
        k = flips[0]
        xi = brentq(z, zs[k], zs[k + 1], xtol=1e-15 * zs[k + 1], rtol=1e-15)
        zeros.append(hi / T)
        s_pts.append(s / T)
        m_vals.append(amp * abs(w_s))
        xis.append(xi / T)
    zeros[-1] = 1.0
    return NodalStructure(p, np.array(zeros), np.array(s_pts), np.array(m_vals), np.array(xis))


def z_p(profile, t):
    """``z_p(t) = t v_p'(t) + 2/(p-1) v_p(t)``."""
    v, dv = profile.dense_eval(t)
    return np.asarray(t) * dv + 2 / (profile.p - 1) * v


def f_p(profile, t):
    """``f_p(t) = p t^2 |v_p(t)|^{p-1}``."""
    v, _ = profile.dense_eval(t)
    return profile.p * np.asarray(t) ** 2 * np.abs(v) ** (profile.p - 1)


@dataclass(frozen=True, eq=False)
class HenonProfile:
    """Radial solution ``u_p`` of the Hénon problem on the unit ball."""

    N: int
    alpha: float
    p: float
    r: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    du: np.ndarray = field(repr=False)
    zeros: np.ndarray
    extremal_points: np.ndarray
    extremal_values: np.ndarray
    source: RadialProfile = field(repr=False)

    def evaluate(self, r):
        """Return ``(u_p(r), u_p'(r))``."""
        r = np.asarray(r, dtype=float)
        k = (2 + self.alpha) / 2
        c = k ** (2 / (self.p - 1))
        t = r ** k
        v, dv = self.source.dense_eval(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            du = np.where(r > 0, c * dv * k * r ** (k - 1), 0.0)
        return c * v, du


def henon_profile(profile, structure=None):
    """Map ``v_p`` back through ``u(r) = ((2+alpha)/2)^{2/(p-1)} v(r^{(2+alpha)/2})``."""
    if structure is None:
        structure = extract_nodal_structure(profile)
    alpha = profile.params.alpha_value
    k = (2 + alpha) / 2
    c = k ** (2 / (profile.p - 1))
    r = profile.grid ** (1 / k)
    hp = HenonProfile(profile.params.N, alpha, profile.p, r, np.empty(0), np.empty(0),
                      structure.zeros ** (1 / k), structure.extremal_points ** (1 / k),
                      c * structure.extremal_values, profile)
    u, du = hp.evaluate(r)
    object.__setattr__(hp, "u", u)
    object.__setattr__(hp, "du", du)
    return hp


def henon_residual(hprof, r, h_rel=1e-4):
    """Relative residual of ``u'' + (N-1)/r u' + r^alpha |u|^{p-1} u`` (cf. :func:`ode_residual`)."""
    r = np.asarray(r, dtype=float)
    h = h_rel * r
    u, du = hprof.evaluate(r)
    rp = np.minimum(r + h, 1.0)
    _, dup = hprof.evaluate(rp)
    _, dum = hprof.evaluate(r - h)
    d2u = (dup - dum) / (rp - r + h)
    terms = np.array([d2u, (hprof.N - 1) / r * du, r ** hprof.alpha * np.abs(u) ** (hprof.p - 1) * u])
    return np.abs(terms.sum(axis=0)) / np.abs(terms).sum(axis=0)


@dataclass(frozen=True, eq=False)
class RescaledZone:
    """``v~_i(t) = (-1)^i / M_i * v_p(t / M~_i)`` on ``(t_i M~_i, t_{i+1} M~_i)``,
    zero outside."""

    i: int
    lo: float
    hi: float
    peak: float
    amplitude: float
    stretch: float
    profile: RadialProfile = field(repr=False)

    def evaluate(self, t):
        """Return ``(v~, v~')``; both vanish outside the zone."""
        t = np.asarray(t, dtype=float)
        inside = (t >= self.lo) & (t < self.hi)
        s = np.where(inside, t / self.stretch, 0.0)
        v, dv = self.profile.dense_eval(s)
        sign = -1.0 if self.i % 2 else 1.0
        val = np.where(inside, sign * v / self.amplitude, 0.0)
        der = np.where(inside, sign * dv / (self.amplitude * self.stretch), 0.0)
        return val, der

    def __call__(self, t):
        return self.evaluate(t)[0]


def rescale_zone(profile, structure, i):
    """Blow up the ``i``-th nodal zone (0-based) to unit height."""
    if not 0 <= i < structure.m:
        raise IndexError(f"zone index {i} outside 0..{structure.m - 1}")
    Mi = float(structure.extremal_values[i])
    Mt = float(structure.scaled_extremal_values[i])
    lo, hi = structure.zone(i)
    return RescaledZone(i, lo * Mt, hi * Mt, float(structure.extremal_points[i]) * Mt, Mi, Mt, profile)


def bubble_distance(zone, lo=0.1, hi=10.0, n=2001):
    """Sup distance between a rescaled zone and ``V_M`` on a geometric grid of ``[lo, hi]``."""
    t = np.geomspace(lo, hi, n)
    return float(np.max(np.abs(zone(t) - bubble_V(zone.profile.M, t))))


@dataclass(frozen=True)
class ZoneEnergy:
    i: int
    grad: float
    pot: float

    @property
    def mismatch(self):
        return abs(self.grad - self.pot) / self.grad


@dataclass(frozen=True)
class EnergyReport:
    zones: list
    derivative_bound_C: float
    first_zone_bound_ok: bool
    first_zone_bound_excess: float

    @property
    def max_mismatch(self):
        return max(z.mismatch for z in self.zones)


def _zone_integral(traj, f, lo, hi):
    knots = np.concatenate(([lo], traj.t_steps[(traj.t_steps > lo) & (traj.t_steps < hi)], [hi]))
    if lo < traj.t_series < hi:
        knots = np.unique(np.append(knots, traj.t_series))
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        val, _ = quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=100)
        total += val
    return total


def nehari_energy_check(profile, structure, bound_rtol=1e-12):
    """Per-zone energies plus the derivative and first-zone pointwise bounds.

    Zone energies ``int t^{M-1} |v'|^2`` and ``int t^{M-1} |v|^{p+1}`` are
    computed by adaptive quadrature in trajectory coordinates and scaled by
    ``T^{2(p+1)/(p-1) - M}``.  ``derivative_bound_C`` is the smallest ``C``
    with ``|v_p'(t)| <= C t^{(2 - p(M-2))/2}`` on the profile grid.  The
    first-zone bound ``|v_p| <= M_0 V_M(M~_0 t)`` is tested on the grid with
    relative slack ``bound_rtol``.
    """
    traj, T, M, p = profile.trajectory, profile.scale, profile.M, profile.p
    Z = np.concatenate(([0.0], traj.zeros[:profile.m]))
    factor = T ** (2 * (p + 1) / (p - 1) - M)

    def grad(x):
        return x ** (M - 1) * traj(x)[1] ** 2

    def pot(x):
        return x ** (M - 1) * abs(traj(x)[0]) ** (p + 1)

    zones = []
    for i in range(profile.m):
        g = _zone_integral(traj, grad, Z[i], Z[i + 1])
        q = _zone_integral(traj, pot, Z[i], Z[i + 1])
        zones.append(ZoneEnergy(i, factor * g, factor * q))

    t = profile.grid[1:]
    expo = (2 - p * (M - 2)) / 2
    C = float(np.max(np.abs(profile.dv[1:]) / t ** expo))

    M0 = structure.extremal_values[0]
    Mt0 = structure.scaled_extremal_values[0]
    first = profile.grid[profile.grid < structure.zeros[0]]
    bound = M0 * bubble_V(M, Mt0 * first)
    v1 = np.abs(profile.dense_eval(first)[0])
    excess = float(np.max((v1 - bound) / M0))
    return EnergyReport(zones, C, bool(excess <= bound_rtol), excess)
