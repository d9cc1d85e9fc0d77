"""Parameter sweeps toward the critical exponent.

Each sweep point runs the whole pipeline (shooting, nodal structure,
singular spectrum, Morse index) and is reduced to a plain record of numbers.
Trend verdicts are computed from those records only.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import os

import numpy as np

from .closed_forms import ProblemParams, critical_exponent, xi_bar
from .errors import DomainError, NumericalError
from .morse import exact_alpha, morse_index
from .shooting import (
    Tolerance,
    bubble_distance,
    extract_nodal_structure,
    f_p,
    find_nodal_solution,
    nehari_energy_check,
    rescale_zone,
)
from .spectrum import DEFAULT_NODES, derivative_mode_offsets, solve_spectrum

TREND_WINDOW = 3


def default_schedule(N, alpha, d0=0.5, rho=0.25, n=4):
    """``p_k = p_M - d0 rho^k`` for ``k = 0..n-1``."""
    pc = critical_exponent(N, float(alpha))
    return tuple(pc - d0 * rho ** k for k in range(n))


@dataclass(frozen=True)
class SweepSpec:
    N: int
    alpha: object
    m: int
    schedule: tuple = None
    n_nodes: int = DEFAULT_NODES
    rtol: float = Tolerance.rtol
    atol: float = Tolerance.atol
    workers: int = None

    def __post_init__(self):
        if self.schedule is None:
            object.__setattr__(self, "schedule", default_schedule(self.N, self.alpha))
        sched = tuple(float(p) for p in self.schedule)
        object.__setattr__(self, "schedule", sched)
        if self.m < 1:
            raise DomainError(f"m must be >= 1, got {self.m}")
        pc = critical_exponent(self.N, float(self.alpha))
        if not sched:
            raise DomainError("empty p schedule")
        if any(not 1 < p < pc for p in sched):
            raise DomainError(f"schedule must lie in (1, {pc})")
        if any(b <= a for a, b in zip(sched[:-1], sched[1:])):
            raise DomainError("schedule must be strictly increasing")


def _floats(x):
    return [float(v) for v in np.ravel(x)]


def run_point(N, alpha, m, p, n_nodes=DEFAULT_NODES, rtol=Tolerance.rtol, atol=Tolerance.atol):
    """Full pipeline at one ``p``; returns a JSON-friendly record.

    Numerical failures are caught and recorded under ``"error"``.
    """
    rec = {"p": float(p), "status": "ok"}
    try:
        prof = find_nodal_solution(N, float(alpha), p, m, tol=Tolerance(rtol, atol))
        st = extract_nodal_structure(prof)
        energy = nehari_energy_check(prof, st)
        spec = solve_spectrum(prof, st, n_nodes=n_nodes)
        offsets = derivative_mode_offsets(spec, prof).best()
        report = morse_index(spec, N, alpha, offsets=offsets)
    except NumericalError as exc:
        rec["status"] = "error"
        rec["error"] = f"{type(exc).__name__}: {exc}"
        return rec
    M = prof.M
    xb = xi_bar(M)
    rec.update({
        "zeros": _floats(st.zeros),
        "extremal_points": _floats(st.extremal_points),
        "extremal_values": _floats(st.extremal_values),
        "scaled_extremal_values": _floats(st.scaled_extremal_values),
        "z_zeros": _floats(st.z_zeros),
        "xi_scaled_distance": _floats(np.abs(st.z_zeros * st.scaled_extremal_values - xb)),
        "bubble_distance": [bubble_distance(rescale_zone(prof, st, i)) for i in range(m)],
        "f_p_max": float(np.max(f_p(prof, prof.grid))),
        "nehari_max_mismatch": energy.max_mismatch,
        "first_zone_bound_ok": energy.first_zone_bound_ok,
        "nu": _floats(spec.nu),
        "nu_offset": _floats(offsets),
        "J": list(report.J),
        "morse_total": report.total,
        "radial_index": report.radial_index,
        "limit_prediction": report.limit_prediction,
        "lower_bound": report.lower_bound,
        "degenerate": bool(report.degenerate),
        "degeneracy_distance": report.degeneracy_distance,
        "one_sided_split": report.one_sided_split,
    })
    return rec


def _strictly_monotone(values, direction):
    v = np.asarray(values, dtype=float)
    d = np.diff(v)
    return bool(np.all(d > 0)) if direction == "increasing" else bool(np.all(d < 0))


def trend_verdicts(records, m, window=TREND_WINDOW):
    """Trend checks over the last ``window`` successful records.

    Returns a dict ``name -> {"direction", "values", "pass"}`` where
    ``values`` are the last ``window`` values of the tracked quantity.
    """
    ok = [r for r in records if r.get("status") == "ok"]
    tail = ok[-window:]
    checks = {}

    def add(name, direction, getter):
        vals = [getter(r) for r in tail]
        passed = len(tail) == window and _strictly_monotone(vals, direction)
        checks[name] = {"direction": direction, "values": vals, "pass": passed}

    for i in range(m):
        add(f"M_{i}", "increasing", lambda r, i=i: r["extremal_values"][i])
    for i in range(1, m):
        add(f"t_{i}", "decreasing", lambda r, i=i: r["zeros"][i - 1])
        add(f"s_{i}", "decreasing", lambda r, i=i: r["extremal_points"][i])
    for i in range(m):
        add(f"|nu_{i + 1} + (M-1)|", "decreasing", lambda r, i=i: abs(r["nu_offset"][i]))
        add(f"bubble_distance_{i}", "decreasing", lambda r, i=i: r["bubble_distance"][i])
        add(f"xi_{i} M~_{i} - xi_bar", "decreasing", lambda r, i=i: r["xi_scaled_distance"][i])
    return checks


@dataclass(frozen=True)
class SweepReport:
    spec: SweepSpec
    records: list = field(repr=False)
    verdicts: dict = field(repr=False)

    @property
    def all_pass(self):
        return all(v["pass"] for v in self.verdicts.values())


def _point(args):
    return run_point(*args)


def run_sweep(spec, workers=None):
    """Run every schedule point (in a process pool) and merge in schedule order."""
    workers = workers or spec.workers or os.cpu_count() or 1
    # validates alpha early, before spawning workers
    exact_alpha(spec.alpha)
    ProblemParams(spec.N, float(spec.alpha), spec.schedule[0])
    jobs = [(spec.N, spec.alpha, spec.m, p, spec.n_nodes, spec.rtol, spec.atol) for p in spec.schedule]
    if workers == 1 or len(jobs) == 1:
        records = [_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_point, jobs))
    return SweepReport(spec, records, trend_verdicts(records, spec.m))


__all__ = ["default_schedule", "SweepSpec", "run_point", "trend_verdicts", "SweepReport", "run_sweep"]
