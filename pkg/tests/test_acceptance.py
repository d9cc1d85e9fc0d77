"""End-to-end acceptance run: one pass/fail line per criterion."""

import math
import time

import numpy as np

from henon_morse.bessel import J_from_beta, base_order, nth_zero, p1_limit_morse, solve_beta
from henon_morse.closed_forms import (
    bubble_U,
    bubble_V,
    critical_exponent,
    critical_exponent_M,
    eta1,
    eta2,
    fractional_dimension,
    limit_potential_W,
    xi_bar,
)
from henon_morse.morse import limit_morse_index, lower_bound, morse_index
from henon_morse.shooting import (
    extract_nodal_structure,
    find_nodal_solution,
    nehari_energy_check,
)
from henon_morse.spectrum import limit_spectrum
from henon_morse.sweep import SweepSpec, run_sweep

from conftest import ACCEPTANCE_LINES, SPECTRAL_INSTANCES
from oracles import F_decimal, fd_second, golden_max_decimal, relative_residual, rk4_first_zero


class Criterion:
    """Collects named checks, records the summary line, then asserts."""

    def __init__(self, number, title, budget):
        self.number, self.title, self.budget = number, title, budget
        self.failures = []

    def check(self, ok, what):
        if not ok:
            self.failures.append(what)

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        if exc_type is not None:
            self.failures.append(f"{exc_type.__name__}: {exc}")
        self.check(elapsed < self.budget, f"runtime {elapsed:.1f}s over {self.budget}s")
        status = "PASS" if not self.failures else "FAIL"
        detail = "" if not self.failures else " -- " + "; ".join(self.failures)
        line = f"[{status}] {self.number}. {self.title} ({elapsed:.2f}s / {self.budget}s){detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        if exc_type is None:
            assert not self.failures, line
        return False


def test_1_closed_forms():
    with Criterion(1, "closed-form suite", 1.0) as c:
        for N in range(3, 9):
            for a in (0, 0.5, 1, 2, 3.7):
                c.check(abs(critical_exponent(N, a) - critical_exponent_M(fractional_dimension(N, a)))
                        <= 1e-15 * critical_exponent(N, a), f"exponent consistency ({N}, {a})")
        for M in (2.5, 8 / 3, 3, 4, 5.5):
            t = np.geomspace(0.01, 100, 400)
            d1, d2 = fd_second(lambda s: bubble_V(M, s), t, 1e-2 * t)
            pM = (M + 2) / (M - 2)
            res = relative_residual([d2, (M - 1) / t * d1, bubble_V(M, t) ** pM]).max()
            c.check(res < 1e-6, f"V residual M={M}: {res:.1e}")
            r = np.linspace(0, 100, 1001)
            w = np.max(np.abs(limit_potential_W(M, r) / (pM * bubble_V(M, r) ** (pM - 1)) - 1))
            c.check(w < 1e-14, f"W identity M={M}: {w:.1e}")
        for N, a in ((3, 0), (3, 1), (4, 2), (5, 0.7)):
            r = np.geomspace(0.05, 50, 300)
            d1, d2 = fd_second(lambda s: bubble_U(N, a, s), r, 1e-2 * r)
            pa = critical_exponent(N, a)
            res = relative_residual([d2, (N - 1) / r * d1, r ** a * bubble_U(N, a, r) ** pa]).max()
            c.check(res < 1e-6, f"U residual ({N}, {a}): {res:.1e}")
        for M in (8 / 3, 3, 4):
            r = np.geomspace(0.1, 50, 400)
            for f, beta in ((eta1, -(M - 1)), (eta2, 0.0)):
                d1, d2 = fd_second(lambda s: f(M, s), r, 1e-2 * r)
                res = relative_residual([d2, (M - 1) / r * d1, limit_potential_W(M, r) * f(M, r),
                                         beta / r ** 2 * f(M, r)]).max()
                c.check(res < 1e-6, f"eta residual M={M}: {res:.1e}")
        for M in (3, 8 / 3, 4):
            oracle = golden_max_decimal(F_decimal(M), 1e-3, 50.0)
            c.check(abs(xi_bar(M) - oracle) <= 1e-10 * oracle, f"xi_bar M={M}")
            c.check(abs(xi_bar(M) - math.sqrt(M * (M - 2))) <= 1e-15 * xi_bar(M), f"xi_bar closed form M={M}")


def test_2_solver():
    with Criterion(2, "solver suite", 30.0) as c:
        prof = find_nodal_solution(3, 0, 3.0, 1)
        T = rk4_first_zero(3.0, 3.0, h=1e-5)
        rel = abs(prof.amplitude - T) / T
        c.check(rel < 1e-7, f"fixed-step oracle: {rel:.1e}")
        for N, a, p, m in ((3, 0, 4.5, 1), (3, 0, 4.5, 2), (3, 0, 4.5, 3), (3, 1.5, 6.0, 2)):
            pr = find_nodal_solution(N, a, p, m)
            rep = nehari_energy_check(pr, extract_nodal_structure(pr))
            c.check(rep.max_mismatch < 1e-6, f"Nehari ({N},{a},{p},{m}): {rep.max_mismatch:.1e}")
            c.check(rep.first_zone_bound_ok, f"first-zone bound ({N},{a},{p},{m})")
        two = find_nodal_solution(3, 0, 4.9, 2)
        t1 = extract_nodal_structure(two).zeros[0]
        one = find_nodal_solution(3, 0, 4.9, 1)
        r = np.linspace(0, 1, 4001)
        w = t1 ** (2 / 3.9) * two.dense_eval(t1 * r)[0]
        d = np.max(np.abs(w - one.dense_eval(r)[0])) / one.amplitude
        c.check(d < 1e-7, f"zone restriction: {d:.1e}")


SPECTRAL_CASES = ((3, 0, 2, 4.5), (3, 0, 2, 4.9), (3, 1, 2, 6.5), (4, 2, 2, 4.5))


def test_3_spectral_structure(solve_instance):
    with Criterion(3, "spectral structure", 120.0) as c:
        for inst in SPECTRAL_CASES:
            N, a, m, p = inst
            prof, st, spec, off = solve_instance(*inst)
            M = prof.M
            c.check(spec.count == m, f"{inst}: {spec.count} negative eigenvalues")
            if spec.count != m:
                continue
            c.check(bool(np.all(np.diff(spec.nu) > 0)), f"{inst}: ordering")
            c.check(bool(np.all(spec.nu[:-1] < -(M - 1))), f"{inst}: nu_i < -(M-1)")
            c.check(-(M - 1) < spec.nu[-1] < 0, f"{inst}: -(M-1) < nu_m < 0")
            # the same sides from the derivative-mode offsets nu_i + (M-1)
            c.check(bool(np.all(off[:-1] < 0)) and off[-1] > 0, f"{inst}: offset signs")
            err = np.max(np.abs(spec.b_gram() - np.eye(m)))
            c.check(err < 1e-8, f"{inst}: orthonormality {err:.1e}")
            c.check([spec.sign_changes(k) for k in range(m)] == list(range(m)), f"{inst}: oscillation")


def test_4_limit_spectrum():
    with Criterion(4, "limit spectrum", 60.0) as c:
        for M in (3.0, 8 / 3, 4.0):
            ls = limit_spectrum(M, R=200.0, n_nodes=8000)
            c.check(ls.nu.size == 2, f"M={M:.4g}: {ls.nu.size} nonpositive eigenvalues")
            for k, (de, dpsi) in enumerate(ls.closed_form_errors()):
                c.check(de < 1e-3, f"M={M:.4g} beta_{k + 1} error {de:.1e}")
                c.check(dpsi < 1e-2, f"M={M:.4g} eta_{k + 1} sup error {dpsi:.1e}")
            c.check(ls.next_eigenvalue > 0, f"M={M:.4g}: third eigenvalue {ls.next_eigenvalue}")


SWEEPS = {}


def _sweep(N, alpha, m):
    if (N, alpha, m) not in SWEEPS:
        SWEEPS[(N, alpha, m)] = run_sweep(SweepSpec(N, alpha, m))
    return SWEEPS[(N, alpha, m)]


def test_5_trends():
    with Criterion(5, "asymptotic trends", 300.0) as c:
        rep = _sweep(3, 0, 2)
        c.check(list(rep.spec.schedule) == [4.5, 4.875, 4.96875, 4.9921875], "schedule")
        c.check(all(r["status"] == "ok" for r in rep.records), "all points solved")
        expected = {"M_0", "M_1", "t_1", "s_1", "|nu_1 + (M-1)|", "|nu_2 + (M-1)|",
                    "bubble_distance_0", "bubble_distance_1", "xi_0 M~_0 - xi_bar", "xi_1 M~_1 - xi_bar"}
        c.check(expected <= set(rep.verdicts), "verdict set")
        for name, v in sorted(rep.verdicts.items()):
            c.check(v["pass"], f"{name} not monotone: {v['values']}")


def test_6_morse_reproduction():
    with Criterion(6, "Morse index reproduction", 180.0) as c:
        c.check(limit_morse_index(4, 2, 2) == 19, "even-alpha branch value")
        for (N, a, m), want in (((3, 0, 1), 1), ((3, 0, 2), 5), ((3, 1, 1), 4), ((3, 1, 2), 8),
                                ((4, 2, 2), limit_morse_index(4, 2, 2))):
            rep = _sweep(N, a, m)
            last = rep.records[-1]
            c.check(last["status"] == "ok" and last["morse_total"] == want,
                    f"({N},{a},{m}) total {last.get('morse_total')} != {want}")
            for r in rep.records:
                c.check(r["status"] == "ok" and not r["degenerate"], f"({N},{a},{m}) p={r['p']} degenerate")


def test_7_bessel():
    with Criterion(7, "Bessel suite", 10.0) as c:
        for k in range(1, 11):
            c.check(abs(nth_zero(0.5, k) - k * math.pi) < 1e-10, f"j_(1/2,{k})")
        for N, a, m in ((3, 0, 2), (3, 0, 3), (3, 1, 2), (4, 2, 2)):
            target = nth_zero(base_order(N, a), m)
            for i in range(1, m):
                b = solve_beta(N, a, m, i)
                c.check(abs(nth_zero(b, i) - target) < 1e-9, f"beta residual ({N},{a},{m},{i})")
                c.check(J_from_beta(N, a, b) > (2 + a) * (m - i), f"J_i inequality ({N},{a},{m},{i})")
        c.check(p1_limit_morse(3, 0, 2) > 5, "p1 index (3,0,2) > 5")
        for N, a in ((3, 0), (3, 1), (4, 2)):
            c.check(p1_limit_morse(N, a, 1) == 1, f"p1 index ({N},{a},1)")


def test_8_lower_bound(solve_instance):
    with Criterion(8, "lower-bound consistency", math.inf) as c:
        for inst in SPECTRAL_INSTANCES:
            N, a, m, p = inst
            _, _, spec, off = solve_instance(*inst)
            rep = morse_index(spec, N, a, offsets=off)
            c.check(rep.total >= lower_bound(N, a, m), f"{inst}: {rep.total} < {lower_bound(N, a, m)}")
        for rep in SWEEPS.values():
            for r in rep.records:
                if r["status"] == "ok":
                    c.check(r["morse_total"] >= r["lower_bound"], f"sweep p={r['p']}")
