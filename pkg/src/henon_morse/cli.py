"""Command-line front end.

Every run produces one JSON document (schema ``henon-morse/1``) that echoes
parameters and tolerances.  With ``--out DIR`` the document is written to
``DIR/<command>.json`` together with columnar CSV files that it references
by relative path.  ``--format csv`` prints the main table of the run instead
of the document.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .bessel import base_order, p1_limit_morse, p1_report
from .closed_forms import ProblemParams, critical_exponent, fractional_dimension, hardy_threshold
from .errors import DomainError, NumericalError
from .morse import DEGENERACY_TOL, exact_alpha, limit_morse_index, morse_index
from .shooting import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    Tolerance,
    extract_nodal_structure,
    find_nodal_solution,
    nehari_energy_check,
)
from .spectrum import (
    DEFAULT_LIMIT_NODES,
    DEFAULT_NODES,
    NEGATIVE_TOL,
    derivative_mode_offsets,
    limit_spectrum,
    solve_spectrum,
)
from .sweep import SweepSpec, run_sweep

SCHEMA = "henon-morse/1"
EXIT_OK, EXIT_PRECONDITION, EXIT_NUMERICAL = 0, 2, 3


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def dump_document(doc):
    """Canonical JSON text (sorted keys, fixed indentation)."""
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"


def _csv_text(columns):
    names = list(columns)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in zip(*(columns[n] for n in names)):
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _rows_csv(rows):
    if not rows:
        return ""
    names = list(rows[0])
    cols = {n: [_flat(r.get(n)) for r in rows] for n in names}
    return _csv_text(cols)


def _flat(v):
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(repr(float(x)) if isinstance(x, (float, np.floating)) else str(x) for x in v)
    return v


class Run:
    """Collects the document, the main table and columnar files of one command."""

    def __init__(self, command, args):
        self.doc = {"schema": SCHEMA, "version": __version__, "command": command,
                    "units": "dimensionless"}
        self.table = []
        self.files = {}
        self.args = args

    def add_file(self, name, columns):
        self.files[name] = columns
        self.doc.setdefault("files", {})[name.split(".")[0]] = name

    def emit(self, stream):
        out = self.args.out
        if out:
            os.makedirs(out, exist_ok=True)
            for name, cols in self.files.items():
                with open(os.path.join(out, name), "w", newline="") as fh:
                    fh.write(_csv_text(cols))
            with open(os.path.join(out, f"{self.doc['command']}.json"), "w") as fh:
                fh.write(dump_document(self.doc))
        else:
            self.doc.pop("files", None)
        if self.args.format == "csv":
            stream.write(_rows_csv(self.table))
        else:
            stream.write(dump_document(self.doc))


def _tolerances(args, **extra):
    tol = {"rtol": args.rtol, "atol": args.atol}
    tol.update(extra)
    return tol


def _params(args, need_p=True):
    alpha = args.alpha
    exact_alpha(alpha)
    if float(alpha) < 0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    if args.N < 3:
        raise DomainError(f"N must be >= 3, got {args.N}")
    if args.m is not None and args.m < 1:
        raise DomainError(f"m must be >= 1, got {args.m}")
    pc = critical_exponent(args.N, float(alpha))
    out = {"N": args.N, "alpha": alpha, "m": args.m, "M": fractional_dimension(args.N, float(alpha)),
           "p_crit": pc}
    if need_p:
        if args.p is None:
            raise DomainError("-p is required for this command")
        if args.p >= pc:
            raise DomainError(f"no m-th zero: p at or above critical (p={args.p}, p_alpha={pc})")
        ProblemParams(args.N, float(alpha), args.p)
        out["p"] = args.p
    return out


def _solve(args):
    prof = find_nodal_solution(args.N, float(args.alpha), args.p, args.m,
                               tol=Tolerance(args.rtol, args.atol))
    return prof, extract_nodal_structure(prof)


def _structure_dict(st):
    return {
        "zeros": st.zeros,
        "extremal_points": st.extremal_points,
        "extremal_values": st.extremal_values,
        "scaled_extremal_values": st.scaled_extremal_values,
        "z_zeros": st.z_zeros,
    }


def cmd_solve(args, run):
    run.doc["parameters"] = _params(args)
    run.doc["tolerances"] = _tolerances(args)
    prof, st = _solve(args)
    energy = nehari_energy_check(prof, st)
    monotone = bool(np.all(np.diff(st.extremal_values) < 0))
    ordered = all(
        (0.0 if i == 0 else st.zeros[i - 1]) <= st.extremal_points[i] < st.z_zeros[i] < st.zeros[i]
        for i in range(st.m))
    run.doc["result"] = {
        "zones": st.m,
        "amplitude": prof.amplitude,
        "shooting_scale": prof.scale,
        **_structure_dict(st),
        "nehari_mismatch": [z.mismatch for z in energy.zones],
        "derivative_bound_C": energy.derivative_bound_C,
        "checks": {
            "extremal_values_decreasing": monotone,
            "zone_ordering": ordered,
            "first_zone_pointwise_bound": energy.first_zone_bound_ok,
            "nehari_below_1e-6": energy.max_mismatch < 1e-6,
        },
    }
    run.table = [{"zone": i, "zero": st.zeros[i], "extremal_point": st.extremal_points[i],
                  "extremal_value": st.extremal_values[i], "z_zero": st.z_zeros[i],
                  "nehari_mismatch": energy.zones[i].mismatch} for i in range(st.m)]
    run.add_file("profile.csv", {"t": prof.grid, "v": prof.v, "dv": prof.dv})


def _spectrum(args):
    prof, st = _solve(args)
    spec = solve_spectrum(prof, st, n_nodes=args.mesh_nodes)
    offsets = derivative_mode_offsets(spec, prof).best()
    return prof, st, spec, offsets


def _bound_checks(spec, offsets, m):
    k = spec.count
    checks = {"count_equals_m": k == m,
              "strictly_ordered": bool(np.all(np.diff(spec.nu) > 0)),
              "below_hardy_threshold": bool(np.all(spec.nu < spec.hardy_threshold))}
    if k:
        checks["nu_i_below_limit_for_i_lt_m"] = bool(np.all(offsets[:-1] < 0))
        checks["nu_m_between_limit_and_0"] = bool(offsets[-1] > 0 and spec.nu[-1] < 0)
    return checks


def cmd_spectrum(args, run):
    run.doc["parameters"] = _params(args)
    run.doc["tolerances"] = _tolerances(args, mesh_nodes=args.mesh_nodes, negative_threshold=NEGATIVE_TOL)
    prof, st, spec, offsets = _spectrum(args)
    gram = spec.b_gram()
    run.doc["result"] = {
        "nu": spec.nu,
        "nu_plus_M_minus_1": offsets,
        "hardy_threshold": spec.hardy_threshold,
        "orthonormality_error": float(np.max(np.abs(gram - np.eye(spec.count)))) if spec.count else 0.0,
        "sign_changes": [spec.sign_changes(j) for j in range(spec.count)],
        "checks": _bound_checks(spec, offsets, args.m),
    }
    run.table = [{"i": i + 1, "nu": spec.nu[i], "nu_plus_M_minus_1": offsets[i],
                  "sign_changes": spec.sign_changes(i)} for i in range(spec.count)]
    cols = {"t": spec.mesh.nodes}
    for j in range(spec.count):
        cols[f"psi_{j + 1}"] = spec.psi[:, j]
    run.add_file("eigenfunctions.csv", cols)


def cmd_morse(args, run):
    run.doc["parameters"] = _params(args)
    run.doc["tolerances"] = _tolerances(args, mesh_nodes=args.mesh_nodes, negative_threshold=NEGATIVE_TOL,
                                        degeneracy_tol=DEGENERACY_TOL, integer_flag_tol=1e-12)
    prof, st, spec, offsets = _spectrum(args)
    rep = morse_index(spec, args.N, args.alpha, offsets=offsets)
    res = rep.as_dict()
    res["nu_plus_M_minus_1"] = offsets
    res["p1_limit_morse"] = p1_limit_morse(args.N, float(args.alpha), args.m)
    res["matches_limit_prediction"] = rep.total == rep.limit_prediction
    res["at_least_lower_bound"] = rep.total >= rep.lower_bound
    run.doc["result"] = res
    run.table = [{"i": i + 1, "nu": rep.nu[i], "J": rep.J[i], "contribution": rep.contributions[i]}
                 for i in range(rep.radial_index)]


def cmd_sweep(args, run):
    params = _params(args, need_p=False)
    schedule = None
    if args.schedule:
        schedule = tuple(float(x) for x in args.schedule.split(","))
    spec = SweepSpec(args.N, args.alpha, args.m, schedule, args.mesh_nodes, args.rtol, args.atol,
                     args.workers)
    params["schedule"] = spec.schedule
    run.doc["parameters"] = params
    run.doc["tolerances"] = _tolerances(args, mesh_nodes=args.mesh_nodes, negative_threshold=NEGATIVE_TOL,
                                        degeneracy_tol=DEGENERACY_TOL, trend_window=3)
    rep = run_sweep(spec, workers=args.workers)
    run.doc["result"] = {"records": rep.records, "verdicts": rep.verdicts, "all_pass": rep.all_pass}
    run.table = rep.records
    keys = ["p", "morse_total", "limit_prediction", "degeneracy_distance"]
    ok = [r for r in rep.records if r["status"] == "ok"]
    cols = {k: [r[k] for r in ok] for k in keys}
    for i in range(args.m):
        cols[f"M_{i}"] = [r["extremal_values"][i] for r in ok]
        cols[f"nu_{i + 1}"] = [r["nu"][i] for r in ok]
    run.add_file("sweep.csv", cols)


def cmd_limit_check(args, run):
    params = _params(args, need_p=False)
    M = params["M"]
    params.update({"R": args.R, "boundary": args.boundary})
    run.doc["parameters"] = params
    nodes = args.mesh_nodes or DEFAULT_LIMIT_NODES
    run.doc["tolerances"] = {"mesh_nodes": nodes, "eigenvalue_abs": 1e-3, "eigenfunction_sup": 1e-2}
    ls = limit_spectrum(M, R=args.R, n_nodes=nodes, boundary=args.boundary)
    errs = ls.closed_form_errors()
    run.doc["result"] = {
        "beta": ls.nu,
        "closed_form_beta": [-(M - 1), 0.0],
        "eigenvalue_errors": [e[0] for e in errs],
        "eigenfunction_sup_errors": [e[1] for e in errs],
        "next_eigenvalue": ls.next_eigenvalue,
        "hardy_threshold": hardy_threshold(M),
        "checks": {
            "two_nonpositive": ls.nu.size == 2,
            "eigenvalues_within_1e-3": len(errs) == 2 and all(e[0] < 1e-3 for e in errs),
            "eigenfunctions_within_1e-2": len(errs) == 2 and all(e[1] < 1e-2 for e in errs),
            "third_positive": ls.next_eigenvalue > 0,
        },
    }
    run.table = [{"k": k + 1, "beta": ls.nu[k], "error": errs[k][0], "sup_error": errs[k][1]}
                 for k in range(len(errs))]
    cols = {"r": ls.mesh.nodes}
    for k in range(ls.nu.size):
        cols[f"psi_{k + 1}"] = ls.psi[:, k]
    run.add_file("limit_eigenfunctions.csv", cols)


def cmd_bessel(args, run):
    params = _params(args, need_p=False)
    params["base_order"] = base_order(args.N, float(args.alpha))
    run.doc["parameters"] = params
    run.doc["tolerances"] = {"zero_xtol": 1e-14, "beta_xtol": 1e-13}
    rows = p1_report(args.N, float(args.alpha), args.m)
    p1 = p1_limit_morse(args.N, float(args.alpha), args.m)
    lim = limit_morse_index(args.N, args.alpha, args.m)
    run.doc["result"] = {
        "zones": rows,
        "p1_limit_morse": p1,
        "limit_morse_index": lim,
        "index_changes_along_p": p1 != lim,
        "margins_positive": all(r["margin"] > 0 for r in rows),
    }
    run.table = rows


COMMANDS = {
    "solve": cmd_solve,
    "spectrum": cmd_spectrum,
    "morse": cmd_morse,
    "sweep": cmd_sweep,
    "limit-check": cmd_limit_check,
    "bessel": cmd_bessel,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-N", type=int, required=True, help="space dimension (>= 3)")
    common.add_argument("-a", "--alpha", default="0", help="weight exponent, decimal string (default 0)")
    common.add_argument("--rtol", type=float, default=DEFAULT_RTOL)
    common.add_argument("--atol", type=float, default=DEFAULT_ATOL)
    common.add_argument("--out", help="directory for the JSON document and CSV files")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="henon-morse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, need_p=True, need_m=True, mesh_default=DEFAULT_NODES, help=None):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.add_argument("-p", type=float, required=need_p, help="nonlinearity exponent")
        sp.add_argument("-m", type=int, required=need_m, default=None, help="number of nodal zones")
        sp.add_argument("--mesh-nodes", type=int, default=mesh_default)
        return sp

    add("solve", help="nodal radial solution and its structure")
    add("spectrum", help="negative singular radial eigenvalues")
    add("morse", help="Morse index report")
    sp = add("sweep", need_p=False, help="pipeline along a p schedule")
    sp.add_argument("--schedule", help="comma separated p values (default p_M - 0.5*4^-k, k=0..3)")
    sp.add_argument("--workers", type=int, default=None)
    sp = add("limit-check", need_p=False, need_m=False, mesh_default=DEFAULT_LIMIT_NODES,
             help="limit eigenproblem against closed forms")
    sp.add_argument("-R", type=float, default=200.0)
    sp.add_argument("--boundary", choices=("robin", "dirichlet"), default="robin")
    add("bessel", need_p=False, help="p -> 1 Bessel characterization")
    return parser


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    run = Run(args.command, args)
    try:
        COMMANDS[args.command](args, run)
    except DomainError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_PRECONDITION
    except NumericalError as exc:
        stderr.write(f"numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERICAL
    run.emit(stdout)
    return EXIT_OK


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
