"""Command-line front end.

Every subcommand writes CSV or JSON to standard output or ``--out``.
Exit status: 0 on success, 2 on a parameter error, 3 on a numerical
failure.  Stochastic commands echo their seed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import exponents, polytope_geometry as pg, recovery_lab as rl, thresholds
from ._parallel import default_jobs
from .errors import NumericalError, ParameterError

EXIT_OK = 0
EXIT_PARAM = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARAM, f"{self.prog}: error: {message}\n")


def parse_grid(text):
    """``start:stop:count`` with inclusive endpoints, or a single number."""
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ParameterError(f"bad grid {text!r}; expected start:stop:count") from None
    if count < 1:
        raise ParameterError("grid count must be >= 1")
    if count == 1:
        return [start]
    return [float(v) for v in np.linspace(start, stop, count)]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if hasattr(v, "value") and not isinstance(v, (int, str)):
        return v.value
    return v


def render(columns, rows, fmt, meta):
    """Serialise rows (dicts) as CSV or a JSON document with metadata."""
    if fmt == "json":
        doc = dict(meta)
        doc["results"] = [{c: _jsonable(r[c]) for c in columns} for r in rows]
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands; each returns (columns, rows, meta)
# ---------------------------------------------------------------------------

THRESH_COLS = ["mode", "delta", "C", "rho", "zeta", "nu_argmax"]


def _threshold_row(r):
    return {"mode": r.mode.value, "delta": r.delta, "C": r.c_factor, "rho": r.rho_star,
            "zeta": r.zeta, "nu_argmax": r.nu_argmax, "iterations": r.iterations,
            "bisection_tol": r.bisection_tol, "degenerate": r.degenerate, "capped": r.capped}


def cmd_threshold(a):
    r = thresholds.critical_rho(a.delta, a.C, a.mode, a.tol)
    cols = THRESH_COLS + ["bisection_tol", "iterations", "degenerate", "capped"]
    return cols, [_threshold_row(r)], {"command": "threshold"}


def cmd_curve(a):
    res = thresholds.threshold_curve(a.delta, parse_grid(a.C), a.mode, a.tol, a.jobs)
    return THRESH_COLS, [_threshold_row(r) for r in res], {"command": "curve"}


def cmd_surface(a):
    res = thresholds.threshold_surface(parse_grid(a.delta), parse_grid(a.C), a.mode,
                                       a.tol, a.jobs)
    return THRESH_COLS, [_threshold_row(r) for r in res], {"command": "surface"}


def cmd_exponents(a):
    if (a.rho is None) == (a.zeta is None):
        raise ParameterError("give exactly one of --rho or --zeta")
    rho = a.rho if a.rho is not None else a.zeta / a.delta
    params = exponents.NetExponentParams(rho, a.delta, a.C, a.mode)
    rows = [b.__dict__ for b in exponents.exponent_breakdown_series(params, a.grid, a.jobs)]
    cols = ["nu", "psi_com", "psi_int", "psi_ext", "psi_net"]
    return cols, rows, {"command": "exponents", "rho": rho, "delta": a.delta, "C": a.C,
                        "mode": params.mode.value}


def cmd_angle(a):
    kind = a.kind
    if kind == "external":
        est = pg.external_angle(pg.FaceSpec(a.n, a.k, a.l, a.C))
    elif kind == "internal":
        est = pg.internal_angle(pg.FaceSpec(a.n, a.k, a.l, a.C), a.samples, a.seed,
                                force_mc=a.force_mc)
    elif kind == "full":
        est = pg.internal_angle_full(a.n, a.k, a.C, a.samples, a.seed)
    else:
        if a.m is None:
            raise ParameterError("--m is required for the face-sum angle")
        est = pg.complementary_grassmann_angle(a.n, a.m, a.k, a.C, a.samples, a.seed)
    row = est.as_dict()
    row["log_value"] = est.log_value
    row["seed"] = a.seed
    cols = ["value", "stderr", "method", "samples_or_nodes", "log_value", "seed"]
    return cols, [row], {"command": "angle", "kind": kind, "seed": a.seed}


def cmd_mc_angle(a):
    est = pg.grassmann_angle_monte_carlo(a.n, a.m, a.k, a.C, a.trials, a.seed,
                                         union=a.union, jobs=a.jobs)
    row = {"value": est.value, "stderr": est.stderr, "trials": est.samples_or_nodes,
           "seed": a.seed}
    return ["value", "stderr", "trials", "seed"], [row], {"command": "mc-angle", "seed": a.seed}


def cmd_certify(a):
    if a.all_ones:
        Z = rl.NullSpaceBasis(np.ones((a.n, 1)), rl.NullSpaceSource.FROM_MATRIX)
    else:
        if a.m is None:
            raise ParameterError("--m is required unless --all-ones is given")
        Z = rl.null_space_basis(rl.sample_ensemble(a.m, a.n, a.seed))
    cert = rl.certify_balancedness(Z, a.k, a.C)
    row = {"k": cert.k, "C": cert.c_factor, "worst_ratio": cert.worst_ratio,
           "worst_support": list(cert.worst_support), "holds": cert.holds, "seed": a.seed}
    cols = ["k", "C", "worst_ratio", "worst_support", "holds", "seed"]
    return cols, [row], {"command": "certify", "seed": a.seed}


def _rho_arg(a):
    if (a.rho is None) == (a.rho_factor is None):
        raise ParameterError("give exactly one of --rho or --rho-factor")
    if a.rho is not None:
        return a.rho
    return a.rho_factor * thresholds.critical_rho(a.delta, a.C, "strong").rho_star


def cmd_simulate(a):
    rho = _rho_arg(a)
    reps = rl.recovery_experiment(a.delta, rho, a.C, a.n, a.trials, a.tail, a.seed,
                                  head_magnitude=a.head, jobs=a.jobs)
    rows = [dict(r.__dict__, seed=a.seed) for r in reps]
    cols = ["trial", "err_l1", "bound", "tail_l1", "satisfied", "decoded_l1", "true_l1", "seed"]
    rate = float(np.mean([r.satisfied for r in reps])) if reps else math.nan
    return cols, rows, {"command": "simulate", "seed": a.seed, "rho": rho,
                        "satisfied_rate": rate}


def cmd_noisy(a):
    rho = _rho_arg(a)
    reps = rl.noisy_experiment(a.delta, rho, a.C, a.n, a.epsilon, a.trials, a.seed,
                               tail_l1=a.tail, relative=a.relative,
                               head_magnitude=a.head, jobs=a.jobs)
    rows = [dict(r.__dict__, seed=a.seed) for r in reps]
    cols = ["trial", "epsilon", "sigma_min", "err_l1", "bound", "satisfied", "seed"]
    rate = float(np.mean([r.satisfied for r in reps])) if reps else math.nan
    return cols, rows, {"command": "noisy", "seed": a.seed, "rho": rho,
                        "satisfied_rate": rate}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="l1robust", description="Robustness thresholds for l1 minimisation.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--out", default="-", help="output file (default: standard output)")
    common.add_argument("--jobs", type=int, default=None,
                        help="parallel workers (default: $L1ROBUST_JOBS or 1)")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, fmt, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn, default_format=fmt)
        return sp

    mode = dict(default="strong", choices=["weak", "sectional", "strong"])

    sp = add("threshold", cmd_threshold, "json", "critical rho for one (delta, C, mode)")
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--mode", **mode)
    sp.add_argument("--tol", type=float, default=1e-5)

    sp = add("curve", cmd_curve, "csv", "critical rho over a grid of C")
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--C", required=True, help="grid start:stop:count or a single value")
    sp.add_argument("--mode", **mode)
    sp.add_argument("--tol", type=float, default=1e-5)

    sp = add("surface", cmd_surface, "csv", "critical rho over a delta x C grid")
    sp.add_argument("--delta", required=True)
    sp.add_argument("--C", required=True)
    sp.add_argument("--mode", **mode)
    sp.add_argument("--tol", type=float, default=1e-5)

    sp = add("exponents", cmd_exponents, "csv", "exponent breakdown over nu")
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--zeta", type=float)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--mode", **mode)
    sp.add_argument("--grid", type=int, default=101)

    sp = add("angle", cmd_angle, "json", "internal, external, G = SP, or face-sum angle")
    sp.add_argument("--kind", choices=["internal", "external", "full", "facesum"],
                    required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--l", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--samples", type=int, default=pg.MC_SAMPLES)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--force-mc", action="store_true")

    sp = add("mc-angle", cmd_mc_angle, "csv", "Monte-Carlo complementary Grassmann angle")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--trials", type=int, default=20000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--union", action="store_true",
                    help="count a hit for any sign pattern on the support")

    sp = add("certify", cmd_certify, "json", "exact balancedness certificate")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--all-ones", action="store_true", help="use the all-ones null space")

    for name, fn in (("simulate", cmd_simulate), ("noisy", cmd_noisy)):
        sp = add(name, fn, "csv", "recovery trials" if name == "simulate" else
                 "noisy recovery trials")
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--delta", type=float, required=True)
        sp.add_argument("--rho", type=float)
        sp.add_argument("--rho-factor", type=float,
                        help="rho as a multiple of the strong threshold")
        sp.add_argument("--C", type=float, default=2.0)
        sp.add_argument("--trials", type=int, default=100)
        sp.add_argument("--tail", type=float, default=0.0, help="tail l1 mass")
        sp.add_argument("--head", type=float, default=1.0, help="head magnitude")
        sp.add_argument("--seed", type=int, default=0)
        if name == "noisy":
            sp.add_argument("--epsilon", type=float, required=True)
            sp.add_argument("--relative", action="store_true",
                            help="epsilon is relative to ||A x||_2")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_PARAM
    if args.jobs is None:
        args.jobs = default_jobs()
    fmt = args.format or args.default_format
    try:
        cols, rows, meta = args.func(args)
    except ParameterError as exc:
        print(f"l1robust: parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except NumericalError as exc:
        print(f"l1robust: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = render(cols, rows, fmt, meta)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
