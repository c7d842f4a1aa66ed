"""Command-line front end: batch computation, search, sampling, verification.

Exit codes: 0 success / verification pass, 1 verification fail, 2 usage
error, 3 numerical failure.  All outputs are deterministic for a fixed
configuration; commands that need sample points use a seeded generator
whose seed is recorded in the output header.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import exports
from .elliptic import QuadratureError
from .families import FamilyKind, default_spec, sample_family, sample_grid
from .ode import StepSizeUnderflow
from .reduced import (
    NoBracketError,
    closed_form_params_m3,
    closed_form_u_m3,
    find_rational_A,
    integrate_reduced,
    period_T,
    psi_limits,
    psi_table,
)
from .verify import VerifyJob, verify_family
from .wsystem import CoeffVector, integrate_w, lift, trajectory_csv_rows

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(ValueError):
    pass


def _parse_weights(text):
    try:
        return CoeffVector.make([float(Fraction(x)) for x in text.split(",")])
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad weight list {text!r}: {exc}") from exc


def _parse_fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad rational {text!r}: {exc}") from exc


def _threads(args):
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("SLGEO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError(f"bad SLGEO_THREADS value {env!r}") from exc
    return os.cpu_count() or 1


def _emit(args, text):
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _weights_header(a):
    return "weights a = " + ",".join("%g" % x for x in a.a)


def cmd_psi(args):
    a = _parse_weights(args.a)
    lo, hi = psi_limits(a)
    rows = psi_table(a, grid=args.grid, a_lo=args.a_min, a_hi=args.a_max, threads=_threads(args))
    header = [
        _weights_header(a),
        f"rotation limits: A->0: {lo!r}  A->1: {hi!r}",
        f"grid {args.grid} on [{args.a_min}, {args.a_max}]",
    ]
    path = args.out or "psi.csv"
    exports.write_csv(path, ["A", "Psi", "T", "alpha", "beta"], rows, header)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_psi_limits(args):
    a = _parse_weights(args.a)
    lo, hi = psi_limits(a)
    _emit(args, json.dumps({"A_to_0": lo, "A_to_1": hi, "weights": list(a.a)}, indent=2) + "\n")
    return EXIT_OK


def cmd_period(args):
    a = _parse_weights(args.a)
    T = period_T(a, args.A)
    _emit(args, json.dumps({"A": args.A, "T": T, "weights": list(a.a)}, indent=2) + "\n")
    return EXIT_OK


def cmd_find_torus(args):
    a = _parse_weights(args.a)
    q = _parse_fraction(args.q)
    sols = find_rational_A(a, q, grid=args.grid)
    payload = [
        {
            "A": s.A,
            "T": s.T,
            "Psi": s.Psi,
            "q": str(s.q),
            "b_mult": s.b_mult,
            "degenerate": s.degenerate,
        }
        for s in sols
    ]
    _emit(args, json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_integrate(args):
    a = _parse_weights(args.a)
    t_eval = np.linspace(0.0, args.t1, args.samples)
    if args.system == "w":
        thetas = (
            np.zeros(a.m)
            if args.thetas is None
            else np.asarray([float(Fraction(x)) for x in args.thetas.split(",")])
        )
        state0 = lift(a, args.u0, thetas)
        traj = integrate_w(a, state0.w, (0.0, args.t1), tol=args.tol)
        rows = trajectory_csv_rows(traj, t_eval)
        cols = (
            ["t"]
            + [f"re_w{j + 1}" for j in range(a.m)]
            + [f"im_w{j + 1}" for j in range(a.m)]
            + ["u"]
            + [f"p{j + 1}" for j in range(a.m)]
            + ["H", "constraint_residual"]
        )
    else:
        traj = integrate_reduced(a, (args.u0, args.theta0, args.psi0), (0.0, args.t1), tol=args.tol)
        us, ths, pss = traj.states(t_eval)
        rows = np.column_stack([t_eval, us, ths, pss])
        cols = ["t", "u", "theta", "psi"]
    path = args.out or "trajectory.csv"
    stats = traj.step_stats
    exports.write_csv(
        path,
        cols,
        rows,
        [
            _weights_header(a),
            f"system: {args.system}, tol {args.tol!r}",
            f"steps accepted {stats['accepted']} rejected {stats['rejected']}",
        ],
    )
    print(f"wrote {path}")
    return EXIT_OK


def cmd_closed_form(args):
    a = _parse_weights(args.a)
    if a.m != 3:
        raise UsageError("closed-form requires exactly 3 weights")
    p = closed_form_params_m3(a, args.A)
    ts = np.linspace(0.0, args.t1, args.samples)
    us = closed_form_u_m3(a, args.A, args.c_shift, ts)
    header = [
        _weights_header(a),
        f"A {args.A!r}  sn-scale {p.a_ell!r}  modulus {p.b_ell!r}",
        f"turning points gamma {list(p.gamma)!r}",
    ]
    path = args.out or "closed_form.csv"
    exports.write_csv(path, ["t", "u"], np.column_stack([ts, us]), header)
    print(f"wrote {path}")
    return EXIT_OK


def _family_spec_from_args(args):
    kind = FamilyKind(args.family)
    overrides = {}
    if args.m:
        overrides["m"] = args.m
    if args.levels:
        overrides["levels"] = [float(Fraction(x)) for x in args.levels.split(",")]
    if args.b is not None:
        overrides["b"] = args.b
    if args.c is not None:
        overrides["c"] = args.c
    if args.d is not None:
        overrides["d"] = args.d
    if args.a:
        overrides["a"] = _parse_weights(args.a)
    if args.bvec:
        overrides["b"] = tuple(int(x) for x in args.bvec.split(","))
    if args.q:
        overrides["q"] = args.q
    if args.link:
        overrides["link"] = args.link
    try:
        return default_spec(kind, **overrides)
    except (TypeError, KeyError) as exc:
        raise UsageError(f"bad family parameters: {exc}") from exc


def cmd_verify(args):
    spec = _family_spec_from_args(args)
    job = VerifyJob(spec=spec, grid_size=args.grid, cal_tol=args.tol, seed=args.seed)
    report = verify_family(job)
    _emit(args, report.to_json() + "\n")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAIL


def cmd_sample(args):
    spec = _family_spec_from_args(args)
    from .verify import _prepare_spec

    _prepare_spec(spec)
    grid = sample_grid(spec, args.grid, seed=args.seed)
    samples = [sample_family(spec, params) for params in grid]
    path = args.out or f"{spec.kind.value}.{args.format}"
    if args.format == "csv":
        m = spec.m
        npar = len(grid[0])
        cols = [f"re_z{j + 1}" for j in range(m)] + [f"im_z{j + 1}" for j in range(m)] + [
            f"param{k + 1}" for k in range(npar)
        ]
        rows = [list(s.point.real) + list(s.point.imag) + list(map(float, s.params)) for s in samples]
        exports.write_csv(path, cols, rows, [f"family {spec.kind.value}", f"seed {args.seed}"])
    elif args.format == "obj":
        if spec.m != 3:
            raise UsageError("OBJ export needs an m = 3 family")
        ns = args.grid
        params0 = grid[0]
        # a structured (s, t)-style grid over the last two parameters
        base = np.asarray(params0, dtype=float)
        lo1, hi1 = base[-2] - 1.0, base[-2] + 1.0
        lo2, hi2 = base[-1] - 1.0, base[-1] + 1.0
        pts = []
        for sv in np.linspace(lo1, hi1, ns):
            for tv in np.linspace(lo2, hi2, ns):
                q = base.copy()
                q[-2], q[-1] = sv, tv
                pts.append(sample_family(spec, tuple(q)).point)
        verts = exports.project_r3(np.asarray(pts), args.projection)
        exports.write_obj(path, verts, exports.grid_faces(ns, ns))
    else:
        raise UsageError(f"unsupported format {args.format!r}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_catalog(args):
    entries = []
    for kind in FamilyKind:
        spec = default_spec(kind)
        entries.append(
            {
                "kind": kind.value,
                "m": spec.m,
                "phase": spec.phase,
                "description": spec.note,
                "defaults": {
                    k: (list(v.a) if isinstance(v, CoeffVector) else v)
                    for k, v in spec.params.items()
                    if isinstance(v, (int, float, str, tuple, list, CoeffVector))
                },
            }
        )
    _emit(args, json.dumps(entries, indent=2, default=str) + "\n")
    return EXIT_OK


def _add_family_args(p):
    p.add_argument("--family", required=True, choices=[k.value for k in FamilyKind])
    p.add_argument("--m", type=int, default=0, help="ambient dimension where variable")
    p.add_argument("--levels", default="", help="comma list of torus moduli levels")
    p.add_argument("--a", default="", help="comma list of weights")
    p.add_argument("--bvec", default="", help="comma list of integer parameters b1,b2,b3")
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--d", type=float, default=None)
    p.add_argument("--q", default="", help="rational rotation target p/q for torus cones")
    p.add_argument("--link", default="", choices=["", "sphere", "case_a", "explicit_m3"])
    p.add_argument("--grid", type=int, default=5)
    p.add_argument("--seed", type=int, default=20240611)


def build_parser():
    top = argparse.ArgumentParser(prog="slgeo", description=__doc__)
    top.add_argument("--config", default=None, help="JSON file of defaults; flags override")
    top.add_argument("--threads", type=int, default=0, help="scan parallelism (SLGEO_THREADS fallback)")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("psi", help="tabulate the per-period rotation over A")
    p.add_argument("--a", required=True)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--a-min", type=float, default=1e-3)
    p.add_argument("--a-max", type=float, default=1 - 1e-3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("psi-limits", help="closed-form rotation limits at A -> 0, 1")
    p.add_argument("--a", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_psi_limits)

    p = sub.add_parser("period", help="oscillation period at a given A")
    p.add_argument("--a", required=True)
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_period)

    p = sub.add_parser("find-torus", help="solve Psi(A) = 2 pi q for rational q")
    p.add_argument("--a", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_find_torus)

    p = sub.add_parser("integrate", help="integrate the full or reduced flow to CSV")
    p.add_argument("--a", required=True)
    p.add_argument("--system", choices=["w", "reduced"], default="reduced")
    p.add_argument("--u0", type=float, default=0.0)
    p.add_argument("--theta0", type=float, default=0.7)
    p.add_argument("--psi0", type=float, default=0.0)
    p.add_argument("--thetas", default=None, help="comma list of initial phases (w system)")
    p.add_argument("--t1", type=float, default=10.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("closed-form", help="elliptic closed form of u(t) for 3 weights")
    p.add_argument("--a", required=True)
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--c-shift", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=5.0)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_closed_form)

    p = sub.add_parser("verify", help="run a family verification job")
    _add_family_args(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", help="export family sample points (CSV or OBJ)")
    _add_family_args(p)
    p.add_argument("--format", choices=["csv", "obj"], default="csv")
    p.add_argument("--projection", choices=["re", "im", "mixed"], default="re")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("catalog", help="list the built-in families")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_catalog)

    return top


def _apply_config(parser, argv):
    """Pull defaults from --config JSON; explicit flags override them."""
    if argv and "--config" in argv:
        idx = argv.index("--config")
        path = argv[idx + 1]
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        known = {a.dest for a in parser._actions}
        for sp in parser._subparsers._group_actions[0].choices.values():
            known |= {a.dest for a in sp._actions}
        unknown = set(cfg) - {k.replace("-", "_") for k in known}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        extra = []
        for key, val in cfg.items():
            flag = "--" + key.replace("_", "-")
            if flag not in argv and key != "command":
                extra += [flag, str(val)]
        argv = argv + extra
    return argv


_LIST_FLAGS = {"--a", "--levels", "--bvec", "--thetas"}


def _merge_list_flags(argv):
    """Join '--a -3,1,2' into '--a=-3,1,2' so leading minus signs survive."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _LIST_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _merge_list_flags(_apply_config(parser, argv))
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(json.dumps({"error": "usage", "detail": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(json.dumps({"error": "usage", "detail": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    except (NoBracketError, QuadratureError, StepSizeUnderflow, RuntimeError) as exc:
        _emit(args, json.dumps({"error": type(exc).__name__, "detail": str(exc)}) + "\n")
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(json.dumps({"error": "usage", "detail": str(exc)}), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
