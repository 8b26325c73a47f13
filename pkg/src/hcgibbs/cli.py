"""Command-line interface.

Exit codes: 0 success, 2 invalid configuration, 3 certification failure,
4 enumeration budget exceeded. ``HCGIBBS_OUTPUT_DIR`` names a directory
that receives ``<command>.<ext>`` when ``--output`` is not given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import polysolve as ps
from .certify import (
    SweepError,
    certify,
    envelope_grid,
    gun_envelope,
    linear_rationals,
    log_spaced_rationals,
    sweep,
)
from .model import PRESETS, ModelError, StateGraph, params_from_a, params_from_lambda, preset_graph
from .oracle import (
    LITERAL_OCCUPIED,
    OPERATIVE_OCCUPIED,
    BudgetExceeded,
    build_tree,
    check_consistency,
    count_admissible,
    partition_function_dp,
    root_marginal,
)
from .recursion import BoundaryLaw, BoundaryLawError, iterate_ti_map
from .reports import dumps, envelope_to_csv, fmt_number, sweep_to_csv

EXIT_OK, EXIT_INVALID, EXIT_CERT, EXIT_BUDGET = 0, 2, 3, 4
OUTPUT_DIR_ENV = "HCGIBBS_OUTPUT_DIR"


class InvalidConfig(ValueError):
    pass


class CertificationFailed(RuntimeError):
    pass


def _rational(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}") from None


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _graph(args) -> StateGraph:
    if getattr(args, "graph_file", None):
        try:
            return StateGraph.from_json(Path(args.graph_file).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfig(f"cannot read graph file: {exc}") from None
    return preset_graph(args.graph)


def _params(args):
    if args.a is not None:
        return params_from_a(args.k, args.a)
    return params_from_lambda(args.k, args.lam)


def _emit(args, text: str, ext: str):
    out = args.output
    if out is None and os.environ.get(OUTPUT_DIR_ENV):
        out = Path(os.environ[OUTPUT_DIR_ENV]) / f"{args.command}.{ext}"
    if out is None:
        sys.stdout.write(text)
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    print(f"wrote {out}", file=sys.stderr)


def _solve_law(g, p) -> tuple:
    """(law, residual, report-or-None) for the unique certified or iterated law."""
    if g.is_preset and p.k == 2:
        rep = certify(g, p)
        if not rep.ok:
            raise CertificationFailed(f"{g.name}: {rep.certified_count} solutions, "
                                      f"failed checks {[c.name for c in rep.checks if not c.passed]}")
        return rep.solutions[0].law, rep.solutions[0].residual, rep
    res = iterate_ti_map(g, p)
    return res.input, res.residual, None


# --- commands -------------------------------------------------------------

def cmd_solve(args) -> int:
    g, p = _graph(args), _params(args)
    law, residual, rep = _solve_law(g, p)
    doc = {"graph": g.name, "k": p.k, "a": fmt_number(p.a), "lambda": fmt_number(p.lam),
           "z0": law.z0, "z1": law.z1, "z2": law.z2, "residual": residual,
           "certified": rep is not None}
    if args.format == "json":
        _emit(args, dumps(doc), "json")
    else:
        status = "certified unique" if rep is not None else "iterated (not certified)"
        _emit(args, (f"graph={g.name} k={p.k} a={fmt_number(p.a)} lambda={fmt_number(p.lam)}\n"
                     f"z0={law.z0!r}\nz1={law.z1!r}\nz2={law.z2!r}\n"
                     f"residual={residual:.3e} ({status})\n"), "txt")
    if rep is None and residual > 1e-9:
        return EXIT_CERT
    return EXIT_OK


def cmd_certify(args) -> int:
    g, p = _graph(args), _params(args)
    if not g.is_preset:
        raise InvalidConfig(f"no certification pipeline for custom graph {g.name!r}")
    if p.k != 2:
        raise InvalidConfig("certification exists for k = 2 only")
    rep = certify(g, p, args.grid)
    _emit(args, dumps(rep.to_dict()), "json")
    return EXIT_OK if rep.ok else EXIT_CERT


def cmd_sweep(args) -> int:
    g = _graph(args)
    if not g.is_preset or args.k != 2:
        raise InvalidConfig("sweeps need a preset graph and k = 2")
    if not args.min < args.max or args.min <= 0:
        raise InvalidConfig("need 0 < --min < --max")
    if args.points < 2:
        raise InvalidConfig("--points must be >= 2")
    if args.spacing == "log":
        a_values = log_spaced_rationals(args.min, args.max, args.points)
    else:
        a_values = linear_rationals(args.min, args.max, args.points)
    try:
        rows = sweep(g, args.k, a_values, grid=args.grid, workers=args.workers)
    except SweepError as exc:
        _emit(args, sweep_to_csv(exc.rows), "csv")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CERT
    _emit(args, sweep_to_csv(rows), "csv")
    bad = [r for r in rows if r.count != 1 or not r.checks_passed]
    if bad:
        print(f"error: {len(bad)} sweep point(s) without a certified unique solution", file=sys.stderr)
        return EXIT_CERT
    return EXIT_OK


def cmd_oracle(args) -> int:
    g, p = _graph(args), _params(args)
    occupied = OPERATIVE_OCCUPIED if args.convention == "operative" else LITERAL_OCCUPIED
    if args.boundary:
        try:
            law = BoundaryLaw(*(float(v) for v in args.boundary.split(",")))
        except (TypeError, ValueError) as exc:
            raise InvalidConfig(f"bad --boundary: {exc}") from None
        residual = None
    else:
        law, residual, _ = _solve_law(g, p)
    t = build_tree(p.k, args.n)
    z_n, marg_dp = partition_function_dp(g, p, t, law, occupied)
    doc = {
        "graph": g.name, "k": p.k, "n": args.n, "a": fmt_number(p.a), "lambda": fmt_number(p.lam),
        "convention": args.convention, "occupied_states": list(occupied),
        "boundary": {"z0": law.z0, "z1": law.z1, "z2": law.z2, "ti_map_residual": residual},
        "admissible_count": count_admissible(g, t),
        "partition_function": z_n,
        "root_marginal": list(root_marginal(g, p, args.n, law, occupied)),
        "root_marginal_previous": list(root_marginal(g, p, args.n - 1, law, occupied)) if args.n >= 1 else None,
        "consistency_discrepancy": check_consistency(g, p, args.n, law, occupied) if args.n >= 1 else None,
    }
    _emit(args, dumps(doc), "json")
    return EXIT_OK


def cmd_poly(args) -> int:
    if args.coeffs is not None:
        poly = ps.poly_from_strings(json.loads(args.coeffs))
        label = "custom"
    else:
        if args.a is None and args.lam is None:
            raise InvalidConfig("poly needs --coeffs or one of --a/--lambda")
        p = _params(args)
        a = p.a_q
        if args.graph == "key":
            poly = ps.key_polynomial(a)
        elif args.graph == "gun":
            poly = ps.gun_polynomial_printed(a) if args.printed else ps.gun_polynomial(a)
        else:
            poly = ps.stick_polynomial(Fraction(p.lam))
        label = args.graph + ("-printed" if args.printed else "")
    if poly.is_zero():
        raise InvalidConfig("zero polynomial")
    cert = ps.sturm_positive_roots(poly)
    roots = [ps.refine_root(poly, iv) for iv in cert.isolating_intervals]
    doc = {
        "polynomial": label,
        "coefficients_desc": ps.poly_to_strings(poly),
        "descartes": ps.descartes_bound(poly),
        "sturm": cert.to_dict(),
        "positive_roots": roots,
    }
    if args.format == "json":
        _emit(args, dumps(doc), "json")
    else:
        coeffs = ", ".join(str(c) for c in poly.desc())
        _emit(args, (f"polynomial={label}\ncoefficients (descending)=({coeffs})\n"
                     f"descartes={doc['descartes']}\nsturm={cert.positive_root_count}\n"
                     f"positive roots={roots}\n"), "txt")
    return EXIT_OK


def cmd_figures(args) -> int:
    if args.graph != "gun":
        raise InvalidConfig("envelope figures exist for the gun graph only")
    if args.points < 2:
        raise InvalidConfig("--points must be >= 2")
    rows = gun_envelope(envelope_grid(args.points))
    _emit(args, envelope_to_csv(rows), "csv")
    if any(g_min >= 0 or g_max >= 0 for _, g_min, g_max in rows):
        return EXIT_CERT
    return EXIT_OK


# --- parser ---------------------------------------------------------------

def _add_graph(sp, presets_only=False):
    sp.add_argument("--graph", choices=PRESETS, default="stick")
    if not presets_only:
        sp.add_argument("--graph-file", help='JSON {"name": ..., "edges": [[i, j], ...]}')


def _add_params(sp, required=True):
    sp.add_argument("--k", type=_positive_int, default=2)
    grp = sp.add_mutually_exclusive_group(required=required)
    grp.add_argument("--a", type=_rational, help="root parameter a = lambda^(1/k), rational")
    grp.add_argument("--lambda", dest="lam", type=_rational, help="activity lambda")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hcgibbs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="print the translation-invariant boundary law")
    _add_graph(sp)
    _add_params(sp)
    sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("certify", help="write the certification report as JSON")
    _add_graph(sp)
    _add_params(sp)
    sp.add_argument("--grid", type=_positive_int, default=512)

    sp = sub.add_parser("sweep", help="certify over a grid of a values, CSV output")
    _add_graph(sp, presets_only=True)
    sp.add_argument("--k", type=_positive_int, default=2)
    sp.add_argument("--min", type=_rational, default=Fraction(1, 10))
    sp.add_argument("--max", type=_rational, default=Fraction(10))
    sp.add_argument("--points", type=int, default=200)
    sp.add_argument("--spacing", choices=("log", "linear"), default="log")
    sp.add_argument("--grid", type=_positive_int, default=512)
    sp.add_argument("--workers", type=_positive_int, default=1)

    sp = sub.add_parser("oracle", help="finite-tree enumeration diagnostics as JSON")
    _add_graph(sp)
    _add_params(sp)
    sp.add_argument("--n", type=int, default=2, help="tree depth")
    sp.add_argument("--boundary", help="z0,z1,z2 to use instead of the solved law")
    sp.add_argument("--convention", choices=("operative", "literal"), default="operative")

    sp = sub.add_parser("poly", help="model polynomial, Descartes bound and Sturm certificate")
    sp.add_argument("--graph", choices=PRESETS, default="key")
    _add_params(sp, required=False)
    sp.add_argument("--printed", action="store_true", help="gun: use the -(a^3+2) coefficient variant")
    sp.add_argument("--coeffs", help='JSON array of "num/den" strings, descending degree')
    sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("figures", help="gun envelope data (a, g_min, g_max) as CSV")
    sp.add_argument("--graph", choices=("gun",), default="gun")
    sp.add_argument("--points", type=int, default=100)

    for p in sub.choices.values():
        p.add_argument("--output", "-o", help="output path (default: stdout)")
    return parser


COMMANDS = {"solve": cmd_solve, "certify": cmd_certify, "sweep": cmd_sweep,
            "oracle": cmd_oracle, "poly": cmd_poly, "figures": cmd_figures}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (InvalidConfig, ModelError, ps.PolynomialError, json.JSONDecodeError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BudgetExceeded as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (CertificationFailed, BoundaryLawError) as exc:
        print(f"error: certification failed: {exc}", file=sys.stderr)
        return EXIT_CERT


if __name__ == "__main__":
    sys.exit(main())
