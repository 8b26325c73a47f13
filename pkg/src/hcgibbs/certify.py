"""Uniqueness certification of translation-invariant boundary laws for k = 2.

Each pipeline collects named checks. A check is ``exact`` when it is a
statement in rational arithmetic (Sturm counts, discriminants, exact
evaluations), ``grid`` when it is verified on a finite grid, and
``numeric`` when it compares floating-point values.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import polysolve as ps
from .model import ModelParams, StateGraph, _exact_root, params_from_a, preset_graph
from .recursion import (
    BoundaryLaw,
    gun_fixed_point_map,
    reduce_gun,
    reduce_key,
    stick_law_from_z1,
    stick_normalized_derivative,
    stick_scalar_map,
    ti_map,
    ti_residual,
)

DEFAULT_GRID = 512
RESIDUAL_TOL = 1e-9
SYMMETRY_TOL = 1e-8
INV_SQRT3 = 1 / math.sqrt(3)
# rows whose a satisfies |3a^2 - 1| below this are tagged near-boundary
NEAR_BOUNDARY = Fraction(1, 100)

STICK_BOUND_NAMES = ("z0_lower", "z0_upper", "z1_lower", "z1_upper", "z2_lower", "z2_upper")


class CertificationError(RuntimeError):
    pass


@dataclass
class Check:
    name: str
    passed: bool
    kind: str = "numeric"
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "kind": self.kind, "detail": self.detail}


@dataclass
class Solution:
    law: BoundaryLaw
    residual: float

    def to_dict(self) -> dict:
        return {"z0": self.law.z0, "z1": self.law.z1, "z2": self.law.z2, "residual": self.residual}


@dataclass
class CertificationReport:
    graph: str
    params: ModelParams
    solutions: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    mode: str = "exact"
    branch: str = ""
    polynomial: list | None = None
    root_certificate: ps.RootCertificate | None = None
    extra: dict = field(default_factory=dict)

    @property
    def certified_count(self) -> int:
        return len(self.solutions)

    @property
    def checks_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def ok(self) -> bool:
        return self.certified_count == 1 and self.checks_passed

    @property
    def flagged(self) -> bool:
        return bool(self.root_certificate and self.root_certificate.flagged)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def add(self, name: str, passed: bool, kind: str = "numeric", detail: str = "") -> bool:
        self.checks.append(Check(name, bool(passed), kind, detail))
        return bool(passed)

    def to_dict(self) -> dict:
        p = self.params
        out = {
            "graph": self.graph,
            "params": {"k": p.k, "a": _num(p.a), "lambda": _num(p.lam), "exact": p.exact},
            "mode": self.mode,
            "branch": self.branch,
            "certified_count": self.certified_count,
            "ok": self.ok,
            "solutions": [s.to_dict() for s in self.solutions],
            "checks": [c.to_dict() for c in self.checks],
            "notes": list(self.notes),
        }
        if self.polynomial is not None:
            out["polynomial_desc"] = self.polynomial
        if self.root_certificate is not None:
            out["root_certificate"] = self.root_certificate.to_dict()
        out.update(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _num(v):
    return str(v) if isinstance(v, Fraction) else v


def _require(g_name: str, p: ModelParams, expected: str):
    if p.k != 2:
        raise ValueError(f"certification exists for k = 2 only (got k = {p.k})")
    if g_name != expected:
        raise ValueError(f"graph {g_name!r} passed to the {expected} pipeline")


def _mode(p: ModelParams) -> str:
    return "exact" if p.exact else "numeric"


def _strictly_monotone(values: Sequence, increasing: bool) -> bool:
    pairs = zip(values, values[1:])
    return all(u < v for u, v in pairs) if increasing else all(u > v for u, v in pairs)


def _bisect(fn, lo: float, hi: float, max_iter: int = 200) -> float:
    flo = fn(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = fn(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _add_fixed_point_checks(rep: CertificationReport, g: StateGraph, symmetry: bool):
    worst = max((s.residual for s in rep.solutions), default=math.inf)
    rep.add("ti_map_fixed_point", worst < RESIDUAL_TOL, "numeric", f"max residual {worst:.3e}")
    if symmetry:
        gaps = []
        for s in rep.solutions:
            out = ti_map(g, rep.params, s.law)
            gaps.append(abs(out.z0 - out.z1) / max(out.z0, out.z1))
        gap = max(gaps, default=math.inf)
        rep.add("symmetry_z0_eq_z1", gap < SYMMETRY_TOL, "numeric", f"max relative gap {gap:.3e}")


def _add_root_certificate(rep: CertificationReport, poly: ps.Polynomial):
    cert = ps.sturm_positive_roots(poly)
    rep.polynomial = ps.poly_to_strings(poly)
    rep.root_certificate = cert
    n = cert.positive_root_count
    rep.add("descartes_bound_3", ps.descartes_bound(poly) == 3, "exact",
            f"sign variations {ps.descartes_bound(poly)}")
    rep.add("constant_term_negative", poly.coeffs[0] < 0, "exact", f"f(0) = {poly.coeffs[0]}")
    rep.add("sturm_count_odd", n % 2 == 1 and n >= 1, "exact", f"positive roots {n}")
    rep.add("no_near_tangent_roots", not cert.flagged, "exact",
            f"{len(cert.flagged)} interval(s) flagged for manual review")
    return cert


# --- stick ----------------------------------------------------------------

def check_stick_bounds(p: ModelParams, z) -> list:
    """The six strict bounds on a stick solution, in ``STICK_BOUND_NAMES`` order."""
    z = z if isinstance(z, BoundaryLaw) else BoundaryLaw(*z)
    k, lam = p.k, p.lam_f
    ln = math.log
    lg = ln(lam)
    log_z0_lo = (k + 1) * lg - (k * lg + k * k * ln(2**k * lam + 1)) / (k + 1)
    log_z0_hi = k * k * ln(2) + (k + 1) * lg - (k * lg + k * k * ln(lam + 1)) / (k + 1)
    log_z2_lo = (lg + k * ln(lam + 1)) / (k + 1)
    log_z2_hi = (lg + k * ln(2**k * lam + 1)) / (k + 1)
    lz0, lz2 = ln(z.z0), ln(z.z2)
    return [
        log_z0_lo < lz0,
        lz0 < log_z0_hi,
        lam < z.z1,
        z.z1 < 2**k * lam,
        log_z2_lo < lz2,
        lz2 < log_z2_hi,
    ]


def certify_stick(p: ModelParams, grid: int = DEFAULT_GRID) -> CertificationReport:
    _require("stick", p, "stick")
    g = preset_graph("stick")
    lam = p.lam_f
    rep = CertificationReport("stick", p, mode=_mode(p), branch="monotone")

    zs = [8 * lam * (i + 1) / grid for i in range(grid)]
    fs = [stick_scalar_map(p, z) for z in zs]
    rep.add("monotone_scalar_map", _strictly_monotone(fs, True), "grid", f"{grid} points on (0, 8*lam]")
    contraction = max(stick_normalized_derivative(z) for z in zs)
    rep.add("contraction_grid", contraction < 1, "grid", f"max normalized derivative {contraction:.6f}")

    # f(lam) > lam and f < 4 lam, so the fixed point lies in (lam, 4 lam)
    z1_bisect = _bisect(lambda z: stick_scalar_map(p, z) - z, lam, 4 * lam)

    poly = ps.stick_polynomial(Fraction(p.lam))
    cert = ps.sturm_positive_roots(poly)
    rep.polynomial = ps.poly_to_strings(poly)
    rep.root_certificate = cert
    rep.add("sturm_unique_fixed_point", cert.positive_root_count == 1, "exact",
            f"positive roots of lam(2z^2+2z+1)^2 - z(z+1)^4: {cert.positive_root_count}")
    rep.add("no_near_tangent_roots", not cert.flagged, "exact")

    for iv in cert.isolating_intervals:
        z1 = ps.refine_root(poly, iv)
        law = stick_law_from_z1(p, z1)
        rep.solutions.append(Solution(law, ti_residual(g, p, law).residual))

    if rep.solutions:
        z1 = rep.solutions[0].law.z1
        rep.add("bisection_agrees", abs(z1 - z1_bisect) <= 1e-12 * max(1.0, z1), "numeric",
                f"bisection {z1_bisect!r} vs certified {z1!r}")
        rep.add("contraction_at_fixed_point", stick_normalized_derivative(z1) < 1, "numeric",
                f"f'(z1) = {stick_normalized_derivative(z1):.6f}")
        for s in rep.solutions:
            for name, ok in zip(STICK_BOUND_NAMES, check_stick_bounds(p, s.law)):
                rep.add(f"bound_{name}", ok, "numeric")
    _add_fixed_point_checks(rep, g, symmetry=False)
    return rep


# --- key ------------------------------------------------------------------

def key_scalar_map(p: ModelParams, z1: float) -> float:
    lam = p.lam_f
    z2 = (lam * (2 * z1 + 1) ** 2) ** (1.0 / 3.0)
    return lam * (z1 / z2 + 1) ** 2


def key_phi(p: ModelParams, z1: float) -> float:
    """``phi(z1) = (lam (2 z1 + 1)^5)^(1/3) / (2 z1 + 5)``."""
    if p.k != 2:
        raise ValueError("key_phi is defined for k = 2")
    return (p.lam_f * (2 * z1 + 1) ** 5) ** (1.0 / 3.0) / (2 * z1 + 5)


def key_phi_derivative(p: ModelParams, z1: float) -> float:
    lam = p.lam_f
    u = 2 * z1 + 1
    return 4 * lam * u * (2 * z1 + 11) / (3 * (2 * z1 + 5) ** 2 * (lam * lam * u) ** (1.0 / 3.0))


# z1 phi'(z1) = phi(z1) reduces to 4 z1^2 - 8 z1 + 15 = 0
KEY_TANGENCY_QUADRATIC = (Fraction(4), Fraction(-8), Fraction(15))


def key_tangency_discriminant() -> Fraction:
    a2, a1, a0 = KEY_TANGENCY_QUADRATIC
    return a1 * a1 - 4 * a2 * a0


def _no_sign_change(values: Iterable[float]) -> bool:
    signs = {v > 0 for v in values if v != 0}
    return len(signs) <= 1


def key_phi_scan(p: ModelParams, points: int = 1000, upper: float = 100.0) -> bool:
    """True when ``z1 phi'(z1) - phi(z1)`` keeps one sign on a grid of ``(0, upper]``."""
    zs = [upper * (i + 1) / points for i in range(points)]
    return _no_sign_change(z * key_phi_derivative(p, z) - key_phi(p, z) for z in zs)


def _solutions_from_y_roots(rep: CertificationReport, g: StateGraph, poly, cert, red):
    a = red.a
    for iv in cert.isolating_intervals:
        y = ps.refine_root(poly, iv)
        x = red.x_from_y(y)
        if not (x > a and y > 0):
            rep.notes.append(f"root y={y!r} rejected: x={x!r} not > a")
            continue
        law = red.to_law(x, y)
        rep.solutions.append(Solution(law, ti_residual(g, rep.params, law).residual))
    rep.add("x_gt_a_filter", len(rep.solutions) == 1, "numeric", f"{len(rep.solutions)} of {cert.positive_root_count} roots admissible")


def certify_key(p: ModelParams, grid: int = DEFAULT_GRID) -> CertificationReport:
    _require("key", p, "key")
    g = preset_graph("key")
    a_q = p.a_q
    rep = CertificationReport("key", p, mode=_mode(p), branch="polynomial")
    poly = ps.key_polynomial(a_q)
    cert = _add_root_certificate(rep, poly)
    _solutions_from_y_roots(rep, g, poly, cert, reduce_key(p))

    disc = key_tangency_discriminant()
    rep.add("tangency_quadratic_no_real_root", disc < 0, "exact", f"discriminant {disc}")
    rep.add("tangency_phi_grid", key_phi_scan(p, points=2 * grid), "grid",
            "z1 phi'(z1) - phi(z1) on (0, 100]")
    _add_fixed_point_checks(rep, g, symmetry=True)
    return rep


# --- gun ------------------------------------------------------------------

def gun_critical_points(a):
    """Roots ``x1 <= x2`` of ``-a x^2 + 2x - 3a``, or ``None`` when ``a > 1/sqrt(3)``.

    Exact rationals are returned when ``a`` is rational and ``1 - 3a^2`` is
    a rational square.
    """
    if isinstance(a, Fraction):
        disc = 1 - 3 * a * a
        if disc < 0:
            return None
        root = _exact_root(disc, 2)
        if root is not None:
            return (1 - root) / a, (1 + root) / a
        r = math.sqrt(disc)
        a = float(a)
    else:
        disc = 1 - 3 * a * a
        if disc < -4 * 2.0**-52:
            return None
        r = math.sqrt(max(disc, 0.0))
    return (1 - r) / a, (1 + r) / a


def _g_pair(a, x1, x2):
    return gun_fixed_point_map(a, x1) - x1, gun_fixed_point_map(a, x2) - x2


def gun_envelope(a_grid: Iterable) -> list:
    """``(a, f(x1) - x1, f(x2) - x2)`` for each ``a`` in ``(0, 1/sqrt(3)]``."""
    rows = []
    for a in a_grid:
        cp = gun_critical_points(a) if a > 0 else None
        if cp is None:
            raise ValueError(f"a = {a!r} outside (0, 1/sqrt(3)]")
        x1, x2 = cp
        if isinstance(x1, Fraction):
            g_min, g_max = _g_pair(a, x1, x2)
        else:
            g_min, g_max = _g_pair(float(a), x1, x2)
        rows.append((a, g_min, g_max))
    return rows


def envelope_grid(points: int) -> list:
    """``points`` equally spaced values ending at 1/sqrt(3)."""
    return [INV_SQRT3 * (i + 1) / points for i in range(points)]


def _monotone_exact(a: Fraction, lo, hi, grid: int, increasing: bool) -> bool:
    """Strict monotonicity of the gun map on ``grid + 1`` rational points of ``[lo, hi]``."""
    lo, hi = Fraction(lo), Fraction(hi)
    xs = [lo + (hi - lo) * i / grid for i in range(grid + 1)]
    vals = [gun_fixed_point_map(a, x) for x in xs]
    return _strictly_monotone(vals, increasing)


def _gun_discrepancy(rep: CertificationReport, g: StateGraph, a_q: Fraction, derived_root: float | None):
    a3 = a_q**3
    printed = -(a3 + 2)
    derived = -(a3 + 2 * a_q)
    printed_poly = ps.gun_polynomial_printed(a_q)
    pc = ps.sturm_positive_roots(printed_poly)
    red = reduce_gun(rep.params)
    printed_roots = []
    for iv in pc.isolating_intervals:
        y = ps.refine_root(printed_poly, iv)
        x = red.x_from_y(y)
        printed_roots.append({"y": y, "x": x, "system_residual": red.system_residual(x, y)})
    info = {
        "printed_y4_coefficient": str(printed),
        "derived_y4_coefficient": str(derived),
        "printed_formula": "-(a^3 + 2)",
        "derived_formula": "-(a^3 + 2a)",
        "coincide": printed == derived,
        "derived_root": derived_root,
        "derived_root_system_residual": (red.system_residual(red.x_from_y(derived_root), derived_root)
                                         if derived_root is not None else None),
        "printed_roots": printed_roots,
    }
    rep.extra["coefficient_discrepancy"] = info
    if printed == derived:
        rep.notes.append(f"y^4 coefficient: printed -(a^3+2) and derived -(a^3+2a) coincide at a = {a_q}")
    else:
        worst = max((r["system_residual"] for r in printed_roots), default=float("nan"))
        rep.notes.append(
            f"y^4 coefficient discrepancy at a = {a_q}: printed -(a^3+2) = {printed}, "
            f"derived -(a^3+2a) = {derived}; derived polynomial used; "
            f"printed polynomial roots miss the system by residual {worst:.3e}")


def certify_gun(p: ModelParams, grid: int = DEFAULT_GRID) -> CertificationReport:
    _require("gun", p, "gun")
    g = preset_graph("gun")
    a_q = p.a_q
    a = p.a_f
    critical = 3 * a_q * a_q <= 1
    rep = CertificationReport("gun", p, mode=_mode(p), branch="critical" if critical else "no-critical")
    if abs(3 * a_q * a_q - 1) < NEAR_BOUNDARY:
        rep.extra["near_boundary"] = True
        rep.notes.append(f"a = {a_q} is near the branch boundary 1/sqrt(3)")

    rep.add("f_at_a_is_2a", gun_fixed_point_map(a_q, a_q) == 2 * a_q, "exact", "f(a) = 2a > a")

    if not critical:
        disc = 4 - 12 * a_q * a_q
        rep.add("tangency_quadratic_negative", disc < 0, "exact",
                f"-a x^2 + 2x - 3a has discriminant {disc} < 0, so f' < 0 on x > a")
        tang = ps.gun_tangency_polynomial(a_q)
        hi = ps.cauchy_bound(tang)
        n_tang = ps.count_roots_in(tang, a_q, hi)
        rep.add("tangency_no_root_exact", n_tang == 0, "exact",
                f"x f'(x) = f(x) has {n_tang} roots in (a, {float(hi):.6g})")
        xs = [a + (float(hi) - a) * (i + 1) / (4 * grid) for i in range(4 * grid)]
        rep.add("tangency_no_root_grid", _no_sign_change(tang.eval_float(x) for x in xs), "grid",
                f"{4 * grid} points on (a, {float(hi):.6g}]")
    else:
        x1, x2 = gun_critical_points(a_q)
        x1f, x2f = float(x1), float(x2)
        rep.extra["critical_points"] = [x1f, x2f]
        rep.add("a_lt_x1_le_x2", a < x1f <= x2f, "numeric", f"x1 = {x1f!r}, x2 = {x2f!r}")
        rep.add("decreasing_a_x1", _monotone_exact(a_q, a_q, x1f, grid, False), "grid")
        if x2f > x1f:
            rep.add("increasing_x1_x2", _monotone_exact(a_q, x1f, x2f, grid, True), "grid")
        rep.add("decreasing_beyond_x2", _monotone_exact(a_q, x2f, 10 * x2f, grid, False), "grid",
                "sampled on (x2, 10*x2]")
        if isinstance(x1, Fraction):
            g_min, g_max = _g_pair(a_q, x1, x2)
            kind = "exact"
        else:
            g_min, g_max = _g_pair(a, x1f, x2f)
            kind = "numeric"
        rep.extra["envelope"] = {"g_min": float(g_min), "g_max": float(g_max)}
        rep.add("f_x1_below_diagonal", g_min < 0, kind, f"f(x1) - x1 = {float(g_min):.6g}")
        rep.add("f_x2_below_diagonal", g_max < 0, kind, f"f(x2) - x2 = {float(g_max):.6g}")

    poly = ps.gun_polynomial(a_q)
    cert = _add_root_certificate(rep, poly)
    _solutions_from_y_roots(rep, g, poly, cert, reduce_gun(p))
    derived_root = math.sqrt(rep.solutions[0].law.z2) if rep.solutions else None
    _gun_discrepancy(rep, g, a_q, derived_root)
    _add_fixed_point_checks(rep, g, symmetry=True)
    return rep


# --- dispatch and sweeps --------------------------------------------------

PIPELINES = {"stick": certify_stick, "key": certify_key, "gun": certify_gun}


def certify(g: StateGraph, p: ModelParams, grid: int = DEFAULT_GRID) -> CertificationReport:
    if not g.is_preset:
        raise ValueError(f"no certification pipeline for custom graph {g.name!r}")
    return PIPELINES[g.name](p, grid)


@dataclass
class SweepRow:
    a: Fraction | float
    lam: Fraction | float
    graph: str
    count: int
    z0: float
    z1: float
    z2: float
    branch: str
    checks_passed: bool
    near_boundary: bool = False
    mode: str = "exact"


class SweepError(RuntimeError):
    def __init__(self, failures: list, rows: list):
        self.failures = failures
        self.rows = rows
        msg = "; ".join(f"a={a}: {err}" for a, err in failures)
        super().__init__(f"{len(failures)} sweep point(s) failed: {msg}")


def row_from_report(rep: CertificationReport) -> SweepRow:
    nan = float("nan")
    law = rep.solutions[0].law if rep.certified_count == 1 else None
    return SweepRow(
        a=rep.params.a, lam=rep.params.lam, graph=rep.graph, count=rep.certified_count,
        z0=law.z0 if law else nan, z1=law.z1 if law else nan, z2=law.z2 if law else nan,
        branch=rep.branch, checks_passed=rep.checks_passed,
        near_boundary=bool(rep.extra.get("near_boundary", False)) or rep.flagged,
        mode=rep.mode,
    )


def _sweep_task(args):
    name, k, a, grid = args
    try:
        rep = certify(preset_graph(name), params_from_a(k, a), grid)
        return row_from_report(rep), None
    except Exception as exc:  # collected and re-raised with the offending a
        return None, f"{type(exc).__name__}: {exc}"


def sweep(g: StateGraph, k: int, a_values: Sequence, grid: int = DEFAULT_GRID,
          workers: int = 1) -> list:
    if not g.is_preset:
        raise ValueError(f"no certification pipeline for custom graph {g.name!r}")
    tasks = [(g.name, k, a, grid) for a in a_values]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_sweep_task(t) for t in tasks]
    rows, failures = [], []
    for a, (row, err) in zip(a_values, results):
        if err is not None:
            failures.append((a, err))
        else:
            rows.append(row)
    if failures:
        raise SweepError(failures, rows)
    return rows


def log_spaced_rationals(lo, hi, n: int, max_denominator: int = 10**6) -> list:
    """``n`` rationals approximately log-spaced on ``[lo, hi]``, endpoints exact."""
    lo, hi = Fraction(lo), Fraction(hi)
    if n < 2 or not 0 < lo < hi:
        raise ValueError("need n >= 2 and 0 < lo < hi")
    llo, lhi = math.log(lo), math.log(hi)
    out = [lo]
    for i in range(1, n - 1):
        out.append(Fraction(math.exp(llo + (lhi - llo) * i / (n - 1))).limit_denominator(max_denominator))
    out.append(hi)
    return out


def linear_rationals(lo, hi, n: int) -> list:
    lo, hi = Fraction(lo), Fraction(hi)
    if n < 2 or not lo < hi:
        raise ValueError("need n >= 2 and lo < hi")
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]
