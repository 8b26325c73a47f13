"""CSV/JSON serialization of sweep rows, envelopes and reports."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

from .certify import SweepRow

SCHEMA_VERSION = 1
SWEEP_COLUMNS = ("schema_version", "a", "lambda", "graph", "count", "z0", "z1", "z2",
                 "branch", "checks_passed", "near_boundary", "mode")
ENVELOPE_COLUMNS = ("schema_version", "a", "g_min", "g_max")


def fmt_number(v) -> str:
    """Rationals as ``p/q`` (or ``p``), floats in shortest round-trip form."""
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def parse_number(s: str):
    if "/" in s or s.lstrip("-").isdigit():
        return Fraction(s)
    return float(s)


def _parse_bool(s: str) -> bool:
    if s not in ("true", "false"):
        raise ValueError(f"bad boolean {s!r}")
    return s == "true"


def sweep_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([SCHEMA_VERSION, fmt_number(r.a), fmt_number(r.lam), r.graph, r.count,
                    fmt_number(r.z0), fmt_number(r.z1), fmt_number(r.z2), r.branch,
                    fmt_number(r.checks_passed), fmt_number(r.near_boundary), r.mode])
    return buf.getvalue()


def sweep_from_csv(text: str) -> list:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != SWEEP_COLUMNS:
        raise ValueError(f"unexpected sweep columns {reader.fieldnames}")
    rows = []
    for rec in reader:
        if int(rec["schema_version"]) != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {rec['schema_version']}")
        rows.append(SweepRow(
            a=parse_number(rec["a"]), lam=parse_number(rec["lambda"]), graph=rec["graph"],
            count=int(rec["count"]), z0=float(rec["z0"]), z1=float(rec["z1"]), z2=float(rec["z2"]),
            branch=rec["branch"], checks_passed=_parse_bool(rec["checks_passed"]),
            near_boundary=_parse_bool(rec["near_boundary"]), mode=rec["mode"],
        ))
    return rows


def envelope_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ENVELOPE_COLUMNS)
    for a, g_min, g_max in rows:
        w.writerow([SCHEMA_VERSION, fmt_number(a), fmt_number(g_min), fmt_number(g_max)])
    return buf.getvalue()


def dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"
