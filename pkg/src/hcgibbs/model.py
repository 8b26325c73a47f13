"""State graphs and model parameters for the four-state hard-core models.

States are the integers 0..3. A constraint graph lists which pairs of
states may sit on neighbouring vertices of the tree; loops are allowed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Union

STATES = (0, 1, 2, 3)

Number = Union[Fraction, float, int]

PRESET_EDGES = {
    "stick": ((0, 1), (1, 2), (2, 3)),
    "key": ((0, 1), (0, 2), (1, 2), (2, 3)),
    "gun": ((0, 1), (0, 2), (1, 2), (2, 2), (2, 3)),
}
PRESETS = tuple(PRESET_EDGES)


class ModelError(ValueError):
    """Invalid graph or parameter input."""


def _normalize_edges(edges: Iterable[Iterable[int]]) -> frozenset:
    out = set()
    for e in edges:
        pair = tuple(int(s) for s in e)
        if len(pair) != 2:
            raise ModelError(f"edge {pair!r} must have two endpoints")
        if any(s not in STATES for s in pair):
            raise ModelError(f"edge {pair!r} uses a state outside 0..3")
        out.add(tuple(sorted(pair)))
    return frozenset(out)


@dataclass(frozen=True)
class StateGraph:
    name: str
    edges: frozenset
    adjacency: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = _normalize_edges(self.edges)
        object.__setattr__(self, "edges", edges)
        adj = [[0] * 4 for _ in STATES]
        for i, j in edges:
            adj[i][j] = adj[j][i] = 1
        object.__setattr__(self, "adjacency", tuple(tuple(r) for r in adj))

    @property
    def is_preset(self) -> bool:
        return self.name in PRESET_EDGES and self.edges == _normalize_edges(PRESET_EDGES[self.name])

    def neighbours(self, i: int) -> tuple:
        return tuple(j for j in STATES if self.adjacency[i][j])

    def degree(self, i: int) -> int:
        # a loop counts once
        return sum(self.adjacency[i])

    def edge_list(self) -> list:
        return [list(e) for e in sorted(self.edges)]

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "edges": self.edge_list()})

    @classmethod
    def from_dict(cls, doc: dict) -> "StateGraph":
        if "edges" not in doc:
            name = doc.get("name")
            if name in PRESET_EDGES:
                return preset_graph(name)
            raise ModelError("graph document needs 'edges' or a preset 'name'")
        name = doc.get("name", "custom")
        g = cls(name, doc["edges"])
        if name in PRESET_EDGES and not g.is_preset:
            # a preset name with foreign edges would be silently mis-certified
            return cls("custom", g.edges)
        return g

    @classmethod
    def from_json(cls, text: str) -> "StateGraph":
        return cls.from_dict(json.loads(text))


def preset_graph(name: str) -> StateGraph:
    try:
        edges = PRESET_EDGES[name]
    except KeyError:
        raise ModelError(f"unknown preset {name!r}; expected one of {PRESETS}") from None
    return StateGraph(name, edges)


def is_admissible_pair(g: StateGraph, i: int, j: int) -> bool:
    return g.adjacency[i][j] == 1


@dataclass(frozen=True)
class ModelParams:
    """Tree order ``k``, activity ``lam`` and root parameter ``a = lam**(1/k)``.

    ``exact`` is true when both ``lam`` and ``a`` are rationals with
    ``a**k == lam`` exactly; only then are polynomial root counts exact
    statements about the requested activity.
    """

    k: int
    lam: Number
    a: Number
    exact: bool

    @property
    def lam_f(self) -> float:
        return float(self.lam)

    @property
    def a_f(self) -> float:
        return float(self.a)

    @property
    def a_q(self) -> Fraction:
        """``a`` as a rational (the binary value of a float ``a``)."""
        return Fraction(self.a)


def _check_k(k: int) -> int:
    if int(k) != k or k < 1:
        raise ModelError(f"tree order k must be an integer >= 1, got {k!r}")
    return int(k)


def _as_number(v) -> Number:
    if isinstance(v, (Fraction, float)):
        return v
    if isinstance(v, Rational):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    return float(v)


def params_from_a(k: int, a) -> ModelParams:
    k = _check_k(k)
    a = _as_number(a)
    if not a > 0 or (isinstance(a, float) and not math.isfinite(a)):
        raise ModelError(f"a must be positive and finite, got {a!r}")
    if isinstance(a, Fraction):
        return ModelParams(k, a**k, a, True)
    return ModelParams(k, a**k, a, False)


def _exact_root(q: Fraction, k: int) -> Fraction | None:
    def iroot(n: int) -> int | None:
        r = round(n ** (1.0 / k)) if n < 2**1000 else int(math.exp(math.log(n) / k))
        for c in (r - 1, r, r + 1):
            if c >= 0 and c**k == n:
                return c
        lo, hi = 0, 1 << (n.bit_length() // k + 1)
        while lo <= hi:
            mid = (lo + hi) // 2
            p = mid**k
            if p == n:
                return mid
            if p < n:
                lo = mid + 1
            else:
                hi = mid - 1
        return None

    num, den = iroot(q.numerator), iroot(q.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def params_from_lambda(k: int, lam) -> ModelParams:
    """Parameters from the activity.

    A rational ``lam`` that is a perfect k-th power yields exact parameters;
    otherwise ``a`` is the floating-point root and ``exact`` is false.
    """
    k = _check_k(k)
    lam = _as_number(lam)
    if not lam > 0 or (isinstance(lam, float) and not math.isfinite(lam)):
        raise ModelError(f"lambda must be positive and finite, got {lam!r}")
    if isinstance(lam, Fraction):
        root = _exact_root(lam, k)
        if root is not None:
            return ModelParams(k, lam, root, True)
    return ModelParams(k, lam, float(lam) ** (1.0 / k), False)
