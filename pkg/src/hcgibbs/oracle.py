"""Exhaustive finite-tree measures and the consistency check.

The finite-volume measure on the ball ``V_n`` of the Cayley tree is

    mu_n(sigma) = (1/Z_n) * prod_{x in V_n} w(sigma(x)) * prod_{x in W_n} h(sigma(x))

with activity ``w(s) = lam`` on the occupied states and 1 otherwise, and
leaf factors ``h``. A boundary law ``z`` enters through ``h(s) = z_s / w(s)``
(``z_3 = 1``), i.e. the leaf factor including its own activity is exactly
``z_s``.

With the default ``occupied = (0, 1, 2)`` the consistency condition of this
family of measures is precisely the fixed-point equation of
``recursion.ti_map``. ``LITERAL_OCCUPIED = (1, 2, 3)`` counts the states
``>= 1`` instead; it is kept to show that this reading is consistent with
the same boundary laws only at ``lam = 1``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterator, Sequence

from .model import ModelParams, StateGraph
from .recursion import BoundaryLaw

OPERATIVE_OCCUPIED = (0, 1, 2)
LITERAL_OCCUPIED = (1, 2, 3)

# raw enumeration is capped at 4**MAX_ENUM_VERTICES assignments
MAX_ENUM_VERTICES = 10
MAX_TREE_VERTICES = 2_000_000


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class TreeIndex:
    """Ball of radius ``n`` in the order-``k`` Cayley tree, vertices in BFS order."""

    k: int
    n: int
    parent: tuple
    levels: tuple  # levels[m] = (first, stop) index range of W_m

    @property
    def size(self) -> int:
        return len(self.parent)

    def level(self, m: int) -> range:
        return range(*self.levels[m])

    def children(self, v: int) -> list:
        return [u for u in range(v + 1, self.size) if self.parent[u] == v]

    def prefix_size(self, m: int) -> int:
        """Number of vertices in ``V_m``."""
        return self.levels[m][1]


def tree_size(k: int, n: int) -> int:
    size, width = 1, 1
    for m in range(1, n + 1):
        width = width * (k + 1) if m == 1 else width * k
        size += width
    return size


def build_tree(k: int, n: int, max_vertices: int = MAX_TREE_VERTICES) -> TreeIndex:
    if k < 1 or n < 0:
        raise ValueError(f"need k >= 1 and n >= 0, got k={k}, n={n}")
    if tree_size(k, n) > max_vertices:
        raise BudgetExceeded(f"tree (k={k}, n={n}) has {tree_size(k, n)} vertices > {max_vertices}")
    parent = [-1]
    levels = [(0, 1)]
    for m in range(1, n + 1):
        first = len(parent)
        for v in range(*levels[-1]):
            for _ in range(k + 1 if m == 1 else k):
                parent.append(v)
        levels.append((first, len(parent)))
    return TreeIndex(k, n, tuple(parent), tuple(levels))


def _check_enum_budget(t: TreeIndex, upto: int | None = None):
    size = t.size if upto is None else t.prefix_size(upto)
    if size > MAX_ENUM_VERTICES:
        raise BudgetExceeded(
            f"enumeration over {size} vertices exceeds the 4**{MAX_ENUM_VERTICES} budget")


def enumerate_admissible(g: StateGraph, t: TreeIndex, upto: int | None = None) -> Iterator[tuple]:
    """Admissible assignments on ``V_upto`` (default ``V_n``), pruned as they grow."""
    m = t.n if upto is None else upto
    _check_enum_budget(t, m)
    size = t.prefix_size(m)
    parent = t.parent
    nbrs = [g.neighbours(s) for s in range(4)]
    sigma = [0] * size

    def rec(v):
        if v == size:
            yield tuple(sigma)
            return
        allowed = range(4) if v == 0 else nbrs[sigma[parent[v]]]
        for s in allowed:
            sigma[v] = s
            yield from rec(v + 1)

    yield from rec(0)


def count_admissible_enum(g: StateGraph, t: TreeIndex) -> int:
    return sum(1 for _ in enumerate_admissible(g, t))


def count_admissible_dp(g: StateGraph, t: TreeIndex) -> int:
    """Transfer-matrix count over the tree levels, exact integers."""
    sub = [1, 1, 1, 1]  # leaf level
    for m in range(t.n, 0, -1):
        k_children = t.k + 1 if m == 1 else t.k
        msg = [sum(g.adjacency[i][j] * sub[j] for j in range(4)) for i in range(4)]
        sub = [msg[i] ** k_children for i in range(4)]
    return sum(sub)


def count_admissible(g: StateGraph, t: TreeIndex) -> int:
    """Exact count; raw enumeration and tree DP must agree where both run."""
    dp = count_admissible_dp(g, t)
    if t.size <= MAX_ENUM_VERTICES:
        brute = count_admissible_enum(g, t)
        if brute != dp:
            raise AssertionError(f"enumeration {brute} != DP {dp}")
    return dp


def _vertex_factors(p: ModelParams, boundary: BoundaryLaw, occupied: Sequence[int]):
    lam = p.lam_f
    w = [lam if s in occupied else 1.0 for s in range(4)]
    z = boundary.full()
    h = [z[s] / w[s] for s in range(4)]
    return w, h


@dataclass
class MeasureTable:
    configs: list  # (configuration tuple, weight, probability)
    partition_function: float

    def probabilities(self) -> dict:
        return {c: pr for c, _, pr in self.configs}


def finite_measure(g: StateGraph, p: ModelParams, t: TreeIndex, boundary,
                   occupied: Sequence[int] = OPERATIVE_OCCUPIED) -> MeasureTable:
    boundary = boundary if isinstance(boundary, BoundaryLaw) else BoundaryLaw(*boundary)
    w, h = _vertex_factors(p, boundary, occupied)
    leaf_lo = t.levels[t.n][0]
    rows = []
    for sigma in enumerate_admissible(g, t):
        weight = 1.0
        for v, s in enumerate(sigma):
            weight *= w[s]
            if v >= leaf_lo:
                weight *= h[s]
        rows.append((sigma, weight))
    z_n = math.fsum(wt for _, wt in rows)
    if not z_n > 0:
        raise ArithmeticError("no admissible configuration carries positive weight")
    return MeasureTable([(c, wt, wt / z_n) for c, wt in rows], z_n)


def partition_function_dp(g: StateGraph, p: ModelParams, t: TreeIndex, boundary,
                          occupied: Sequence[int] = OPERATIVE_OCCUPIED) -> tuple:
    """``(Z_n, root marginal)`` by summing the tree from the leaves inward."""
    boundary = boundary if isinstance(boundary, BoundaryLaw) else BoundaryLaw(*boundary)
    w, h = _vertex_factors(p, boundary, occupied)
    sub = [w[s] * h[s] for s in range(4)]
    for m in range(t.n, 0, -1):
        nchild = t.k + 1 if m == 1 else t.k
        msg = [math.fsum(g.adjacency[i][j] * sub[j] for j in range(4)) for i in range(4)]
        sub = [w[i] * msg[i] ** nchild for i in range(4)]
    z_n = math.fsum(sub)
    return z_n, tuple(v / z_n for v in sub)


def _shell_marginal(g: StateGraph, p: ModelParams, t: TreeIndex, boundary: BoundaryLaw,
                    occupied: Sequence[int]) -> dict:
    """Weights of ``mu_n`` summed over the outer shell, keyed by ``V_{n-1}`` configuration."""
    if t.size <= MAX_ENUM_VERTICES:
        table = finite_measure(g, p, t, boundary, occupied)
        cut = t.prefix_size(t.n - 1)
        acc = defaultdict(list)
        for sigma, _, pr in table.configs:
            acc[sigma[:cut]].append(pr)
        return {c: math.fsum(v) for c, v in acc.items()}
    # outer shell summed analytically; V_{n-1} still enumerated
    w, h = _vertex_factors(p, boundary, occupied)
    nchild = t.k + 1 if t.n == 1 else t.k
    msg = [math.fsum(g.adjacency[i][j] * w[j] * h[j] for j in range(4)) ** nchild for i in range(4)]
    edge_lo = t.levels[t.n - 1][0]
    rows = {}
    for sigma in enumerate_admissible(g, t, t.n - 1):
        weight = 1.0
        for v, s in enumerate(sigma):
            weight *= w[s]
            if v >= edge_lo:
                weight *= msg[s]
        rows[sigma] = weight
    z_n = math.fsum(rows.values())
    return {c: wt / z_n for c, wt in rows.items()}


def check_consistency(g: StateGraph, p: ModelParams, n: int, boundary,
                      occupied: Sequence[int] = OPERATIVE_OCCUPIED) -> float:
    """Largest gap between ``mu_{n-1}`` and ``mu_n`` marginalised to ``V_{n-1}``.

    From ``n = 2`` on, a vanishing gap is equivalent to ``boundary`` being a
    fixed point of ``ti_map``. At ``n = 1`` the leaf of ``V_0`` is the root,
    which has ``k + 1`` children rather than ``k``, so the comparison there
    tests a different equation.
    """
    if n < 1:
        raise ValueError("consistency needs n >= 1")
    boundary = boundary if isinstance(boundary, BoundaryLaw) else BoundaryLaw(*boundary)
    t_n = build_tree(p.k, n)
    t_prev = build_tree(p.k, n - 1)
    marg = _shell_marginal(g, p, t_n, boundary, occupied)
    prev = finite_measure(g, p, t_prev, boundary, occupied).probabilities()
    keys = set(marg) | set(prev)
    return max(abs(marg.get(c, 0.0) - prev.get(c, 0.0)) for c in keys)


def root_marginal(g: StateGraph, p: ModelParams, n: int, boundary,
                  occupied: Sequence[int] = OPERATIVE_OCCUPIED) -> tuple:
    t = build_tree(p.k, n)
    if t.size <= MAX_ENUM_VERTICES:
        table = finite_measure(g, p, t, boundary, occupied)
        acc = [[], [], [], []]
        for sigma, _, pr in table.configs:
            acc[sigma[0]].append(pr)
        return tuple(math.fsum(v) for v in acc)
    return partition_function_dp(g, p, t, boundary, occupied)[1]
