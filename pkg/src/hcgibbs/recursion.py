"""Boundary-law recursions and their scalar reductions for k = 2.

A boundary law is a positive triple ``(z0, z1, z2)`` with the state-3
component fixed to 1. One step of the recursion maps the laws of the
children of a vertex to the law of the vertex itself::

    z'_i = lam * prod_y  l_i(z_y) / l_3(z_y),      i = 0, 1, 2
    l_i(z) = a_i0*z0 + a_i1*z1 + a_i2*z2 + a_i3

Translation-invariant laws are the fixed points of the one-child-type
version ``ti_map``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .model import ModelParams, StateGraph


class BoundaryLawError(ArithmeticError):
    pass


class DomainError(BoundaryLawError):
    """Evaluation point outside the domain where a formula is valid."""


@dataclass(frozen=True)
class BoundaryLaw:
    z0: float
    z1: float
    z2: float

    def __post_init__(self):
        for v in self.as_tuple():
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"boundary law components must be positive and finite: {self}")

    def as_tuple(self) -> tuple:
        return (self.z0, self.z1, self.z2)

    def full(self) -> tuple:
        """All four components, state 3 normalised to 1."""
        return (self.z0, self.z1, self.z2, 1.0)


@dataclass(frozen=True)
class TIMapResult:
    input: BoundaryLaw
    output: BoundaryLaw
    residual: float


def _as_law(z) -> BoundaryLaw:
    return z if isinstance(z, BoundaryLaw) else BoundaryLaw(*z)


def row_sums(g: StateGraph, z: BoundaryLaw) -> tuple:
    """``l_i(z)`` for i = 0..3."""
    full = z.full()
    return tuple(math.fsum(g.adjacency[i][j] * full[j] for j in range(4)) for i in range(4))


def general_boundary_map(g: StateGraph, p: ModelParams, children: Sequence) -> BoundaryLaw:
    if not children:
        raise ValueError("at least one child law is required")
    prod = [1.0, 1.0, 1.0]
    for child in children:
        ell = row_sums(g, _as_law(child))
        if ell[3] == 0:
            raise BoundaryLawError("l_3(z) vanishes: state 3 has no admissible neighbour")
        for i in range(3):
            prod[i] *= ell[i] / ell[3]
    lam = p.lam_f
    try:
        return BoundaryLaw(*(lam * v for v in prod))
    except ValueError as exc:
        # custom graphs may have a row without neighbours among 0..3
        raise BoundaryLawError(str(exc)) from None


def ti_map(g: StateGraph, p: ModelParams, z) -> BoundaryLaw:
    z = _as_law(z)
    ell = row_sums(g, z)
    if ell[3] == 0:
        raise BoundaryLawError("l_3(z) vanishes: state 3 has no admissible neighbour")
    lam = p.lam_f
    try:
        return BoundaryLaw(*(lam * (ell[i] / ell[3]) ** p.k for i in range(3)))
    except ValueError as exc:
        raise BoundaryLawError(str(exc)) from None


def ti_residual(g: StateGraph, p: ModelParams, z) -> TIMapResult:
    z = _as_law(z)
    out = ti_map(g, p, z)
    # absolute below 1, relative above: large activities push z past 1e5
    res = max(abs(o - i) / max(1.0, i) for o, i in zip(out.as_tuple(), z.as_tuple()))
    return TIMapResult(z, out, res)


def iterate_ti_map(g: StateGraph, p: ModelParams, z0=(1.0, 1.0, 1.0), *,
                   damping: float = 0.5, tol: float = 1e-13, max_iter: int = 100_000) -> TIMapResult:
    """Damped fixed-point iteration in log coordinates.

    Used for graphs or tree orders without a dedicated certification
    pipeline. Convergence is not guaranteed; the caller inspects the
    returned residual.
    """
    z = _as_law(z0)
    logs = [math.log(v) for v in z.as_tuple()]
    for _ in range(max_iter):
        out = ti_map(g, p, BoundaryLaw(*(math.exp(v) for v in logs)))
        new = [(1 - damping) * old + damping * math.log(v) for old, v in zip(logs, out.as_tuple())]
        step = max(abs(x - y) for x, y in zip(new, logs))
        logs = new
        if step < tol:
            break
    return ti_residual(g, p, BoundaryLaw(*(math.exp(v) for v in logs)))


def _require_k2(p: ModelParams):
    if p.k != 2:
        raise ValueError(f"scalar reductions are defined for k = 2 only (got k = {p.k})")


# --- stick ---------------------------------------------------------------

def stick_scalar_map(p: ModelParams, z1: float) -> float:
    """``f(z1) = lam * (z1^2/(z1+1)^2 + 1)^2``; its fixed points are the stick laws."""
    _require_k2(p)
    s = z1 * z1 / ((z1 + 1) ** 2)
    return p.lam_f * (s + 1) ** 2


def stick_scalar_derivative(p: ModelParams, z1: float) -> float:
    _require_k2(p)
    s = z1 * z1 / ((z1 + 1) ** 2)
    return 4 * p.lam_f * (s + 1) * z1 / (z1 + 1) ** 3


def stick_normalized_derivative(z1: float) -> float:
    """Derivative of the stick map at ``z1`` with ``lam`` chosen so that ``z1`` is fixed."""
    return 4 * z1 * z1 / ((z1 * z1 + (z1 + 1) ** 2) * (z1 + 1))


def stick_law_from_z1(p: ModelParams, z1: float) -> BoundaryLaw:
    _require_k2(p)
    lam = p.lam_f
    z2 = (lam * (z1 + 1) ** 2) ** (1.0 / 3.0)
    return BoundaryLaw(lam * (z1 / z2) ** 2, z1, z2)


# --- key and gun ----------------------------------------------------------

@dataclass(frozen=True)
class Reduction:
    """Scalar reduction of the key or gun system (k = 2).

    ``x_from_y`` back-substitutes the second coordinate, ``y_residual``
    is ``y^3 - rhs(y)`` of the scalar y-equation, ``to_law`` maps a pair
    ``(x, y)`` to ``(z0, z1, z2) = (x^2, x^2, y^2)``.
    """

    graph: str
    a: float
    x_from_y: Callable[[float], float]
    y_residual: Callable[[float], float]
    y_equation: str
    x_fixed_point: Callable[[float], float] | None = None

    def to_law(self, x: float, y: float) -> BoundaryLaw:
        return BoundaryLaw(x * x, x * x, y * y)

    def system_residual(self, x: float, y: float) -> float:
        a = self.a
        r1 = x - a * (x * x + y * y) / (y * y)
        if self.graph == "key":
            r2 = y - a * (2 * x * x + 1) / (y * y)
        else:
            r2 = y - a * (2 * x * x + y * y + 1) / (y * y)
        return max(abs(r1), abs(r2))


def reduce_key(p: ModelParams) -> Reduction:
    _require_k2(p)
    a = p.a_f

    def x_from_y(y):
        return y / 2 - a / (2 * y * y) + a

    def y_residual(y):
        return y**3 - a * (2 * x_from_y(y) ** 2 + 1)

    return Reduction("key", a, x_from_y, y_residual, "y^3 = a*(2*(y/2 - a/(2*y^2) + a)^2 + 1)")


def gun_denominator(a: float, x: float) -> float:
    return 2 * x**3 - a * x * x + x - a


def gun_fixed_point_map(a, x):
    """``f(x) = a*((x^3/D(x))^2 + 1)`` with ``D(x) = 2x^3 - a x^2 + x - a``.

    Works for floats and exact rationals alike. Raises ``DomainError``
    where ``D(x) <= 0``.
    """
    d = 2 * x**3 - a * x * x + x - a
    if d <= 0:
        raise DomainError(f"gun map denominator {float(d)!r} <= 0 at x = {float(x)!r}")
    g = x**3 / d
    return a * (g * g + 1)


def gun_fixed_point_derivative(a: float, x: float) -> float:
    """``f'(x) = 2 a x^5 (-a x^2 + 2x - 3a) / D(x)^3``."""
    d = gun_denominator(a, x)
    if d == 0:
        raise DomainError(f"gun map denominator vanishes at x = {x!r}")
    return 2 * a * x**5 * (-a * x * x + 2 * x - 3 * a) / d**3


def reduce_gun(p: ModelParams) -> Reduction:
    _require_k2(p)
    a = p.a_f

    def x_from_y(y):
        return y / 2 - a / (2 * y * y) + a / 2

    def y_residual(y):
        return y**3 - (2 * a * x_from_y(y) ** 2 + a * y * y + a)

    return Reduction("gun", a, x_from_y, y_residual,
                     "y^3 = 2a*(y/2 - a/(2*y^2) + a/2)^2 + a*y^2 + a",
                     lambda x: gun_fixed_point_map(a, x))
