"""Exact univariate polynomials over the rationals and real-root certification.

Root counting is done with Sturm chains of the squarefree part, in exact
``Fraction`` arithmetic. Floats only appear in the value returned by
``refine_root``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence


class PolynomialError(ValueError):
    pass


def _q(c) -> Fraction:
    if isinstance(c, float):
        return Fraction(c)  # exact binary value
    return Fraction(c)


class Polynomial:
    """Dense polynomial, ``coeffs[i]`` multiplies ``y**i``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        cs = [_q(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs:
            cs = [Fraction(0)]
        self.coeffs = tuple(cs)

    @classmethod
    def from_desc(cls, coeffs: Iterable) -> "Polynomial":
        return cls(list(coeffs)[::-1])

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "Polynomial":
        p = cls([lead])
        for r in roots:
            p = p * cls([-_q(r), 1])
        return p

    # -- basic protocol --------------------------------------------------
    @property
    def degree(self) -> int:
        return -1 if self.is_zero() else len(self.coeffs) - 1

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def desc(self) -> list:
        return list(self.coeffs[::-1])

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial.from_desc([{', '.join(str(c) for c in self.desc())}])"

    def __call__(self, y):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * y + c
        return acc

    def eval_float(self, y: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * y + float(c)
        return acc

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return Polynomial(x + y for x, y in zip(a, b))

    def __neg__(self) -> "Polynomial":
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            c = _q(other)
            return Polynomial(x * c for x in self.coeffs)
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    out[i + j] += x * y
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        out = Polynomial([1])
        for _ in range(n):
            out = out * self
        return out

    def derivative(self) -> "Polynomial":
        return Polynomial([i * c for i, c in enumerate(self.coeffs)][1:] or [0])

    def divmod(self, other: "Polynomial"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        quo = [Fraction(0)] * max(len(rem) - dq, 1)
        inv = 1 / other.lead
        for i in range(len(rem) - 1, dq - 1, -1):
            c = rem[i] * inv
            if c:
                quo[i - dq] = c
                for j, oc in enumerate(other.coeffs):
                    rem[i - dq + j] -= c * oc
        return Polynomial(quo), Polynomial(rem[:dq] or [0])

    def monic(self) -> "Polynomial":
        return self * (1 / self.lead)

    def sign_normalized(self) -> "Polynomial":
        """Scale by ``1/|lead|``; keeps every sign."""
        return self * (1 / abs(self.lead))

    # -- serialization ---------------------------------------------------
    def to_json(self) -> str:
        return json.dumps(poly_to_strings(self))

    @classmethod
    def from_json(cls, text: str) -> "Polynomial":
        return poly_from_strings(json.loads(text))


def poly_to_strings(p: Polynomial) -> list:
    """Descending-degree coefficients as ``"num/den"`` strings."""
    return [f"{c.numerator}/{c.denominator}" for c in p.desc()]


def poly_from_strings(items: Sequence) -> Polynomial:
    try:
        return Polynomial.from_desc(Fraction(str(s)) for s in items)
    except (ValueError, ZeroDivisionError) as exc:
        raise PolynomialError(f"bad coefficient list: {exc}") from None


def poly_gcd(p: Polynomial, q: Polynomial) -> Polynomial:
    while not q.is_zero():
        p, q = q, p.divmod(q)[1]
    return p.monic() if not p.is_zero() else p


def squarefree_part(p: Polynomial) -> Polynomial:
    if p.is_zero():
        raise PolynomialError("zero polynomial")
    if p.degree <= 0:
        return p
    g = poly_gcd(p, p.derivative())
    return p.divmod(g)[0]


def sign_variations(values: Iterable) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def descartes_bound(p: Polynomial) -> int:
    if p.is_zero():
        raise PolynomialError("Descartes bound of the zero polynomial")
    return sign_variations(p.coeffs)


def cauchy_bound(p: Polynomial) -> Fraction:
    """Every complex root has modulus strictly below this value."""
    if p.degree < 1:
        return Fraction(1)
    return 1 + max(abs(c) for c in p.coeffs[:-1]) / abs(p.lead)


def sturm_chain(p: Polynomial) -> list:
    """Sturm chain of the squarefree part of ``p``."""
    p0 = squarefree_part(p).sign_normalized()
    chain = [p0]
    if p0.degree < 1:
        return chain
    chain.append(p0.derivative().sign_normalized())
    while chain[-1].degree > 0:
        r = chain[-2].divmod(chain[-1])[1]
        if r.is_zero():
            break
        chain.append((-r).sign_normalized())
    return chain


def _sign_changes_at(chain: Sequence[Polynomial], y) -> int:
    return sign_variations(q(y) for q in chain)


def sturm_count(chain: Sequence[Polynomial], lo, hi) -> int:
    """Number of distinct real roots in ``(lo, hi]``."""
    return _sign_changes_at(chain, lo) - _sign_changes_at(chain, hi)


@dataclass
class RootCertificate:
    positive_root_count: int
    isolating_intervals: list = field(default_factory=list)
    method: str = "sturm"
    # roots closer than 1e-14 of their size to another root (near-tangent)
    flagged: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "positive_root_count": self.positive_root_count,
            "isolating_intervals": [[str(lo), str(hi)] for lo, hi in self.isolating_intervals],
            "method": self.method,
            "flagged": [[str(lo), str(hi)] for lo, hi in self.flagged],
        }


_SPLITS = (Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(2, 5), Fraction(3, 5))


def _split_point(p: Polynomial, lo: Fraction, hi: Fraction) -> Fraction:
    for t in _SPLITS:
        m = lo + (hi - lo) * t
        if p(m) != 0:
            return m
    # at most deg(p) roots; some point of a finer grid is a non-root
    n = 7
    while True:
        for i in range(1, n):
            m = lo + (hi - lo) * Fraction(i, n)
            if p(m) != 0:
                return m
        n += 2


def isolate_roots(p: Polynomial, lo, hi, chain=None) -> list:
    """Disjoint intervals ``(l, h)`` each holding exactly one root in ``(lo, hi]``.

    ``lo`` and ``hi`` must not be roots of ``p``.
    """
    lo, hi = _q(lo), _q(hi)
    sqf = squarefree_part(p)
    if sqf(lo) == 0 or sqf(hi) == 0:
        raise PolynomialError("interval endpoints must not be roots")
    chain = chain or sturm_chain(p)
    out = []
    stack = [(lo, hi, sturm_count(chain, lo, hi))]
    while stack:
        l, h, n = stack.pop()
        if n == 0:
            continue
        if n == 1:
            out.append((l, h))
            continue
        m = _split_point(sqf, l, h)
        nl = sturm_count(chain, l, m)
        stack.append((m, h, n - nl))
        stack.append((l, m, nl))
    out.sort()
    return out


NEAR_TANGENT_REL = Fraction(1, 10**14)


def _shrink(sqf: Polynomial, lo: Fraction, hi: Fraction, rel: Fraction) -> tuple:
    """Exact bisection of a one-root interval down to relative width ``rel``."""
    s_lo = sqf(lo) > 0
    while hi - lo > rel * (lo + hi) / 2:
        m = (lo + hi) / 2
        v = sqf(m)
        if v == 0:
            return m, m
        if (v > 0) == s_lo:
            lo = m
        else:
            hi = m
    return lo, hi


def _near_tangent(q: Polynomial, intervals: list) -> list:
    """Isolating intervals whose root has a neighbour closer than 1e-14 of its size."""
    if len(intervals) < 2:
        return []
    sqf = squarefree_part(q)
    tight = [_shrink(sqf, lo, hi, NEAR_TANGENT_REL / 4) for lo, hi in intervals]
    hits = set()
    for i in range(len(tight) - 1):
        gap = tight[i + 1][1] - tight[i][0]
        if gap < NEAR_TANGENT_REL * (tight[i][0] + tight[i + 1][1]) / 2:
            hits.update((i, i + 1))
    return [intervals[i] for i in sorted(hits)]


def sturm_positive_roots(p: Polynomial) -> RootCertificate:
    if p.is_zero():
        raise PolynomialError("Sturm count of the zero polynomial")
    # strip the root at zero so 0 is a valid non-root endpoint
    cs = list(p.coeffs)
    while cs[0] == 0:
        cs.pop(0)
    q = Polynomial(cs)
    if q.degree < 1:
        return RootCertificate(0, [], "sturm")
    chain = sturm_chain(q)
    bound = cauchy_bound(q)
    # no root of q lies in (0, lower]; lower is not a root of p either
    lower = abs(q.coeffs[0]) / (abs(q.coeffs[0]) + max(abs(c) for c in q.coeffs[1:]))
    left = Fraction(0) if len(cs) == len(p.coeffs) else lower
    count = sturm_count(chain, left, bound)
    intervals = isolate_roots(q, left, bound, chain) if count else []
    return RootCertificate(count, intervals, "sturm", _near_tangent(q, intervals))


def count_roots_in(p: Polynomial, lo, hi) -> int:
    """Distinct real roots in the open interval ``(lo, hi)``."""
    lo, hi = _q(lo), _q(hi)
    chain = sturm_chain(p)
    n = sturm_count(chain, lo, hi)
    return n - (1 if chain[0](hi) == 0 else 0)


def refine_root(p: Polynomial, interval, tol: float = 1e-15) -> float:
    """Bisect an isolating interval until it is narrower than ``tol``.

    The bracket is kept exact, so the returned midpoint is within ``tol``
    of the root up to the final float rounding.
    """
    lo, hi = (_q(v) for v in interval)
    if lo > hi:
        lo, hi = hi, lo
    sqf = squarefree_part(p)
    flo, fhi = sqf(lo), sqf(hi)
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    if (flo > 0) == (fhi > 0):
        # a simple root of the squarefree part always changes sign
        n = count_roots_in(p, lo, hi)
        raise PolynomialError(f"interval holds {n} roots and no sign change; not isolating")
    tol_q = Fraction(tol)
    while hi - lo > tol_q:
        # dyadic midpoints keep denominators small
        m = (lo + hi) / 2
        fm = sqf(m)
        if fm == 0:
            return float(m)
        if (fm > 0) == (flo > 0):
            lo, flo = m, fm
        else:
            hi = m
    return float((lo + hi) / 2)


# --- model polynomials ---------------------------------------------------

def key_polynomial(a) -> Polynomial:
    """``2y^7 - a y^6 - 4a^2 y^5 - (4a^3+2a) y^4 + 2a^2 y^3 + 4a^3 y^2 - a^3``."""
    a = _q(a)
    return Polynomial.from_desc([2, -a, -4 * a**2, -(4 * a**3 + 2 * a), 2 * a**2, 4 * a**3, 0, -a**3])


def gun_polynomial(a) -> Polynomial:
    """Expansion of ``2y^4 * (y^3 - 2a(y/2 - a/(2y^2) + a/2)^2 - a y^2 - a)``."""
    a = _q(a)
    return Polynomial.from_desc([2, -3 * a, -2 * a**2, -(a**3 + 2 * a), 2 * a**2, 2 * a**3, 0, -a**3])


def gun_polynomial_printed(a) -> Polynomial:
    """Variant whose y^4 coefficient is ``-(a^3 + 2)``; equals ``gun_polynomial`` only at a = 1."""
    a = _q(a)
    return Polynomial.from_desc([2, -3 * a, -2 * a**2, -(a**3 + 2), 2 * a**2, 2 * a**3, 0, -a**3])


def stick_polynomial(lam) -> Polynomial:
    """``lam (2z^2+2z+1)^2 - z (z+1)^4``: positive roots are the stick fixed points z1."""
    lam = _q(lam)
    q = Polynomial([1, 2, 2])
    return q * q * lam - Polynomial([0, 1]) * Polynomial([1, 1]) ** 4


def gun_tangency_polynomial(a) -> Polynomial:
    """``2x^6 (-a x^2 + 2x - 3a) - (x^6 + D^2) D`` with ``D = 2x^3 - a x^2 + x - a``.

    Its zeros with ``x > a`` are the solutions of ``x f'(x) = f(x)`` for the
    gun fixed-point map.
    """
    a = _q(a)
    x6 = Polynomial([0] * 6 + [1])
    d = Polynomial([-a, 1, -a, 2])
    quad = Polynomial([-3 * a, 2, -a])
    return x6 * quad * 2 - (x6 + d * d) * d
