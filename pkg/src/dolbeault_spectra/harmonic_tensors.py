"""Harmonic tensor structures in w, wbar annihilated by d_j dbar_j.

A structure of bidegree (p, qb) is the harmonic projection of the monomials
w_{i1}..w_{ip} wbar_{k1}..wbar_{kqb}.  With t = wbar w and D = d_j dbar_j the
projection is

    H = sum_r c_r t^r D^r P,   c_0 = 1,   c_{r+1} = -c_r / ((r+1)(N+d-2-r)),

N = p + qb.  The leading monomial keeps coefficient 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb, factorial

import numpy as np
import sympy as sp
from sympy.polys.domains import QQ, ZZ
from sympy.polys.matrices import DomainMatrix

from .sphere_geometry import SphereSpec

__all__ = [
    "InvalidLabels",
    "Labels",
    "TensorStructure",
    "labels_from_ms",
    "degeneracy",
    "degeneracy_formula",
    "build_structure",
    "harmonicity_residual",
    "harmonicity_residual_float",
    "brute_force_dimension",
    "naive_laplacian",
    "angular_inner_product",
    "generators",
]


class InvalidLabels(ValueError):
    pass


@dataclass(frozen=True)
class Labels:
    """Holomorphic degree p and antiholomorphic degree qb."""

    p: int
    qb: int

    def __post_init__(self):
        for v in (self.p, self.qb):
            if int(v) != v or v < 0:
                raise InvalidLabels(f"degrees must be nonnegative integers, got ({self.p}, {self.qb})")

    @property
    def m(self) -> int:
        return self.p - self.qb

    @property
    def s(self) -> int:
        return min(self.p, self.qb)

    @property
    def total(self) -> int:
        return self.p + self.qb


def labels_from_ms(m: int, s: int) -> Labels:
    if int(m) != m or int(s) != s or s < 0:
        raise InvalidLabels(f"invalid (m, s) = ({m}, {s})")
    if m >= 0:
        return Labels(m + s, s)
    return Labels(s, s - m)


def _as_labels(spec: SphereSpec, labels) -> Labels:
    if isinstance(labels, Labels):
        return labels
    if isinstance(labels, dict):
        if "m" in labels:
            return labels_from_ms(labels["m"], labels.get("s", 0))
        return Labels(labels["p"], labels["q"])
    try:
        a, b = labels
    except (TypeError, ValueError):
        raise InvalidLabels(f"cannot interpret labels {labels!r}") from None
    if spec.d == 2:
        return labels_from_ms(a, b)
    return Labels(a, b)


@lru_cache(maxsize=None)
def generators(d: int):
    w = sp.symbols(f"w1:{d + 1}")
    wb = sp.symbols(f"wb1:{d + 1}")
    return w, wb


def degeneracy_formula(d: int, p: int, qb: int) -> int:
    """Dimension of bidegree-(p, qb) harmonic polynomials in d variables."""
    full = comb(p + d - 1, p) * comb(qb + d - 1, qb)
    if p == 0 or qb == 0:
        return full
    return full - comb(p + d - 2, p - 1) * comb(qb + d - 2, qb - 1)


def degeneracy(spec: SphereSpec, labels) -> int:
    """2s + |m| + 1 for d = 2, (p+1)(q+1)(p+q+2)/2 for d = 3, general d otherwise."""
    lab = _as_labels(spec, labels)
    if spec.d == 2:
        return 2 * lab.s + abs(lab.m) + 1
    if spec.d == 3:
        return (lab.p + 1) * (lab.qb + 1) * (lab.p + lab.qb + 2) // 2
    return degeneracy_formula(spec.d, lab.p, lab.qb)


def naive_laplacian(poly: sp.Poly, d: int) -> sp.Poly:
    w, wb = generators(d)
    out = sp.Poly(0, *w, *wb, domain=QQ)
    for j in range(d):
        out = out + poly.diff(w[j]).diff(wb[j])
    return out


def _monomial(d: int, I, K) -> sp.Poly:
    w, wb = generators(d)
    expr = sp.Integer(1)
    for i in I:
        expr *= w[i]
    for k in K:
        expr *= wb[k]
    return sp.Poly(expr, *w, *wb, domain=QQ)


def _project(P: sp.Poly, d: int, N: int) -> sp.Poly:
    w, wb = generators(d)
    t = sp.Poly(sum(w[j] * wb[j] for j in range(d)), *w, *wb, domain=QQ)
    out = P
    c = Fraction(1)
    term = P
    tr = sp.Poly(1, *w, *wb, domain=QQ)
    r = 0
    while True:
        term = naive_laplacian(term, d)
        if term.is_zero:
            break
        c = -c / ((r + 1) * (N + d - 2 - r))
        tr = tr * t
        out = out + term * tr * QQ(c.numerator, c.denominator)
        r += 1
    return out


@dataclass
class TensorStructure:
    """Harmonic structure of bidegree (p, qb); components keyed by index multisets."""

    d: int
    p: int
    qb: int
    _table: dict = field(default_factory=dict, repr=False)

    @property
    def m(self) -> int:
        return self.p - self.qb

    @property
    def s(self) -> int:
        return min(self.p, self.qb)

    @property
    def labels(self) -> Labels:
        return Labels(self.p, self.qb)

    def index_sets(self):
        I_all = list(combinations_with_replacement(range(self.d), self.p))
        K_all = list(combinations_with_replacement(range(self.d), self.qb))
        return [(I, K) for I in I_all for K in K_all]

    def component(self, I, K) -> sp.Poly:
        key = (tuple(sorted(I)), tuple(sorted(K)))
        if len(key[0]) != self.p or len(key[1]) != self.qb:
            raise InvalidLabels(f"component {key} does not match bidegree ({self.p}, {self.qb})")
        if key not in self._table:
            self._table[key] = _project(_monomial(self.d, *key), self.d, self.p + self.qb)
        return self._table[key]

    @property
    def components(self) -> dict:
        return {key: self.component(*key) for key in self.index_sets()}

    def leading(self) -> sp.Poly:
        """Component with all indices on the first coordinate for w and the last for wbar."""
        return self.component((0,) * self.p, (self.d - 1,) * self.qb)

    def rank(self) -> int:
        """Number of linearly independent components."""
        comps = list(self.components.values())
        monos = sorted({mono for c in comps for mono in c.as_dict()})
        index = {mono: i for i, mono in enumerate(monos)}
        rows = []
        for c in comps:
            row = [QQ(0)] * len(monos)
            for mono, coef in c.as_dict().items():
                row[index[mono]] = QQ.from_sympy(coef)
            rows.append(row)
        return DomainMatrix(rows, (len(rows), len(monos)), QQ).rank()

    def to_expr(self, I, K):
        return self.component(I, K).as_expr()


def build_structure(spec: SphereSpec, labels) -> TensorStructure:
    lab = _as_labels(spec, labels)
    return TensorStructure(spec.d, lab.p, lab.qb)


def harmonicity_residual(ts: TensorStructure, sample_points=None) -> float:
    """max |D S| over components.

    Computed exactly: the Laplacian of each component is reduced as a rational
    polynomial, so the result is 0.0 unless a coefficient survives.  When
    sample points are given the surviving polynomial is also evaluated there.
    """
    worst = 0.0
    w, wb = generators(ts.d)
    for poly in ts.components.values():
        lap = naive_laplacian(poly, ts.d)
        if lap.is_zero:
            continue
        if sample_points is None:
            worst = max(worst, max(abs(float(c)) for c in lap.coeffs()))
            continue
        f = sp.lambdify((*w, *wb), lap.as_expr(), "numpy")
        for pt in sample_points:
            pt = np.asarray(pt, dtype=complex)
            worst = max(worst, abs(f(*pt, *pt.conj())))
    return float(worst)


def harmonicity_residual_float(ts: TensorStructure, sample_points, h: float = 1e-3) -> float:
    """Floating-point check of D S by central differences in Re w, Im w.

    d_j dbar_j = (1/4)(d^2/dx_j^2 + d^2/dy_j^2) with w_j = x_j + i y_j; for
    polynomials of degree <= 3 per variable pair the stencil is exact up to
    rounding, higher degrees leave an O(h^2) truncation.
    """
    w, wb = generators(ts.d)
    worst = 0.0
    for poly in ts.components.values():
        f = sp.lambdify((*w, *wb), poly.as_expr(), "numpy")
        g = lambda z: f(*z, *np.conj(z))
        for pt in sample_points:
            pt = np.asarray(pt, dtype=complex)
            acc = 0.0
            for j in range(ts.d):
                for step in (h, 1j * h):
                    e = np.zeros(ts.d, dtype=complex)
                    e[j] = step
                    acc += (g(pt + e) - 2 * g(pt) + g(pt - e)) / h**2
            worst = max(worst, abs(acc / 4.0))
    return float(worst)


def _bidegree_monomials(d: int, p: int, qb: int):
    I_all = list(combinations_with_replacement(range(d), p))
    K_all = list(combinations_with_replacement(range(d), qb))
    out = []
    for I in I_all:
        a = [0] * d
        for i in I:
            a[i] += 1
        for K in K_all:
            b = [0] * d
            for k in K:
                b[k] += 1
            out.append(tuple(a) + tuple(b))
    return out


def brute_force_dimension(spec: SphereSpec, labels) -> int:
    """Null-space dimension of D on bidegree-(p, qb) polynomials.

    The Laplacian is assembled as an integer matrix from the monomial basis of
    bidegree (p, qb) to that of (p-1, qb-1).
    """
    lab = _as_labels(spec, labels)
    d, p, qb = spec.d, lab.p, lab.qb
    src = _bidegree_monomials(d, p, qb)
    if p == 0 or qb == 0:
        return len(src)
    dst = _bidegree_monomials(d, p - 1, qb - 1)
    index = {mono: i for i, mono in enumerate(dst)}
    rows = [[ZZ(0)] * len(src) for _ in dst]
    for col, mono in enumerate(src):
        for j in range(d):
            a, b = mono[j], mono[d + j]
            if a and b:
                tgt = list(mono)
                tgt[j] -= 1
                tgt[d + j] -= 1
                rows[index[tuple(tgt)]][col] += ZZ(a * b)
    rank = DomainMatrix(rows, (len(dst), len(src)), ZZ).rank()
    return len(src) - rank


def _sphere_moment(d: int, alpha) -> Fraction:
    """Integral of |w^alpha|^2 over the unit sphere |w| = 1, divided by pi^d.

    From the Gaussian moment int |w^a|^2 exp(-t) d^{2d}w = pi^d a! and the
    radial factor int r^{2|a|+2d-1} exp(-r^2) dr = (|a|+d-1)!/2.
    """
    num = 1
    for a in alpha:
        num *= factorial(a)
    return Fraction(2 * num, factorial(d - 1 + sum(alpha)))


def angular_inner_product(P1: sp.Poly, P2: sp.Poly, d: int) -> Fraction:
    """<P1, P2> over the unit sphere S^{2d-1}, in units of pi^d.

    conj(P1) P2 is integrated monomial by monomial; only terms with equal
    holomorphic and antiholomorphic multi-indices survive.
    """
    acc = Fraction(0)
    t1 = P1.as_dict()
    t2 = P2.as_dict()
    for m1, c1 in t1.items():
        a1, b1 = m1[:d], m1[d:]
        for m2, c2 in t2.items():
            a2, b2 = m2[:d], m2[d:]
            # conj(w^a1 wbar^b1) = wbar^a1 w^b1
            hol = tuple(x + y for x, y in zip(b1, a2))
            anti = tuple(x + y for x, y in zip(a1, b2))
            if hol != anti:
                continue
            c = Fraction(int(sp.numer(c1)), int(sp.denom(c1))) * Fraction(
                int(sp.numer(c2)), int(sp.denom(c2))
            )
            acc += c * _sphere_moment(d, hol)
    return acc
