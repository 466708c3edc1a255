"""Wave functions on the chart as exact sums of ansatz terms.

A state is a map from fermion index sets (sorted tuples; psi_I acting on the
empty state) to components.  Each component is a sum of terms

    coef(z) * w^a * wbar^b * (1 + z)^(e0 + k),

with a, b multi-indices, k an integer, e0 a base exponent shared by the whole
state, and coef a complex polynomial in z = (1 - t)/(1 + t).  Powers of
(1 + t) are absorbed through 1 + t = 2/(1 + z), so the chain rule

    d_j z = -(1/2) wbar_j (1 + z)^2

closes on this class and every derivative is applied exactly.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from numpy.polynomial import polynomial as npoly

from .orthopoly import gauss_jacobi

__all__ = [
    "SectorState",
    "scalar_state",
    "d_hol",
    "d_anti",
    "create",
    "annihilate",
    "norm_sq",
    "radial_density",
    "evaluate",
    "ray_profile",
    "growth_exponent",
]

_ONE_PLUS_Z = np.array([1.0, 1.0])


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        return np.zeros(1, dtype=complex)
    return c[: nz[-1] + 1]


@dataclass
class SectorState:
    d: int
    e0: float = 0.0
    comps: dict = field(default_factory=dict)

    @property
    def sectors(self):
        return sorted({len(I) for I in self.comps})

    def add_term(self, I, a, b, k, coef):
        I = tuple(I)
        key = (tuple(a), tuple(b), int(k))
        comp = self.comps.setdefault(I, {})
        if key in comp:
            comp[key] = _trim(npoly.polyadd(comp[key], coef))
        else:
            comp[key] = _trim(coef)

    def copy(self) -> "SectorState":
        out = SectorState(self.d, self.e0)
        for I, comp in self.comps.items():
            out.comps[I] = {key: c.copy() for key, c in comp.items()}
        return out

    def empty_like(self) -> "SectorState":
        return SectorState(self.d, self.e0)

    def __add__(self, other: "SectorState") -> "SectorState":
        if other.d != self.d or not math.isclose(other.e0, self.e0, abs_tol=0.0):
            raise ValueError("states with different dimension or base exponent cannot be added")
        out = self.copy()
        for I, comp in other.comps.items():
            for (a, b, k), c in comp.items():
                out.add_term(I, a, b, k, c)
        return out

    def scale(self, factor) -> "SectorState":
        out = self.empty_like()
        for I, comp in self.comps.items():
            for (a, b, k), c in comp.items():
                out.add_term(I, a, b, k, factor * c)
        return out

    def mul_monomial(self, a, b) -> "SectorState":
        out = self.empty_like()
        for I, comp in self.comps.items():
            for (a0, b0, k), c in comp.items():
                out.add_term(
                    I, [x + y for x, y in zip(a0, a)], [x + y for x, y in zip(b0, b)], k, c
                )
        return out

    def mul_one_plus_t(self, power: int = 1) -> "SectorState":
        """Multiply by (1 + t)^power = 2^power (1 + z)^(-power)."""
        out = self.empty_like()
        for I, comp in self.comps.items():
            for (a, b, k), c in comp.items():
                out.add_term(I, a, b, k - power, c * 2.0**power)
        return out

    def max_coefficient(self) -> float:
        vals = [np.max(np.abs(c)) for comp in self.comps.values() for c in comp.values()]
        return float(max(vals)) if vals else 0.0

    def simplified(self) -> "SectorState":
        """Merge terms whose (1 + z) powers differ by integers into the lowest power."""
        out = self.empty_like()
        for I, comp in self.comps.items():
            groups = defaultdict(dict)
            for (a, b, k), c in comp.items():
                groups[(a, b)][k] = c
            for (a, b), byk in groups.items():
                kmin = min(byk)
                acc = np.zeros(1, dtype=complex)
                for k, c in byk.items():
                    acc = npoly.polyadd(acc, npoly.polymul(c, npoly.polypow(_ONE_PLUS_Z, k - kmin)))
                acc = _trim(acc)
                if np.any(acc != 0):
                    out.add_term(I, a, b, kmin, acc)
        return out

    def is_zero(self, atol: float = 0.0) -> bool:
        return self.simplified().max_coefficient() <= atol


def scalar_state(d: int, e0: float, coef, a=None, b=None, I=()) -> SectorState:
    """Single term coef(z) w^a wbar^b (1 + z)^e0 psi_I."""
    st = SectorState(d, float(e0))
    a = a if a is not None else (0,) * d
    b = b if b is not None else (0,) * d
    st.add_term(I, a, b, 0, np.asarray(coef, dtype=complex))
    return st


def _unit(d: int, j: int):
    e = [0] * d
    e[j] = 1
    return e


def _radial_derivative(e: float, c: np.ndarray) -> np.ndarray:
    """e c + (1 + z) c'."""
    return npoly.polyadd(e * c, npoly.polymul(_ONE_PLUS_Z, npoly.polyder(c)))


def _derivative(st: SectorState, j: int, holomorphic: bool) -> SectorState:
    out = st.empty_like()
    d = st.d
    for I, comp in st.comps.items():
        for (a, b, k), c in comp.items():
            own = a if holomorphic else b
            if own[j]:
                na, nb = list(a), list(b)
                if holomorphic:
                    na[j] -= 1
                else:
                    nb[j] -= 1
                out.add_term(I, na, nb, k, own[j] * c)
            # d_j z = -(1/2) wbar_j (1+z)^2; dbar_j z = -(1/2) w_j (1+z)^2
            rc = -0.5 * _radial_derivative(st.e0 + k, c)
            if holomorphic:
                out.add_term(I, a, [x + y for x, y in zip(b, _unit(d, j))], k + 1, rc)
            else:
                out.add_term(I, [x + y for x, y in zip(a, _unit(d, j))], b, k + 1, rc)
    return out


def d_hol(st: SectorState, j: int) -> SectorState:
    return _derivative(st, j, True)


def d_anti(st: SectorState, j: int) -> SectorState:
    return _derivative(st, j, False)


def create(st: SectorState, j: int) -> SectorState:
    """psi_j acting from the left."""
    out = st.empty_like()
    for I, comp in st.comps.items():
        if j in I:
            continue
        sign = -1.0 if sum(1 for i in I if i < j) % 2 else 1.0
        J = tuple(sorted(I + (j,)))
        for (a, b, k), c in comp.items():
            out.add_term(J, a, b, k, sign * c)
    return out


def annihilate(st: SectorState, j: int) -> SectorState:
    """psibar_j = d/dpsi_j acting from the left."""
    out = st.empty_like()
    for I, comp in st.comps.items():
        if j not in I:
            continue
        pos = I.index(j)
        sign = -1.0 if pos % 2 else 1.0
        J = I[:pos] + I[pos + 1 :]
        for (a, b, k), c in comp.items():
            out.add_term(J, a, b, k, sign * c)
    return out


def _angular_factor(d: int, alpha) -> float:
    """Integral of |w^alpha|^2 g(t) d^{2d}w = pi^d alpha!/(d-1+|alpha|)! int t^{|alpha|+d-1} g dt."""
    num = 1
    for x in alpha:
        num *= factorial(x)
    return math.pi**d * num / factorial(d - 1 + sum(alpha))


def radial_density(st: SectorState):
    """Angular-integrated |psi|^2 with the measure, as a polynomial in z.

    Returns (j, beta, poly) such that the norm equals
    int_{-1}^{1} (1 - z)^j (1 + z)^(beta) poly(z) dz.  The measure is
    d^{2d}w / (1 + t)^{2d} and fermion components are paired with Kronecker
    delta.  Returns None for the zero state.
    """
    d = st.d
    pieces = []  # (j, K, factor * poly)
    for comp in st.comps.values():
        items = list(comp.items())
        for (a1, b1, k1), c1 in items:
            cc1 = np.conj(c1)
            for (a2, b2, k2), c2 in items:
                hol = tuple(x + y for x, y in zip(b1, a2))
                anti = tuple(x + y for x, y in zip(a1, b2))
                if hol != anti:
                    continue
                j = sum(hol) + d - 1
                pieces.append((j, k1 + k2, _angular_factor(d, hol) * npoly.polymul(cc1, c2)))
    if not pieces:
        return None
    # t^j (1+t)^{-2d} dt = 2^{1-2d} (1-z)^j (1+z)^{2d-2-j} dz
    jmin = min(p[0] for p in pieces)
    bmin = min(2 * d - 2 - j + K for j, K, _ in pieces)
    acc = np.zeros(1, dtype=complex)
    for j, K, poly in pieces:
        shift_b = 2 * d - 2 - j + K - bmin
        term = npoly.polymul(poly, npoly.polypow(np.array([1.0, -1.0]), j - jmin))
        term = npoly.polymul(term, npoly.polypow(_ONE_PLUS_Z, shift_b))
        acc = npoly.polyadd(acc, term)
    acc = _trim(acc.real * 2.0 ** (1 - 2 * d))
    return jmin, bmin + 2 * st.e0, acc.real


def _strip_one_plus_z(poly: np.ndarray, rtol: float = 1e-10):
    """Divide out factors (1 + z) that vanish at z = -1 up to rounding."""
    r = 0
    poly = np.asarray(poly, dtype=float)
    while poly.size > 1:
        scale = np.sum(np.abs(poly))
        if abs(npoly.polyval(-1.0, poly)) > rtol * scale:
            break
        q, _ = npoly.polydiv(poly, _ONE_PLUS_Z)
        poly = q
        r += 1
    return poly, r


def norm_sq(st: SectorState) -> float:
    """Exact L2 norm squared; inf when the integral diverges at the puncture."""
    dens = radial_density(st)
    if dens is None:
        return 0.0
    j, beta, poly = dens
    poly, r = _strip_one_plus_z(poly)
    beta = beta + r
    if np.all(poly == 0):
        return 0.0
    if beta <= -1.0:
        return math.inf
    order = (poly.size + 1) // 2 + 1
    rule = gauss_jacobi(order, j, beta)
    return rule.integrate(npoly.polyval(rule.nodes, poly))


def evaluate(st: SectorState, w) -> dict:
    """Component values at a chart point."""
    w = np.asarray(w, dtype=complex)
    t = float(np.vdot(w, w).real)
    z = (1.0 - t) / (1.0 + t)
    opz = 2.0 / (1.0 + t)
    wb = w.conj()
    out = {}
    for I, comp in st.comps.items():
        acc = 0.0 + 0.0j
        for (a, b, k), c in comp.items():
            mono = np.prod(w ** np.asarray(a)) * np.prod(wb ** np.asarray(b))
            acc += mono * opz ** (st.e0 + k) * npoly.polyval(z, c)
        out[I] = acc
    return out


def ray_profile(st: SectorState, direction, radii) -> np.ndarray:
    """Largest component magnitude along w = r * direction/|direction|."""
    u = np.asarray(direction, dtype=complex)
    u = u / np.linalg.norm(u)
    vals = []
    for r in radii:
        comp = evaluate(st, r * u)
        vals.append(max((abs(v) for v in comp.values()), default=0.0))
    return np.asarray(vals)


def growth_exponent(st: SectorState, direction, t_range=(1e6, 1e8), samples: int = 5) -> float:
    """Slope of log|psi| against log t along a ray; -inf for a vanishing state."""
    ts = np.geomspace(*t_range, samples)
    vals = ray_profile(st, direction, np.sqrt(ts))
    if np.all(vals == 0):
        return -math.inf
    floor = np.max(vals) * 1e-300
    return float(np.polyfit(np.log(ts), np.log(np.maximum(vals, floor)), 1)[0])
