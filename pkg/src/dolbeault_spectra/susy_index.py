"""Supercharges on ansatz states, zero modes and the Witten index by counting.

With twist G = (q/4) ln det h = -(q d/2) ln(1 + t) the supercharges are

    Q    = i (1+t) psi_j d_j + i (q-1)(d/2) psi_j wbar_j + i psi_j psi_k psibar_j wbar_k,
    Qbar = i psibar_j [(1+t) dbar_j - (q+1)(d/2) w_j] + i psibar_j psibar_k psi_j w_k,

and q = 1 is the pure Dolbeault complex.  The Q twist term is fixed by
requiring P(wbar)/(1+t)^{q-1} to be annihilated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np
import sympy as sp

from .config import DEFAULT_TOLERANCES
from .harmonic_tensors import build_structure
from .radial_spectra import (
    PLUS,
    ModeKey,
    QImageClass,
    classify,
    closed_form,
    radial_factor,
)
from .sphere_geometry import SphereSpec
from .states import (
    SectorState,
    annihilate,
    create,
    d_anti,
    d_hol,
    evaluate,
    norm_sq,
)

__all__ = [
    "ZeroModeBasis",
    "IndexReport",
    "apply_Q",
    "apply_Qbar",
    "mode_state",
    "pairing_ratio",
    "q_image_class",
    "zero_modes_pure",
    "zero_modes_twisted",
    "witten_index",
    "f1_log_solution_check",
    "LogSolutionReport",
    "lowest_admitted_modes",
    "annihilation_residual",
]


def _unit(d, j):
    e = [0] * d
    e[j] = 1
    return e


def apply_Q(state: SectorState, q: int = 1) -> SectorState:
    d = state.d
    out = state.empty_like()
    tw = (q - 1) * d / 2.0
    zero = [0] * d
    for j in range(d):
        out = out + create(d_hol(state, j).mul_one_plus_t(1), j)
        if tw:
            out = out + create(state.mul_monomial(zero, _unit(d, j)), j).scale(tw)
        lowered = annihilate(state, j)
        for k in range(d):
            out = out + create(create(lowered.mul_monomial(zero, _unit(d, k)), k), j)
    return out.scale(1j)


def apply_Qbar(state: SectorState, q: int = 1) -> SectorState:
    d = state.d
    out = state.empty_like()
    tw = (q + 1) * d / 2.0
    zero = [0] * d
    for j in range(d):
        inner = d_anti(state, j).mul_one_plus_t(1) + state.mul_monomial(_unit(d, j), zero).scale(-tw)
        out = out + annihilate(inner, j)
        for k in range(d):
            out = out + annihilate(annihilate(create(state.mul_monomial(_unit(d, k), zero), j), k), j)
    return out.scale(1j)


def _structure_component(key: ModeKey, component=None):
    ts = build_structure(SphereSpec(key.d), key.bidegree)
    if component is None:
        return ts.leading()
    return ts.component(*component)


def mode_state(key: ModeKey, component=None) -> SectorState:
    """Ansatz state S(w, wbar) F(z) in the fermion sector of the key."""
    e, coef = radial_factor(key)
    poly = _structure_component(key, component)
    d = key.d
    I = tuple(range(key.sector)) if key.sector else ()
    st = SectorState(d, float(e))
    for mono, c in poly.as_dict().items():
        st.add_term(I, mono[:d], mono[d:], 0, float(c) * np.asarray(coef, dtype=complex))
    return st


def _partner(state: SectorState, sector: int, d: int, q: int = 1) -> SectorState:
    """Image under the supercharge that does not annihilate the sector."""
    if sector == 0:
        return apply_Q(state, q)
    if sector == d:
        return apply_Qbar(state, q)
    raise ValueError("pairing is defined for the bottom and top sectors")


def pairing_ratio(key: ModeKey, component=None) -> float:
    """|Q psi|^2 / |psi|^2 (F = 0) or |Qbar psi|^2 / |psi|^2 (F = d)."""
    psi = mode_state(key, component)
    n0 = norm_sq(psi)
    if not math.isfinite(n0) or n0 == 0:
        raise ValueError(f"mode {key} does not have a finite nonzero norm")
    img = _partner(psi, key.sector, key.d)
    return norm_sq(img) / n0


def _directions(d: int, count: int = 4):
    rng = np.random.default_rng(20240611 + d)
    out = []
    for _ in range(count):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        out.append(v / np.linalg.norm(v))
    return out


def _asymptotics(state: SectorState, t_range=(1e6, 1e8)):
    """(slope, limits): growth exponent in t and leading values along rays."""
    ts = np.geomspace(*t_range, 5)
    slopes, limits = [], []
    for u in _directions(state.d):
        vals = []
        for t in ts:
            comp = evaluate(state, math.sqrt(t) * u)
            vals.append(comp)
        mags = np.array([max((abs(v) for v in c.values()), default=0.0) for c in vals])
        if np.all(mags == 0):
            slopes.append(-math.inf)
            limits.append(vals[-1])
            continue
        mags = np.maximum(mags, np.max(mags) * 1e-300)
        slopes.append(float(np.polyfit(np.log(ts), np.log(mags), 1)[0]))
        limits.append(vals[-1])
    return max(slopes), limits


def _limits_spread(limits) -> float:
    keys = sorted({I for lim in limits for I in lim})
    arr = np.array([[lim.get(I, 0.0) for I in keys] for lim in limits])
    if arr.size == 0:
        return 0.0
    scale = max(np.max(np.abs(arr)), 1e-300)
    return float(np.max(np.abs(arr - arr[0])) / scale)


def classify_asymptotics(state: SectorState, tol: float | None = None) -> QImageClass:
    tol = DEFAULT_TOLERANCES.exponent if tol is None else tol
    if state.is_zero():
        return QImageClass.REGULAR
    if not math.isfinite(norm_sq(state)):
        return QImageClass.NOT_L2
    slope, limits = _asymptotics(state)
    if slope > tol:
        return QImageClass.GROWING_BUT_L2
    if slope < -tol:
        return QImageClass.REGULAR
    return QImageClass.BOUNDED_SINGULAR if _limits_spread(limits) > 1e-6 else QImageClass.REGULAR


@lru_cache(maxsize=4096)
def q_image_class(key: ModeKey) -> QImageClass:
    """Asymptotic class of the supercharge image of a mode.

    The image is built exactly; its norm decides not_L2, and the growth
    exponent along rays at t in [1e6, 1e8] plus the spread of leading values
    across directions decide the rest.
    """
    psi = mode_state(key)
    return classify_asymptotics(_partner(psi, key.sector, key.d))


def annihilation_residual(state: SectorState, q: int = 1) -> float:
    """Largest coefficient surviving in Q psi and Qbar psi after merging terms."""
    r1 = apply_Q(state, q).simplified().max_coefficient()
    r2 = apply_Qbar(state, q).simplified().max_coefficient()
    return max(r1, r2)


@dataclass
class ZeroModeBasis:
    d: int
    q: int
    sector: int | None
    states: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.states)

    def verify(self, tol: float | None = None) -> dict:
        tol = DEFAULT_TOLERANCES.annihilation if tol is None else tol
        resid = [annihilation_residual(s, self.q) for s in self.states]
        norms = [norm_sq(s) for s in self.states]
        return {
            "count": self.count,
            "max_residual": max(resid, default=0.0),
            "annihilated": all(r <= tol for r in resid),
            "normalizable": all(math.isfinite(n) and n > 0 for n in norms),
            "norms": norms,
        }


def _antiholomorphic_monomials(d: int, max_degree: int):
    out = []
    for deg in range(max_degree + 1):
        for K in combinations_with_replacement(range(d), deg):
            b = [0] * d
            for k in K:
                b[k] += 1
            out.append(tuple(b))
    return out


def zero_modes_pure(d: int) -> ZeroModeBasis:
    """Antiholomorphic monomials of degree <= d - 1 in the F = 0 sector."""
    if d < 1:
        raise ValueError("d must be >= 1")
    basis = ZeroModeBasis(d=d, q=1, sector=0)
    for b in _antiholomorphic_monomials(d, d - 1):
        st = SectorState(d, 0.0)
        st.add_term((), (0,) * d, b, 0, np.array([1.0 + 0j]))
        basis.states.append(st)
        basis.labels.append({"wbar_powers": list(b)})
    return basis


def zero_modes_twisted(q: int) -> ZeroModeBasis:
    """Zero modes of the twisted S^4 complex.

    q >= 1: wbar^b / (1+t)^{q-1}, |b| <= 2q - 1, in F = 0.
    q <= -1: psi_1 psi_2 w^a / (1+t)^{|q|-1}, |a| <= 2|q| - 1, in F = 2.
    q = 0: none.
    """
    d = 2
    if q == 0:
        return ZeroModeBasis(d=d, q=0, sector=None)
    aq = abs(q)
    sector = 0 if q > 0 else 2
    basis = ZeroModeBasis(d=d, q=q, sector=sector)
    I = () if q > 0 else (0, 1)
    # (1+t)^{-(|q|-1)} = 2^{-(|q|-1)} (1+z)^{|q|-1}
    coef = np.array([2.0 ** -(aq - 1) + 0j])
    for mono in _antiholomorphic_monomials(d, 2 * aq - 1):
        st = SectorState(d, float(aq - 1))
        if q > 0:
            st.add_term(I, (0,) * d, mono, 0, coef)
            basis.labels.append({"wbar_powers": list(mono)})
        else:
            st.add_term(I, mono, (0,) * d, 0, coef)
            basis.labels.append({"w_powers": list(mono)})
        basis.states.append(st)
    return basis


@dataclass(frozen=True)
class IndexReport:
    d: int
    q: int
    index_by_counting: int
    index_by_geometry: Fraction | None
    discrepancy: Fraction | None
    zero_modes_by_sector: dict
    formula: int | None = None
    geometry_numeric: float | None = None

    def as_dict(self) -> dict:
        def frac(x):
            if x is None:
                return None
            return int(x) if x.denominator == 1 else float(x)

        return {
            "d": self.d,
            "twist": self.q,
            "counting": self.index_by_counting,
            "geometry": frac(self.index_by_geometry),
            "geometry_exact": None if self.index_by_geometry is None else str(self.index_by_geometry),
            "discrepancy": frac(self.discrepancy),
            "zero_modes_by_sector": {str(k): v for k, v in sorted(self.zero_modes_by_sector.items())},
            "formula": self.formula,
        }


def witten_index(d: int, q: int = 1, verify: bool = True) -> IndexReport:
    """Index by counting zero modes, next to the tree-level Chern integral."""
    from . import index_quadrature as iq

    if d == 2:
        basis = zero_modes_twisted(q) if q != 1 else zero_modes_pure(2)
        formula = 2 * q * q + abs(q)
    else:
        if q != 1:
            raise ValueError("only the pure complex (q = 1) is available for d != 2")
        basis = zero_modes_pure(d)
        formula = math.comb(2 * d - 1, d - 1)
    if verify and basis.count:
        chk = basis.verify()
        if not (chk["annihilated"] and chk["normalizable"]):
            raise RuntimeError(f"zero-mode basis failed verification: {chk}")
    by_sector = {}
    if basis.sector is not None:
        by_sector[basis.sector] = basis.count
    counting = sum(((-1) ** F) * n for F, n in by_sector.items())

    geometry = numeric = None
    if d == 2:
        numeric = iq.chern2(q)
        geometry = Fraction(2 * q * q)
    elif d == 3:
        numeric = iq.chern3(q)
        geometry = Fraction(9, 2) * q**3
    if geometry is not None and abs(numeric - float(geometry)) > 1e-5 * max(1.0, abs(float(geometry))):
        # report the quadrature value itself when it disagrees with the closed form
        geometry = Fraction(numeric).limit_denominator(10**6)
    discrepancy = None if geometry is None else Fraction(counting) - geometry
    return IndexReport(
        d=d,
        q=q,
        index_by_counting=counting,
        index_by_geometry=geometry,
        discrepancy=discrepancy,
        zero_modes_by_sector=by_sector,
        formula=formula,
        geometry_numeric=numeric,
    )


def lowest_admitted_modes(d: int, count: int, sector: int = 0, positive: bool = True):
    """The `count` lowest admitted plus-branch modes, ordered by eigenvalue.

    Labels are scanned in a box that is enlarged until the largest selected
    eigenvalue lies below every eigenvalue on the box boundary.
    """
    size = 3
    while True:
        cands = []
        boundary_min = math.inf
        if d == 2:
            labels = [(m, s) for m in range(-size, size + 1) for s in range(size + 1)]
            on_edge = lambda lab: abs(lab[0]) == size or lab[1] == size
        else:
            labels = [(p, q) for p in range(size + 1) for q in range(size + 1)]
            on_edge = lambda lab: max(lab) == size
        for lab in labels:
            for n in range(size + 1):
                key = ModeKey(d, sector, lab, n, PLUS)
                lam = closed_form(key).lam
                if on_edge(lab) or n == size:
                    boundary_min = min(boundary_min, lam)
                    continue
                if positive and lam <= 1e-12:
                    continue
                if not classify(key).admitted:
                    continue
                cands.append((lam, lab, n, key))
        cands.sort(key=lambda c: (c[0], c[1], c[2]))
        chosen = cands[:count]
        if len(chosen) == count and chosen[-1][0] < boundary_min:
            return [c[3] for c in chosen]
        size += 1


@dataclass(frozen=True)
class LogSolutionReport:
    symbolic_zero: bool
    residuals: dict
    cutoff_norms: list
    c_matches: bool


def f1_log_solution_check(sample_t=(1.0, 10.0), cutoffs=(10.0, 100.0, 1000.0)) -> LogSolutionReport:
    """Phi = t + 2 ln t - 1/t solves H^{F=0} Phi = 0, but C_k = (1+t) d_k Phi is not L2.

    H^{F=0} = -(1+t)^2 d_j dbar_j + 2(1+t) w_j d_j on S^4.  The residual is
    evaluated exactly with w, wbar treated as independent symbols.  The
    norm of psi_k C_k over the annulus 1/L <= t <= L is integrated in t after
    exact angular integration of sum_k |C_k|^2 = t (1+t)^6 / t^4.
    """
    w1, w2, v1, v2 = sp.symbols("w1 w2 wb1 wb2")
    w, wb = (w1, w2), (v1, v2)
    t = w1 * v1 + w2 * v2
    phi = t + 2 * sp.log(t) - 1 / t
    H = -((1 + t) ** 2) * sum(sp.diff(phi, w[j], wb[j]) for j in range(2)) + 2 * (1 + t) * sum(
        w[j] * sp.diff(phi, w[j]) for j in range(2)
    )
    symbolic_zero = sp.simplify(H) == 0
    Hf = sp.lambdify((w1, w2, v1, v2), H, "numpy")
    residuals = {}
    for tv in sample_t:
        r = math.sqrt(tv / 2.0)
        pt = (r, r * 1j)
        val = complex(Hf(pt[0], pt[1], np.conj(pt[0]), np.conj(pt[1])))
        scale = abs((1 + tv) ** 2) * (1 + 2 / tv**2) + 1.0
        residuals[tv] = abs(val) / scale
    C_expected = [wb[k] * (1 + t) ** 3 / t**2 for k in range(2)]
    c_matches = all(sp.simplify((1 + t) * sp.diff(phi, w[k]) - C_expected[k]) == 0 for k in range(2))

    from scipy.integrate import quad

    # int d^4w (1+t)^{-4} sum_k |C_k|^2 = pi^2 int t * t (1+t)^6 t^{-4} (1+t)^{-4} dt
    dens = lambda s: math.exp(s) * math.pi**2 * (1.0 + math.exp(s)) ** 2 / math.exp(2 * s)
    norms = []
    for L in cutoffs:
        val, _ = quad(dens, -math.log(L), math.log(L), limit=200, epsabs=0, epsrel=1e-12)
        norms.append((L, val))
    return LogSolutionReport(symbolic_zero, residuals, norms, c_matches)
