"""Stereographic chart of S^{2d} minus the north pole.

Complex coordinates w_j, t = |w|^2, z = (1 - t)/(1 + t) = cos(theta).
Real coordinates follow w_j = (x_{2j-1} + i x_{2j}) / sqrt(2), so x^2 = 2t and
the real metric is g_MN = delta_MN / (1 + x^2/2)^2.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "SphereSpec",
    "ChartPoint",
    "TwistModel",
    "QuadratureNonconvergence",
    "z_of_t",
    "t_of_z",
    "complex_frame",
    "metric_at",
    "measure_weight",
    "torsion_at",
    "real_torsion",
    "torsion_contraction",
    "torsion_vector_B",
    "torsion_vector_B_from_torsion",
    "levi_civita",
    "gauge_field",
    "field_strength",
    "gauge_field_real",
    "field_strength_real",
    "exterior_derivative_residual",
    "gauge_action_density",
    "gauge_action_scan",
    "loglog_slope",
]


class QuadratureNonconvergence(RuntimeError):
    """Raised when refining a quadrature grid moves the result beyond tolerance."""


@dataclass(frozen=True)
class SphereSpec:
    d: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"complex dimension must be a positive integer, got {self.d}")

    @property
    def real_dim(self) -> int:
        return 2 * self.d


@dataclass(frozen=True)
class ChartPoint:
    w: np.ndarray = field(repr=True)

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=complex).reshape(-1))

    @classmethod
    def from_real(cls, x) -> "ChartPoint":
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size % 2:
            raise ValueError("real coordinates come in pairs")
        return cls((x[0::2] + 1j * x[1::2]) / math.sqrt(2.0))

    @property
    def d(self) -> int:
        return self.w.size

    @property
    def t(self) -> float:
        return float(np.vdot(self.w, self.w).real)

    @property
    def z(self) -> float:
        return z_of_t(self.t)

    @property
    def x(self) -> np.ndarray:
        out = np.empty(2 * self.d)
        out[0::2] = math.sqrt(2.0) * self.w.real
        out[1::2] = math.sqrt(2.0) * self.w.imag
        return out


def z_of_t(t):
    return (1.0 - np.asarray(t, dtype=float)) / (1.0 + np.asarray(t, dtype=float))


def t_of_z(z):
    return (1.0 - np.asarray(z, dtype=float)) / (1.0 + np.asarray(z, dtype=float))


def complex_frame(d: int) -> np.ndarray:
    """e[j, M] = dw_j / dx^M."""
    e = np.zeros((d, 2 * d), dtype=complex)
    for j in range(d):
        e[j, 2 * j] = 1.0 / math.sqrt(2.0)
        e[j, 2 * j + 1] = 1j / math.sqrt(2.0)
    return e


def _check(spec: SphereSpec, p: ChartPoint):
    if spec.d != p.d:
        raise ValueError(f"point has {p.d} complex coordinates, sphere has d={spec.d}")


def metric_at(spec: SphereSpec, p: ChartPoint) -> np.ndarray:
    """h_{j kbar} = 2 delta_jk / (1 + t)^2."""
    _check(spec, p)
    return 2.0 * np.eye(spec.d, dtype=complex) / (1.0 + p.t) ** 2


def measure_weight(spec: SphereSpec, p: ChartPoint) -> float:
    _check(spec, p)
    return 2.0**spec.d / (1.0 + p.t) ** (2 * spec.d)


def torsion_at(spec: SphereSpec, p: ChartPoint) -> np.ndarray:
    """C[j, k, l] = C_{j k lbar} = d_k h_{j lbar} - d_j h_{k lbar}.

    With h = 2 delta / (1+t)^2 and d_k t = wbar_k this is
    -4 (delta_jl wbar_k - delta_kl wbar_j) / (1+t)^3.
    """
    _check(spec, p)
    d = spec.d
    wb = p.w.conj()
    eye = np.eye(d)
    C = np.einsum("jl,k->jkl", eye, wb) - np.einsum("kl,j->jkl", eye, wb)
    return -4.0 * C / (1.0 + p.t) ** 3


def real_torsion(x) -> np.ndarray:
    """Real components C_MNP of the torsion three-form.

    C_{jk lbar} and its conjugate are pushed to real coordinates and summed over
    the three slot placements of the barred index, giving a totally
    antisymmetric tensor.
    """
    p = ChartPoint.from_real(x)
    spec = SphereSpec(p.d)
    e = complex_frame(p.d)
    Cc = torsion_at(spec, p)
    X = np.einsum("jkl,jM,kN,lP->MNP", Cc, e, e, e.conj())
    X = X + X.conj()
    C = X + np.transpose(X, (1, 2, 0)) + np.transpose(X, (2, 0, 1))
    return C.real


def torsion_contraction(x) -> float:
    """g^{MN} g^{PQ} g^{ST} C_{MPS} C_{NQT}."""
    x = np.asarray(x, dtype=float)
    ginv = (1.0 + 0.5 * x @ x) ** 2
    C = real_torsion(x)
    return float(ginv**3 * np.sum(C * C))


def levi_civita(n: int) -> np.ndarray:
    eps = np.zeros((n,) * n)
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        eps[perm] = -1.0 if inv % 2 else 1.0
    return eps


def torsion_vector_B(x) -> np.ndarray:
    """Axial vector dual to the torsion on S^4: B^M = 2 x^M (1 + x^2/2)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (4,):
        raise ValueError("axial torsion vector is defined on the four-dimensional chart")
    return 2.0 * x * (1.0 + 0.5 * x @ x)


def torsion_vector_B_from_torsion(x) -> np.ndarray:
    """B^M = eps^{MNPQ} C_NPQ / (12 sqrt g) from the three-form components.

    The 1/12 (rather than 1/6) reflects that C_NPQ here are full three-form
    components, twice the single-placement torsion.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (4,):
        raise ValueError("axial torsion vector is defined on the four-dimensional chart")
    sqrt_g = (1.0 + 0.5 * x @ x) ** -4
    return np.einsum("mnpq,npq->m", levi_civita(4), real_torsion(x)) / (12.0 * sqrt_g)


@dataclass(frozen=True)
class TwistModel:
    """Potential G = (q/4) ln det h = -(q d / 2) ln(1 + t) up to a constant.

    For d = 2 this is G = -q ln(1+t); q = 1 is the pure Dolbeault complex.
    """

    q: int
    d: int = 2

    @property
    def kappa(self) -> float:
        return 0.5 * self.q * self.d

    def potential(self, t):
        return -self.kappa * np.log1p(np.asarray(t, dtype=float))


def gauge_field(model: TwistModel, p: ChartPoint):
    """(A_j, A_kbar) = (-i d_j G, i dbar_k G)."""
    if model.d != p.d:
        raise ValueError("model and point dimensions differ")
    dG = -model.kappa * p.w.conj() / (1.0 + p.t)  # d_j G
    dbG = -model.kappa * p.w / (1.0 + p.t)  # dbar_k G
    return -1j * dG, 1j * dbG


def field_strength(model: TwistModel, p: ChartPoint) -> np.ndarray:
    """F_{j kbar} = 2i d_j dbar_k G; holomorphic-holomorphic parts vanish."""
    if model.d != p.d:
        raise ValueError("model and point dimensions differ")
    t = p.t
    ddG = -model.kappa * (np.eye(p.d) / (1.0 + t) - np.outer(p.w.conj(), p.w) / (1.0 + t) ** 2)
    return 2j * ddG


def gauge_field_real(model: TwistModel, x) -> np.ndarray:
    p = ChartPoint.from_real(x)
    e = complex_frame(p.d)
    Ah, Aa = gauge_field(model, p)
    A = Ah @ e + Aa @ e.conj()
    return A.real


def field_strength_real(model: TwistModel, x) -> np.ndarray:
    """F_MN from F = F_{j kbar} dw_j ^ dwbar_k."""
    p = ChartPoint.from_real(x)
    e = complex_frame(p.d)
    F = field_strength(model, p)
    T = np.einsum("jk,jM,kN->MN", F, e, e.conj())
    return (T - T.T).real


def exterior_derivative_residual(model: TwistModel, x, h: float = 1e-4) -> float:
    """max |d_M F_NP + d_N F_PM + d_P F_MN| by a fourth-order central stencil."""
    x = np.asarray(x, dtype=float)
    n = x.size
    dF = np.empty((n, n, n))
    for M in range(n):
        step = np.zeros(n)
        step[M] = h
        f = lambda s: field_strength_real(model, x + s * step)
        dF[M] = (8 * (f(1) - f(-1)) - (f(2) - f(-2))) / (12 * h)
    cyc = dF + np.transpose(dF, (1, 2, 0)) + np.transpose(dF, (2, 0, 1))
    return float(np.max(np.abs(cyc)))


def gauge_action_density(model: TwistModel, x) -> float:
    """sqrt(g) F_MN F^MN at a real chart point."""
    x = np.asarray(x, dtype=float)
    f = 1.0 + 0.5 * x @ x
    n = x.size
    sqrt_g = f ** (-n)
    F = field_strength_real(model, x)
    return float(sqrt_g * f**4 * np.sum(F * F))


def _radial_action(model: TwistModel, cutoff: float, nodes: int) -> float:
    # the density is U(d)-invariant, so it is sampled on the x^1 axis
    n = 2 * model.d
    area = 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)
    xg, wg = leggauss(nodes)
    edges = [0.0, min(1.0, cutoff)]
    while edges[-1] < cutoff:
        edges.append(min(2.0 * edges[-1], cutoff))
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        r = 0.5 * (b - a) * xg + 0.5 * (b + a)
        vals = [
            rr ** (n - 1) * gauge_action_density(model, np.r_[rr, np.zeros(n - 1)]) for rr in r
        ]
        total += 0.5 * (b - a) * float(np.dot(wg, vals))
    return area * total


def gauge_action_scan(model: TwistModel, cutoffs, nodes: int = 16, rtol: float = 1e-9):
    """Action integral over |x| <= cutoff for each cutoff.

    Each value is recomputed with doubled nodes per panel; a relative change
    above rtol raises QuadratureNonconvergence.
    """
    if model.d != 2:
        raise ValueError("gauge action scan is defined for d = 2")
    cutoffs = [float(c) for c in cutoffs]
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError("cutoffs must be increasing")
    out = []
    for lam in cutoffs:
        coarse = _radial_action(model, lam, nodes)
        fine = _radial_action(model, lam, 2 * nodes)
        if abs(fine - coarse) > rtol * max(abs(fine), 1e-300):
            raise QuadratureNonconvergence(
                f"action at cutoff {lam} moved from {coarse} to {fine} under refinement"
            )
        out.append((lam, fine))
    return out


def loglog_slope(radii, values) -> float:
    """Least-squares slope of log|values| against log(radii)."""
    lr = np.log(np.asarray(radii, dtype=float))
    lv = np.log(np.abs(np.asarray(values, dtype=float)))
    return float(np.polyfit(lr, lv, 1)[0])
