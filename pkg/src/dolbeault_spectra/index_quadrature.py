"""Geometric side of the index: Chern integrals and vanishing checks on S^4.

Real chart coordinates x^M, metric g = delta / f^2 with f = 1 + x^2/2,
conformal factor phi = -ln f.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .orthopoly import gauss_jacobi
from .sphere_geometry import (
    QuadratureNonconvergence,
    TwistModel,
    field_strength_real,
    levi_civita,
    t_of_z,
    torsion_vector_B,
    torsion_vector_B_from_torsion,
)

__all__ = [
    "QuadratureGrid",
    "chern_integral",
    "chern2",
    "chern3",
    "pfaffian",
    "b_field_strength",
    "b_field_strength_max",
    "b_field_fd_check",
    "christoffel",
    "riemann",
    "scalar_curvature",
    "signature_density",
    "k_term_fluxes",
    "k_term_cancellation",
    "KFluxRow",
]


@dataclass(frozen=True)
class QuadratureGrid:
    radial_order: int = 16
    angular_order: int = 8
    rtol: float = 1e-12


def pfaffian(A: np.ndarray) -> float:
    """Pfaffian of an even antisymmetric matrix by expansion along the first row."""
    n = A.shape[0]
    if n == 0:
        return 1.0
    if n % 2:
        return 0.0
    total = 0.0
    for j in range(1, n):
        if A[0, j] == 0:
            continue
        keep = [k for k in range(1, n) if k != j]
        sign = -1.0 if (j - 1) % 2 else 1.0
        total += sign * A[0, j] * pfaffian(A[np.ix_(keep, keep)])
    return total


def _top_density(model: TwistModel, x) -> float:
    """c_d density: Pf(-F) so that (1/(d!(2pi)^d)) F^d integrates Pf(-F)/(2pi)^d."""
    return pfaffian(-field_strength_real(model, x))


def _chern_radial(model: TwistModel, order: int) -> float:
    d = model.d
    n = 2 * d
    area = 2.0 * math.pi**d / math.factorial(d - 1)
    # d^{2d}x = area r^{2d-1} dr = area (2t)^{d-1} dt, dt = 2 dz/(1+z)^2,
    # t^{d-1} = (1-z)^{d-1}/(1+z)^{d-1}; the (1-z)^{d-1} goes into the weight
    rule = gauss_jacobi(order, d - 1, 0.0)
    vals = []
    for z in rule.nodes:
        t = float(t_of_z(z))
        x = np.zeros(n)
        x[0] = math.sqrt(2.0 * t)
        rho = _top_density(model, x)
        vals.append(rho * 2.0 ** (d - 1) * 2.0 / (1.0 + z) ** (d + 1))
    return area * rule.integrate(np.asarray(vals)) / (2.0 * math.pi) ** d


def chern_integral(model: TwistModel, grid: QuadratureGrid | None = None) -> float:
    """(1/(d! (2 pi)^d)) int F^d with c_1 = -F/(2 pi); checked under order doubling.

    The field strength is U(d)-invariant, so its top form is sampled on the
    x^1 axis and integrated radially.
    """
    grid = grid or QuadratureGrid()
    coarse = _chern_radial(model, grid.radial_order)
    fine = _chern_radial(model, 2 * grid.radial_order)
    tol = max(grid.rtol * abs(fine), 1e-14)
    if abs(fine - coarse) > tol:
        raise QuadratureNonconvergence(f"Chern integral moved from {coarse} to {fine}")
    return fine


def chern2(q: int, grid: QuadratureGrid | None = None) -> float:
    return chern_integral(TwistModel(q, 2), grid)


def chern3(q: int = 1, grid: QuadratureGrid | None = None) -> float:
    return chern_integral(TwistModel(q, 3), grid)


# axial torsion field --------------------------------------------------------


def _lowered_B(x):
    x = np.asarray(x, dtype=float)
    f = 1.0 + 0.5 * x @ x
    return torsion_vector_B(x) / f**2


def b_field_strength(x) -> np.ndarray:
    """B_MN = d_M B_N - d_N B_M for B_N = 2 x_N / f, from the analytic Jacobian."""
    x = np.asarray(x, dtype=float)
    f = 1.0 + 0.5 * x @ x
    jac = 2.0 * np.eye(4) / f - 2.0 * np.outer(x, x) / f**2  # jac[M, N] = d_M B_N
    return jac - jac.T


def b_field_strength_max(points) -> float:
    return float(max(np.max(np.abs(b_field_strength(x))) for x in points))


def b_field_fd_check(x, h: float = 1e-5) -> float:
    """Central-difference B_MN from the torsion-contracted vector, minus the analytic one."""
    x = np.asarray(x, dtype=float)
    jac = np.empty((4, 4))
    for M in range(4):
        e = np.zeros(4)
        e[M] = h
        f = lambda y: torsion_vector_B_from_torsion(y) / (1.0 + 0.5 * y @ y) ** 2
        jac[M] = (f(x + e) - f(x - e)) / (2 * h)
    return float(np.max(np.abs((jac - jac.T) - b_field_strength(x))))


# curvature of g = e^{2 phi} delta --------------------------------------------


def _phi_derivs(x):
    x = np.asarray(x, dtype=float)
    f = 1.0 + 0.5 * x @ x
    d1 = -x / f
    d2 = -np.eye(x.size) / f + np.outer(x, x) / f**2
    return f, d1, d2


def christoffel(x) -> np.ndarray:
    """G[a, b, c] = Gamma^a_{bc} = delta_ab phi_c + delta_ac phi_b - delta_bc phi_a."""
    _, p, _ = _phi_derivs(x)
    n = p.size
    I = np.eye(n)
    return np.einsum("ab,c->abc", I, p) + np.einsum("ac,b->abc", I, p) - np.einsum("bc,a->abc", I, p)


def _christoffel_derivative(x) -> np.ndarray:
    """dG[e, a, b, c] = d_e Gamma^a_{bc}."""
    _, _, pp = _phi_derivs(x)
    n = pp.shape[0]
    I = np.eye(n)
    return (
        np.einsum("ab,ce->eabc", I, pp)
        + np.einsum("ac,be->eabc", I, pp)
        - np.einsum("bc,ae->eabc", I, pp)
    )


def riemann(x) -> np.ndarray:
    """R[a, b, c, d] = R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}."""
    G = christoffel(x)
    dG = _christoffel_derivative(x)
    R = np.einsum("cadb->abcd", dG) - np.einsum("dacb->abcd", dG)
    R += np.einsum("ace,edb->abcd", G, G) - np.einsum("ade,ecb->abcd", G, G)
    return R


def scalar_curvature(x) -> float:
    f, _, _ = _phi_derivs(x)
    ginv = f**2
    ric = np.einsum("abad->bd", riemann(x))
    return float(ginv * np.trace(ric))


def signature_density(points) -> list:
    """eps^{RSKL} R_{MNRS} R^{MN}_{KL} with all-lowered Riemann and the metric g = delta/f^2.

    Returns (value, scale) per point, scale being the size of the squared
    Riemann tensor so the ratio is dimensionless.
    """
    eps = levi_civita(4)
    out = []
    for x in points:
        x = np.asarray(x, dtype=float)
        f, _, _ = _phi_derivs(x)
        g, ginv = 1.0 / f**2, f**2
        Rlow = g * riemann(x)  # R_{abcd}
        Rup = ginv**2 * Rlow  # R^{ab}_{cd}
        val = np.einsum("rskl,mnrs,mnkl->", eps, Rlow, Rup)
        scale = float(np.einsum("mnrs,mnrs->", Rlow, Rup))
        out.append((float(val), abs(scale)))
    return out


# K^M = (nabla^2 + B^2/4 + R/2) B^M -------------------------------------------


def _B_up_and_derivs(x):
    x = np.asarray(x, dtype=float)
    f = 1.0 + 0.5 * x @ x
    n = x.size
    I = np.eye(n)
    B = 2.0 * x * f
    dB = 2.0 * I * f + 2.0 * np.outer(x, x)  # dB[M, N] = d_N B^M
    ddB = 2.0 * (
        np.einsum("mn,p->mnp", I, x) + np.einsum("mp,n->mnp", I, x) + np.einsum("m,np->mnp", x, I)
    )  # ddB[M, N, P] = d_P d_N B^M
    return f, B, dB, ddB


def _k_pieces(x):
    f, B, dB, ddB = _B_up_and_derivs(x)
    g, ginv = 1.0 / f**2, f**2
    G = christoffel(x)
    dG = _christoffel_derivative(x)  # dG[P, M, N, L] = d_P Gamma^M_{NL}
    T = dB + np.einsum("mnl,l->mn", G, B)  # T[M, N] = nabla_N B^M
    dT = ddB + np.einsum("pmnl,l->mnp", dG, B) + np.einsum("mnl,lp->mnp", G, dB)  # d_P T[M, N]
    nablaT = dT + np.einsum("mpl,ln->mnp", G, T) - np.einsum("lpn,ml->mnp", G, T)
    lap = ginv * np.einsum("mnn->m", nablaT)
    B2 = g * (B @ B)
    R = scalar_curvature(x)
    return lap, 0.25 * B2 * B, 0.5 * R * B


@dataclass(frozen=True)
class KFluxRow:
    radius: float
    laplacian: float
    b_squared: float
    curvature: float

    @property
    def total(self) -> float:
        return self.laplacian + self.b_squared + self.curvature

    @property
    def piece_scale(self) -> float:
        return max(abs(self.laplacian), abs(self.b_squared), abs(self.curvature))


def k_term_fluxes(radius: float, angular_order: int = 8) -> KFluxRow:
    """Outward fluxes int sqrt(g) K^M n_M dS through |x| = radius, per piece.

    The coordinate sphere is parametrized by Hopf angles,
    x = R (cos e cos a, cos e sin a, sin e cos b, sin e sin b), with
    dS = R^3 sin e cos e de da db.
    """
    xg, wg = leggauss(angular_order)
    eta = 0.25 * math.pi * (xg + 1.0)
    weta = 0.25 * math.pi * wg
    nphi = 2 * angular_order
    phis = 2.0 * math.pi * np.arange(nphi) / nphi
    wphi = 2.0 * math.pi / nphi
    acc = np.zeros(3)
    for e, we in zip(eta, weta):
        for a in phis:
            for b in phis:
                n = np.array([math.cos(e) * math.cos(a), math.cos(e) * math.sin(a),
                              math.sin(e) * math.cos(b), math.sin(e) * math.sin(b)])
                x = radius * n
                f = 1.0 + 0.5 * radius**2
                sqrt_g = f**-4
                pieces = _k_pieces(x)
                dS = radius**3 * math.sin(e) * math.cos(e) * we * wphi * wphi
                acc += np.array([p @ n for p in pieces]) * sqrt_g * dS
    return KFluxRow(radius, *acc)


def k_term_cancellation(cutoffs=(10.0, 1e2, 1e3, 1e4), rtol: float = 1e-3):
    """Flux rows for each cutoff; the individual pieces must settle over the last two."""
    rows = [k_term_fluxes(R) for R in cutoffs]
    if len(rows) >= 2:
        a, b = rows[-2], rows[-1]
        for name in ("laplacian", "b_squared"):
            va, vb = getattr(a, name), getattr(b, name)
            if abs(va - vb) > rtol * max(abs(vb), 1e-300):
                raise QuadratureNonconvergence(f"{name} flux does not settle: {va} vs {vb}")
    return rows
