"""Radial eigenproblems of the Dolbeault Laplacian on punctured S^4 and S^6.

For a harmonic structure of bidegree (p, qb), k = p + qb, the radial factor
F(z) of an eigenfunction obeys

    (z^2 - 1) F'' + 2(a z + b) F' + c F / (1 + z) = (lambda - shift) F,

with a = d, b = k.  Near z = -1, F ~ (1 + z)^gamma with
gamma^2 + (a - b - 1) gamma - c/2 = 0, i.e.

    gamma = ((1 + b - a) +- Delta) / 2,   Delta^2 = (1 + b - a)^2 + 2c,

and F = (1 + z)^gamma P_n^{(a+b-1, +-Delta)}(z) with
lambda = shift + gamma^2 + (2a - 1) gamma + n (n + alpha + beta + 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.linalg import eigh

from .config import DEFAULT_TOLERANCES
from .harmonic_tensors import Labels, degeneracy, labels_from_ms
from .orthopoly import (
    gauss_jacobi,
    jacobi_coefficients,
    jacobi_deriv,
    jacobi_deriv2,
    jacobi_eval,
    jacobi_negative_beta,
    jacobi_norm_sq,
    reduction_factor,
)
from .sphere_geometry import SphereSpec

__all__ = [
    "ModeKey",
    "RadialSolution",
    "AdmissibilityReport",
    "QImageClass",
    "UnsupportedSectorError",
    "ConvergenceError",
    "ode_coefficients",
    "delta",
    "delta_squared",
    "closed_form",
    "radial_factor",
    "eigenfunction_eval",
    "ode_residual",
    "collocation_eigenvalues",
    "classify",
    "reduced_partner",
    "square_integrability_exponent",
    "supported_sectors",
]

PLUS, MINUS = "plus", "minus"


class UnsupportedSectorError(ValueError):
    """Sector without a scalar radial reduction."""


class ConvergenceError(RuntimeError):
    pass


def supported_sectors(d: int):
    return {2: (0, 2), 3: (0, 3)}.get(d, ())


@dataclass(frozen=True)
class ModeKey:
    """Labels are (m, s) for d = 2 and (p, q) for d = 3."""

    d: int
    sector: int
    labels: tuple
    n: int = 0
    branch: str = PLUS

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(int(x) for x in self.labels))
        if self.d not in (2, 3):
            raise ValueError(f"radial engine covers d = 2 and d = 3, got d = {self.d}")
        if not 0 <= self.sector <= self.d:
            raise ValueError(f"fermion number {self.sector} out of range for d = {self.d}")
        if len(self.labels) != 2:
            raise ValueError("labels must be a pair")
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"radial number must be a nonnegative integer, got {self.n}")
        if self.branch not in (PLUS, MINUS):
            raise ValueError(f"branch must be 'plus' or 'minus', got {self.branch!r}")
        self.bidegree  # validates label ranges

    @property
    def bidegree(self) -> Labels:
        if self.d == 2:
            return labels_from_ms(*self.labels)
        return Labels(*self.labels)

    @property
    def sign(self) -> int:
        return 1 if self.branch == PLUS else -1

    def with_(self, **kw) -> "ModeKey":
        fields = dict(d=self.d, sector=self.sector, labels=self.labels, n=self.n, branch=self.branch)
        fields.update(kw)
        return ModeKey(**fields)


@dataclass(frozen=True)
class RadialSolution:
    key: ModeKey
    gamma: float
    delta: float
    jacobi_alpha: int
    jacobi_beta: float
    lam: float
    degeneracy: int


class QImageClass(str, Enum):
    REGULAR = "regular"
    BOUNDED_SINGULAR = "bounded_singular"
    GROWING_BUT_L2 = "growing_but_L2"
    NOT_L2 = "not_L2"


@dataclass(frozen=True)
class AdmissibilityReport:
    square_integrable: bool
    regular_on_sphere: bool
    independent_branch: bool
    q_image_class: QImageClass
    admitted: bool
    norm_exponent: float = field(default=float("nan"))

    def as_dict(self) -> dict:
        return {
            "square_integrable": self.square_integrable,
            "regular_on_sphere": self.regular_on_sphere,
            "independent_branch": self.independent_branch,
            "q_image_class": self.q_image_class.value,
            "admitted": self.admitted,
        }


def _check_supported(key: ModeKey):
    if key.sector not in supported_sectors(key.d):
        raise UnsupportedSectorError(
            f"unsupported: sector F={key.sector} on S^{2 * key.d} has no closed-form radial "
            "reduction (open problem); its states are reachable only as supercharge images"
        )


def ode_coefficients(key: ModeKey):
    """(a, b, c, shift) of the radial equation."""
    _check_supported(key)
    lab = key.bidegree
    k, p, q = lab.total, lab.p, lab.qb
    if key.d == 2:
        if key.sector == 0:
            return 2, k, 4 * p, 0
        return 2, k, 4 * (p + 1), 2
    if key.sector == 0:
        return 3, k, 8 * p, 0
    return 3, k, 2 * (3 * (p + 1) + q), 6


def delta_squared(key: ModeKey) -> int:
    """Radicand of Delta, written out per sphere and sector."""
    _check_supported(key)
    if key.d == 2:
        m, s = key.labels
        if key.sector == 0:
            return (1 - m - 2 * s) ** 2 + 8 * (m + s) if m >= 0 else (1 - abs(m) - 2 * s) ** 2 + 8 * s
        if m >= 0:
            return (1 - m - 2 * s) ** 2 + 8 * (m + s + 1)
        return (1 - abs(m) - 2 * s) ** 2 + 8 * (s + 1)
    p, q = key.labels
    if key.sector == 0:
        return (2 - p - q) ** 2 + 16 * p
    return (2 - p - q) ** 2 + 4 * (3 * (p + 1) + q)


def delta(key: ModeKey) -> float:
    r2 = delta_squared(key)
    root = math.isqrt(r2)
    return float(root) if root * root == r2 else math.sqrt(r2)


def _integer_delta(key: ModeKey):
    r2 = delta_squared(key)
    root = math.isqrt(r2)
    return root if root * root == r2 else None


def closed_form(key: ModeKey) -> RadialSolution:
    a, b, c, shift = ode_coefficients(key)
    lab = key.bidegree
    k = lab.total
    dl = delta(key)
    alpha = k + key.d - 1
    beta = key.sign * dl
    gamma = (k - (key.d - 1) + key.sign * dl) / 2.0
    lam = shift + gamma**2 + (2 * key.d - 1) * gamma + key.n * (key.n + alpha + beta + 1)
    return RadialSolution(
        key=key,
        gamma=gamma,
        delta=dl,
        jacobi_alpha=alpha,
        jacobi_beta=beta,
        lam=lam,
        degeneracy=degeneracy(SphereSpec(key.d), lab),
    )


def _reducible(key: ModeKey) -> bool:
    """Minus branch with integer Delta > 0 and n >= Delta."""
    D = _integer_delta(key)
    return key.branch == MINUS and D is not None and D > 0 and key.n >= D


def radial_factor(key: ModeKey):
    """(e, coef) with F(z) = (1 + z)^e * sum coef_i z^i.

    Reducible minus-branch solutions are returned in reduced form, with the
    (1 + z)^Delta factor of the Jacobi polynomial moved into the exponent.
    """
    sol = closed_form(key)
    if _reducible(key):
        D = _integer_delta(key)
        nr = key.n - D
        coef = 2.0**-D * reduction_factor(nr, sol.jacobi_alpha, D) * jacobi_coefficients(
            nr, sol.jacobi_alpha, D
        )
        return sol.gamma + D, coef
    return sol.gamma, jacobi_coefficients(key.n, sol.jacobi_alpha, sol.jacobi_beta)


def _jacobi_with_derivs(n, alpha, beta, z):
    if beta < 0 and float(beta).is_integer():
        c = jacobi_coefficients(n, alpha, beta)
        return (
            npoly.polyval(z, c),
            npoly.polyval(z, npoly.polyder(c)),
            npoly.polyval(z, npoly.polyder(c, 2)),
        )
    return jacobi_eval(n, alpha, beta, z), jacobi_deriv(n, alpha, beta, z), jacobi_deriv2(n, alpha, beta, z)


def eigenfunction_eval(key: ModeKey, z):
    """(1 + z)^gamma P_n^{(alpha, beta)}(z)."""
    sol = closed_form(key)
    z = np.asarray(z, dtype=float)
    beta = sol.jacobi_beta
    if beta < 0 and float(beta).is_integer():
        P = jacobi_negative_beta(key.n, sol.jacobi_alpha, int(-beta), z)
    else:
        P = jacobi_eval(key.n, sol.jacobi_alpha, beta, z)
    out = (1.0 + z) ** sol.gamma * P
    return float(out) if np.ndim(out) == 0 else out


def ode_residual(key: ModeKey, zs) -> float:
    """Largest ODE residual over the samples, relative to the size of its terms."""
    a, b, c, shift = ode_coefficients(key)
    sol = closed_form(key)
    z = np.asarray(zs, dtype=float)
    g, n, beta = sol.gamma, key.n, sol.jacobi_beta
    if _reducible(key):
        # evaluate the reduced form; the constant factor drops out of the residual
        D = _integer_delta(key)
        g, n, beta = g + D, n - D, float(D)
    P, dP, d2P = _jacobi_with_derivs(n, sol.jacobi_alpha, beta, z)
    opz = 1.0 + z
    F = opz**g * P
    F1 = opz ** (g - 1) * (g * P + opz * dP)
    F2 = opz ** (g - 2) * (g * (g - 1) * P + 2 * g * opz * dP + opz**2 * d2P)
    terms = [
        (z**2 - 1) * F2,
        2 * (a * z + b) * F1,
        c * F / opz,
        -(sol.lam - shift) * F,
    ]
    res = np.abs(sum(terms))
    scale = np.maximum(sum(np.abs(t) for t in terms), 1.0)
    return float(np.max(res / scale))


def _indicial_plus(a, b, c) -> float:
    return ((1 + b - a) + math.sqrt((1 + b - a) ** 2 + 2 * c)) / 2.0


def _galerkin(a, b, c, N):
    """Weak-form matrices on the basis (1+z)^gamma P_i^{(A, beta)}, normalized.

    With w = (1-z)^A (1+z)^{a-b-1}, A = a + b - 1, the operator is
    -(1/w)(w (1 - z^2) F')' + c F/(1+z) and the stiffness form is
    int w [(1 - z^2) F' G' + c F G/(1+z)].
    """
    A = a + b - 1
    g = _indicial_plus(a, b, c)
    beta = 2 * g + a - b - 1
    order = N + 2
    norms = np.array([math.sqrt(jacobi_norm_sq(i, A, beta)) for i in range(N)])

    def basis(rule):
        z = rule.nodes
        P = np.array([jacobi_eval(i, A, beta, z) for i in range(N)]) / norms[:, None]
        dP = np.array([jacobi_deriv(i, A, beta, z) for i in range(N)]) / norms[:, None]
        return P, dP

    rule_m = gauss_jacobi(order, A, beta)
    P, _ = basis(rule_m)
    M = (P * rule_m.weights) @ P.T

    rule_1 = gauss_jacobi(order, A + 1, beta)
    P1, dP1 = basis(rule_1)
    K = g * ((P1 * rule_1.weights) @ dP1.T + (dP1 * rule_1.weights) @ P1.T)

    rule_2 = gauss_jacobi(order, A + 1, beta + 1)
    _, dP2 = basis(rule_2)
    K += (dP2 * rule_2.weights) @ dP2.T

    if g != 0 or c != 0:
        rule_0 = gauss_jacobi(order, A, beta - 1)
        P0, _ = basis(rule_0)
        f = (1.0 - rule_0.nodes) * g * g + c
        K += (P0 * (rule_0.weights * f)) @ P0.T
    return 0.5 * (K + K.T), 0.5 * (M + M.T)


def collocation_eigenvalues(family, N: int, k: int, rtol: float | None = None):
    """k lowest eigenvalues of the radial operator on the square-integrable sector.

    family is (d, F, labels).  The basis carries the regular indicial exponent
    taken from the ODE coefficients, so the eigenproblem is symmetric-definite.
    The result is recomputed with 2N basis functions; if any eigenvalue moves
    by more than rtol (relative, with an absolute floor of rtol) a
    ConvergenceError is raised.
    """
    d, F, labels = family
    if N < 4 * k:
        raise ValueError(f"basis size {N} is below 4k = {4 * k}")
    rtol = DEFAULT_TOLERANCES.eigen_rel if rtol is None else rtol
    a, b, c, shift = ode_coefficients(ModeKey(d, F, labels))

    def solve(size):
        K, M = _galerkin(a, b, c, size)
        return shift + eigh(K, M, eigvals_only=True)[:k]

    coarse = solve(N)
    fine = solve(2 * N)
    drift = np.abs(fine - coarse) / np.maximum(np.abs(fine), 1.0)
    if np.any(drift > rtol):
        raise ConvergenceError(f"eigenvalues moved by {drift.max():.3e} under basis doubling")
    return [float(x) for x in fine]


def square_integrability_exponent(key: ModeKey) -> float:
    """Exponent of (1 + z) in the angular-integrated norm density near z = -1.

    With |S|^2 ~ t^k, the density is (1+z)^{d - 1 - k + 2(gamma + r)} where r
    is the order of vanishing of the Jacobi factor at z = -1.
    """
    sol = closed_form(key)
    r = _integer_delta(key) if _reducible(key) else 0
    return key.d - 1 - key.bidegree.total + 2 * (sol.gamma + r)


def reduced_partner(key: ModeKey):
    """Plus-branch key and factor with F_minus = factor * F_plus, or None."""
    if not _reducible(key):
        return None
    D = _integer_delta(key)
    alpha = closed_form(key).jacobi_alpha
    nr = key.n - D
    return key.with_(n=nr, branch=PLUS), 2.0**-D * reduction_factor(nr, alpha, D)


def _independent(key: ModeKey) -> bool:
    if key.branch == PLUS:
        return True
    D = _integer_delta(key)
    if D == 0:
        return False  # both branches coincide
    return not _reducible(key)


def _regular(key: ModeKey) -> bool:
    sol = closed_form(key)
    r = _integer_delta(key) if _reducible(key) else 0
    k = key.bidegree.total
    # |psi| ~ t^{k/2 - gamma - r} at the puncture
    growth = k / 2.0 - (sol.gamma + r)
    tol = 1e-12
    if growth < -tol:
        return True
    return abs(growth) <= tol and k == 0


@lru_cache(maxsize=4096)
def classify(key: ModeKey) -> AdmissibilityReport:
    _check_supported(key)
    expo = square_integrability_exponent(key)
    l2 = expo > -1.0
    indep = _independent(key)
    from .susy_index import q_image_class  # deferred: susy_index builds on this module

    return AdmissibilityReport(
        square_integrable=l2,
        regular_on_sphere=_regular(key),
        independent_branch=indep,
        q_image_class=q_image_class(key),
        admitted=l2 and indep,
        norm_exponent=expo,
    )
