"""Jacobi polynomials P_n^{(alpha, beta)} in the classical normalization.

P_n^{(alpha,beta)}(1) = C(n + alpha, n).  Evaluation uses the three-term
recurrence; the explicit binomial sum is kept as the defining formula and
as the fallback whenever a recurrence denominator vanishes (this happens for
some negative beta).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial, lgamma, exp, log

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import betaln

__all__ = [
    "JacobiParams",
    "QuadratureRule",
    "jacobi_sum",
    "jacobi_eval",
    "jacobi_deriv",
    "jacobi_deriv2",
    "jacobi_norm_sq",
    "jacobi_coefficients",
    "gauss_jacobi",
    "jacobi_negative_beta",
    "reduction_identity_residual",
    "reduction_factor",
]


def _is_negative_integer(x: float) -> bool:
    return x < 0 and float(x).is_integer()


@dataclass(frozen=True)
class JacobiParams:
    n: int
    alpha: float
    beta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"degree must be a nonnegative integer, got {self.n}")


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    alpha: float
    beta: float

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def __len__(self):
        return len(self.nodes)


def _gen_binom(x: float, j: int) -> float:
    """Generalized binomial coefficient x (x-1) ... (x-j+1) / j!."""
    out = 1.0
    for i in range(j):
        out *= (x - i) / (i + 1)
    return out


def jacobi_sum(n: int, alpha: float, beta: float, z):
    """Defining binomial sum; valid for every real alpha, beta."""
    z = np.asarray(z, dtype=float)
    acc = np.zeros_like(z)
    for k in range(n + 1):
        c = _gen_binom(n + alpha, k) * _gen_binom(n + beta, n - k)
        acc = acc + c * (1.0 + z) ** k * (z - 1.0) ** (n - k)
    return acc / 2.0**n


def _recurrence_ok(n: int, a: float, b: float) -> bool:
    ab = a + b
    for k in range(2, n + 1):
        if k + ab == 0 or 2 * k + ab - 2 == 0:
            return False
    return True


def _eval(n: int, a: float, b: float, z):
    z = np.asarray(z, dtype=float)
    if n == 0:
        return np.ones_like(z)
    if not _recurrence_ok(n, a, b):
        return jacobi_sum(n, a, b, z)
    ab = a + b
    p0 = np.ones_like(z)
    p1 = 0.5 * (a - b + (ab + 2.0) * z)
    for k in range(2, n + 1):
        c0 = 2.0 * k * (k + ab) * (2 * k + ab - 2)
        c1 = (2 * k + ab - 1) * (a * a - b * b)
        c2 = (2 * k + ab - 2) * (2 * k + ab - 1) * (2 * k + ab)
        c3 = 2.0 * (k + a - 1) * (k + b - 1) * (2 * k + ab)
        p0, p1 = p1, ((c1 + c2 * z) * p1 - c3 * p0) / c0
    return p1


def jacobi_coefficients(n: int, alpha: float, beta: float) -> np.ndarray:
    """Power-basis coefficients c_k of P_n^{(alpha,beta)}(z) = sum c_k z^k.

    Built with the same recurrence as the evaluator, on polynomial objects;
    the binomial sum is used when the recurrence is singular.
    """
    JacobiParams(n, alpha, beta)
    P = np.polynomial.Polynomial
    a, b = float(alpha), float(beta)
    if not _recurrence_ok(n, a, b):
        out = P([0.0])
        for k in range(n + 1):
            c = _gen_binom(n + a, k) * _gen_binom(n + b, n - k)
            out = out + c * P([1.0, 1.0]) ** k * P([-1.0, 1.0]) ** (n - k)
        p1 = out / 2.0**n
    else:
        p1 = _coef_recurrence(n, a, b)
    coef = np.zeros(n + 1)
    m = min(n + 1, len(p1.coef))
    coef[:m] = p1.coef[:m]
    return coef


def _coef_recurrence(n, a, b):
    P = np.polynomial.Polynomial
    p0 = P([1.0])
    if n == 0:
        return p0
    ab = a + b
    p1 = P([0.5 * (a - b), 0.5 * (ab + 2.0)])
    for k in range(2, n + 1):
        c0 = 2.0 * k * (k + ab) * (2 * k + ab - 2)
        c1 = (2 * k + ab - 1) * (a * a - b * b)
        c2 = (2 * k + ab - 2) * (2 * k + ab - 1) * (2 * k + ab)
        c3 = 2.0 * (k + a - 1) * (k + b - 1) * (2 * k + ab)
        p0, p1 = p1, (P([c1, c2]) * p1 - c3 * p0) / c0
    return p1


def _check_beta(beta: float):
    if _is_negative_integer(beta):
        raise ValueError(
            "negative integer beta is only available through jacobi_negative_beta"
        )


def jacobi_eval(n: int, alpha: float, beta: float, z):
    JacobiParams(n, alpha, beta)
    _check_beta(beta)
    out = _eval(n, alpha, beta, z)
    return float(out) if np.ndim(out) == 0 else out


def _deriv(n: int, a: float, b: float, z, order: int = 1):
    z = np.asarray(z, dtype=float)
    if order > n:
        return np.zeros_like(z)
    coef = 1.0
    for i in range(order):
        coef *= 0.5 * (n + a + b + 1 + i)
    return coef * _eval(n - order, a + order, b + order, z)


def jacobi_deriv(n: int, alpha: float, beta: float, z):
    """d/dz P_n = (n + alpha + beta + 1)/2 * P_{n-1}^{(alpha+1, beta+1)}."""
    JacobiParams(n, alpha, beta)
    _check_beta(beta)
    out = _deriv(n, alpha, beta, z, 1)
    return float(out) if np.ndim(out) == 0 else out


def jacobi_deriv2(n: int, alpha: float, beta: float, z):
    JacobiParams(n, alpha, beta)
    _check_beta(beta)
    out = _deriv(n, alpha, beta, z, 2)
    return float(out) if np.ndim(out) == 0 else out


def jacobi_norm_sq(n: int, alpha: float, beta: float) -> float:
    """Integral of P_n^2 (1-z)^alpha (1+z)^beta over (-1, 1)."""
    if alpha <= -1 or beta <= -1:
        raise ValueError("norm requires alpha > -1 and beta > -1")
    ab = alpha + beta
    if n == 0:
        return exp((ab + 1) * log(2.0) + betaln(alpha + 1, beta + 1))
    logh = (
        (ab + 1) * log(2.0)
        + lgamma(n + alpha + 1)
        + lgamma(n + beta + 1)
        - log(2 * n + ab + 1)
        - lgamma(n + ab + 1)
        - lgamma(n + 1)
    )
    return exp(logh)


def gauss_jacobi(order: int, alpha: float, beta: float) -> QuadratureRule:
    """Golub-Welsch rule for the weight (1-z)^alpha (1+z)^beta on (-1, 1).

    Exact for polynomials of degree <= 2*order - 1.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if alpha <= -1 or beta <= -1:
        raise ValueError(f"invalid Jacobi weight exponents alpha={alpha}, beta={beta}")
    a, b = float(alpha), float(beta)
    ab = a + b
    k = np.arange(order, dtype=float)
    denom = (2 * k + ab) * (2 * k + ab + 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = np.where(denom != 0, (b * b - a * a) / np.where(denom != 0, denom, 1.0), 0.0)
    diag[0] = (b - a) / (ab + 2)
    k = np.arange(1, order, dtype=float)
    off2 = (
        4 * k * (k + a) * (k + b) * (k + ab)
        / ((2 * k + ab) ** 2 * (2 * k + ab + 1) * (2 * k + ab - 1))
    )
    if order > 1:
        # k = 1 term written without the (k + ab) / (2k + ab - 1) ratio, which is 0/0 at ab = -1
        off2[0] = 4 * (1 + a) * (1 + b) / ((2 + ab) ** 2 * (3 + ab))
    nodes, vecs = eigh_tridiagonal(diag, np.sqrt(off2))
    mu0 = exp((ab + 1) * log(2.0) + betaln(a + 1, b + 1))
    weights = mu0 * vecs[0, :] ** 2
    return QuadratureRule(nodes=nodes, weights=weights, alpha=a, beta=b)


def reduction_factor(n: int, alpha: int, beta: int) -> float:
    """n! (n+alpha+beta)! / ((n+alpha)! (n+beta)!)."""
    return factorial(n) * factorial(n + alpha + beta) / (factorial(n + alpha) * factorial(n + beta))


def _check_integer_pair(alpha, beta):
    if int(alpha) != alpha or int(beta) != beta or alpha < 0 or beta < 0:
        raise ValueError("reduction identity requires nonnegative integer alpha, beta")


def jacobi_negative_beta(n: int, alpha: int, beta: int, z):
    """P_n^{(alpha, -beta)}(z) for nonnegative integer alpha, beta.

    For n >= beta the polynomial carries the factor (1+z)^beta and is reduced to
    P_{n-beta}^{(alpha, beta)}; below that it is evaluated from the sum.
    """
    _check_integer_pair(alpha, beta)
    z = np.asarray(z, dtype=float)
    if beta == 0:
        out = _eval(n, alpha, 0, z)
    elif n >= beta:
        m = n - beta
        out = (
            2.0 ** (-beta)
            * (1.0 + z) ** beta
            * reduction_factor(m, alpha, beta)
            * _eval(m, alpha, beta, z)
        )
    else:
        out = jacobi_sum(n, alpha, -beta, z)
    return float(out) if np.ndim(out) == 0 else out


def reduction_identity_residual(n: int, alpha: int, beta: int, z) -> float:
    """|P_{n+beta}^{(alpha,-beta)}(z) - 2^-beta (1+z)^beta c P_n^{(alpha,beta)}(z)|.

    The left side is taken from the defining sum, the right side from the
    recurrence, so the two sides are computed independently.
    """
    _check_integer_pair(alpha, beta)
    z = np.asarray(z, dtype=float)
    lhs = jacobi_sum(n + beta, alpha, -beta, z)
    rhs = 2.0 ** (-beta) * (1.0 + z) ** beta * reduction_factor(n, alpha, beta) * _eval(n, alpha, beta, z)
    return float(np.max(np.abs(lhs - rhs)))
