import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_jacobi, roots_jacobi

from dolbeault_spectra.orthopoly import (
    JacobiParams,
    gauss_jacobi,
    jacobi_coefficients,
    jacobi_deriv,
    jacobi_deriv2,
    jacobi_eval,
    jacobi_negative_beta,
    jacobi_norm_sq,
    jacobi_sum,
    reduction_factor,
    reduction_identity_residual,
)

Z = np.linspace(-1.0, 1.0, 41)


def test_low_degree_closed_forms():
    assert np.allclose(jacobi_eval(0, 1.0, 1.0, Z), 1.0)
    assert np.allclose(jacobi_eval(1, 1.0, 1.0, Z), 2.0 * Z)
    # P_1^{(a,b)} = (a - b)/2 + (a + b + 2) z / 2
    assert np.allclose(jacobi_eval(1, 3.0, 0.5, Z), 1.25 + 2.75 * Z)


def test_endpoint_value():
    for n in range(8):
        assert jacobi_eval(n, 2.0, 1.5, 1.0) == pytest.approx(math.comb(n + 2, n), rel=1e-13)


@pytest.mark.parametrize("n,a,b", [(5, 0.0, 0.0), (7, 2.0, 3.5), (4, 1.0, 2.8284271247461903), (6, 5.0, -0.5)])
def test_recurrence_matches_scipy(n, a, b):
    assert np.allclose(jacobi_eval(n, a, b, Z), eval_jacobi(n, a, b, Z), rtol=1e-12, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(0, 12),
    a=st.floats(-0.9, 8.0),
    b=st.floats(-0.9, 8.0),
)
def test_recurrence_agrees_with_defining_sum(n, a, b):
    rec = jacobi_eval(n, a, b, Z)
    ref = jacobi_sum(n, a, b, Z)
    assert np.all(np.abs(rec - ref) <= 1e-12 * np.maximum(1.0, np.abs(ref)) * max(1, n) ** 2)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(0, 10), a=st.floats(0.0, 6.0), b=st.floats(0.0, 6.0))
def test_coefficients_reproduce_values(n, a, b):
    c = jacobi_coefficients(n, a, b)
    assert c.size == n + 1
    ref = jacobi_eval(n, a, b, Z)
    assert np.allclose(np.polynomial.polynomial.polyval(Z, c), ref, rtol=1e-10, atol=1e-10 * np.max(np.abs(ref)))


def test_derivatives_against_finite_differences():
    h = 1e-5
    z = np.linspace(-0.9, 0.9, 9)
    n, a, b = 6, 2.0, 1.5
    fd1 = (jacobi_eval(n, a, b, z + h) - jacobi_eval(n, a, b, z - h)) / (2 * h)
    fd2 = (jacobi_eval(n, a, b, z + h) - 2 * jacobi_eval(n, a, b, z) + jacobi_eval(n, a, b, z - h)) / h**2
    assert np.allclose(jacobi_deriv(n, a, b, z), fd1, rtol=1e-7)
    assert np.allclose(jacobi_deriv2(n, a, b, z), fd2, rtol=1e-4)


def test_jacobi_ode():
    # (1 - z^2) P'' + (b - a - (a + b + 2) z) P' + n (n + a + b + 1) P = 0
    n, a, b = 5, 3.0, 2.5
    z = np.linspace(-0.95, 0.95, 21)
    r = (1 - z**2) * jacobi_deriv2(n, a, b, z) + (b - a - (a + b + 2) * z) * jacobi_deriv(n, a, b, z)
    r += n * (n + a + b + 1) * jacobi_eval(n, a, b, z)
    assert np.max(np.abs(r)) < 1e-10 * np.max(np.abs(jacobi_eval(n, a, b, z))) * n * n


def test_rejects_bad_parameters():
    with pytest.raises(ValueError):
        JacobiParams(-1, 0.0, 0.0)
    with pytest.raises(ValueError):
        jacobi_eval(2, 1.0, -2.0, 0.3)
    with pytest.raises(ValueError):
        gauss_jacobi(0, 0.0, 0.0)
    with pytest.raises(ValueError):
        gauss_jacobi(4, -1.0, 0.0)


@pytest.mark.parametrize("order,a,b", [(5, 0.0, 0.0), (12, 1.0, 3.0), (9, 2.0, 2.8284271247461903), (7, -0.5, 0.5)])
def test_gauss_jacobi_matches_scipy(order, a, b):
    rule = gauss_jacobi(order, a, b)
    x, w = roots_jacobi(order, a, b)
    assert np.allclose(rule.nodes, x, atol=1e-13)
    assert np.allclose(rule.weights, w, rtol=1e-11)
    assert len(rule) == order


@settings(max_examples=40, deadline=None)
@given(order=st.integers(1, 15), a=st.floats(-0.9, 6.0), b=st.floats(-0.9, 6.0))
def test_gauss_jacobi_orthogonality(order, a, b):
    rule = gauss_jacobi(order, a, b)
    for n in range(order):
        for m in range(n, order):
            val = rule.integrate(jacobi_eval(n, a, b, rule.nodes) * jacobi_eval(m, a, b, rule.nodes))
            ref = jacobi_norm_sq(n, a, b) if n == m else 0.0
            scale = math.sqrt(jacobi_norm_sq(n, a, b) * jacobi_norm_sq(m, a, b))
            assert abs(val - ref) <= 1e-10 * scale


def test_norm_against_quadrature_of_monomials():
    # [DERIVED] int (1-z)(1+z)^2 dz = 4/3 gives the n = 0 norm for (1, 2)
    assert jacobi_norm_sq(0, 1.0, 2.0) == pytest.approx(4.0 / 3.0, rel=1e-14)
    # [DERIVED] P_1^{(1,1)} = 2z: int 4 z^2 (1 - z^2) dz = 16/15
    assert jacobi_norm_sq(1, 1.0, 1.0) == pytest.approx(16.0 / 15.0, rel=1e-14)


def test_reduction_factor_values():
    assert reduction_factor(3, 1, 3) == pytest.approx(math.factorial(3) * math.factorial(7) / (math.factorial(4) * math.factorial(6)))
    assert reduction_factor(0, 0, 0) == 1.0


def test_negative_beta_is_reduced_polynomial():
    # n >= beta: P_n^{(a,-b)} = c ((1+z)/2)^b P_{n-b}^{(a,b)}, compared with the defining sum
    z = np.linspace(-1.0, 1.0, 31)
    for a in range(4):
        for b in range(1, 4):
            for n in range(b, 7):
                assert np.allclose(jacobi_negative_beta(n, a, b, z), jacobi_sum(n, a, -b, z), atol=1e-11)
    # below the reduction threshold the defining sum is used directly
    assert np.allclose(jacobi_negative_beta(1, 2, 3, z), jacobi_sum(1, 2, -3, z))


@settings(max_examples=50, deadline=None)
@given(n=st.integers(0, 6), a=st.integers(0, 6), b=st.integers(0, 4))
def test_reduction_identity_property(n, a, b):
    z = np.linspace(-1.0, 1.0, 101)[1:]
    assert reduction_identity_residual(n, a, b, z) <= 1e-10
