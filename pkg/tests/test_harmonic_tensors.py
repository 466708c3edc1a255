from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dolbeault_spectra.harmonic_tensors import (
    InvalidLabels,
    Labels,
    angular_inner_product,
    brute_force_dimension,
    build_structure,
    degeneracy,
    degeneracy_formula,
    harmonicity_residual,
    harmonicity_residual_float,
    labels_from_ms,
)
from dolbeault_spectra.sphere_geometry import SphereSpec

S4, S6 = SphereSpec(2), SphereSpec(3)


def test_label_conversion():
    lab = labels_from_ms(-2, 1)
    assert (lab.p, lab.qb, lab.m, lab.s) == (1, 3, -2, 1)
    assert labels_from_ms(3, 0) == Labels(3, 0)
    with pytest.raises(InvalidLabels):
        labels_from_ms(0, -1)
    with pytest.raises(InvalidLabels):
        Labels(-1, 0)


@pytest.mark.parametrize("m,s,expect", [(0, 0, 1), (1, 0, 2), (-1, 0, 2), (0, 1, 3), (-2, 1, 5), (3, 2, 8)])
def test_s4_degeneracy_values(m, s, expect):
    assert degeneracy(S4, (m, s)) == expect


@pytest.mark.parametrize("p,q,expect", [(0, 0, 1), (1, 0, 3), (0, 1, 3), (1, 1, 8), (2, 0, 6), (2, 1, 15)])
def test_s6_degeneracy_values(p, q, expect):
    assert degeneracy(S6, (p, q)) == expect


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 4), st.integers(0, 4))
def test_general_formula_matches_brute_force(d, p, q):
    assert degeneracy_formula(d, p, q) == brute_force_dimension(SphereSpec(d), Labels(p, q))


def test_structure_series_is_harmonic():
    for spec, labels in [(S4, (0, 2)), (S4, (-3, 1)), (S6, (2, 2)), (S6, (1, 3))]:
        ts = build_structure(spec, labels)
        assert harmonicity_residual(ts) == 0.0


def test_float_harmonicity_check():
    rng = np.random.default_rng(0)
    pts = [rng.normal(size=3) + 1j * rng.normal(size=3) for _ in range(3)]
    ts = build_structure(S6, (1, 1))
    assert harmonicity_residual_float(ts, pts) < 1e-7


def test_structure_components_and_rank():
    ts = build_structure(S6, (2, 1))
    assert ts.rank() == degeneracy(S6, (2, 1))
    import sympy as sp

    from dolbeault_spectra.harmonic_tensors import generators

    ts = build_structure(S4, (0, 1))
    (w1, w2), (v1, v2) = generators(2)
    # w1 wbar1 - t/2 for d = 2
    assert sp.expand(ts.component((0,), (0,)).as_expr() - (w1 * v1 - (w1 * v1 + w2 * v2) / 2)) == 0
    assert ts.leading().as_expr() == w1 * v2
    assert ts.rank() == 3
    with pytest.raises(InvalidLabels):
        ts.component((0, 0), (1,))


def test_orthogonality_of_different_bidegrees():
    a = build_structure(S4, (0, 1)).leading()
    b = build_structure(S4, (0, 0)).leading()
    assert angular_inner_product(a, b, 2) == 0
    # [DERIVED] |w1|^2 over S^3 is pi^2 / 2
    c = build_structure(S4, (-1, 0)).leading()
    assert angular_inner_product(c, c, 2) == Fraction(1, 1)


def test_orthogonality_against_hopf_grid_quadrature():
    # [DERIVED] exact rational inner products against direct quadrature on S^3
    import sympy as sp

    from dolbeault_spectra.harmonic_tensors import generators

    ts = build_structure(S4, (0, 1))
    comps = list(ts.components.values())
    w, wb = generators(2)
    n = 24
    xg, wg = np.polynomial.legendre.leggauss(n)
    eta = 0.25 * np.pi * (xg + 1)
    weta = 0.25 * np.pi * wg
    ang = 2 * np.pi * np.arange(2 * n) / (2 * n)
    E, A, B = np.meshgrid(eta, ang, ang, indexing="ij")
    W = np.meshgrid(weta, np.ones_like(ang), np.ones_like(ang), indexing="ij")[0]
    w1 = np.cos(E) * np.exp(1j * A)
    w2 = np.sin(E) * np.exp(1j * B)
    dS = np.sin(E) * np.cos(E) * W * (2 * np.pi / (2 * n)) ** 2
    fs = [sp.lambdify((*w, *wb), c.as_expr(), "numpy") for c in comps]
    vals = [np.broadcast_to(f(w1, w2, w1.conj(), w2.conj()), w1.shape) for f in fs]
    for i, ci in enumerate(comps):
        for j, cj in enumerate(comps):
            num = np.sum(np.conj(vals[i]) * vals[j] * dS)
            exact = float(angular_inner_product(ci, cj, 2)) * math.pi**2
            assert abs(num - exact) < 1e-12


def test_invalid_label_arity():
    with pytest.raises((InvalidLabels, ValueError)):
        build_structure(S6, (1,))
