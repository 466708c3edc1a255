import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from dolbeault_spectra.states import (
    SectorState,
    annihilate,
    create,
    d_anti,
    d_hol,
    evaluate,
    growth_exponent,
    norm_sq,
    radial_density,
    scalar_state,
)


def _sample_state():
    st_ = scalar_state(2, 1.5, [1.0, 2.0, -0.5], a=(1, 0), b=(0, 2))
    st_.add_term((), (0, 1), (1, 0), 1, np.array([0.3, 0.0, 1.0]))
    st_.add_term((1,), (0, 0), (1, 1), -1, np.array([2.0]))
    return st_


def _fd_derivative(st_, w, j, holomorphic, h=1e-6):
    # d_j = (d_x - i d_y)/2, dbar_j = (d_x + i d_y)/2 with w_j = x_j + i y_j
    ex = np.zeros(st_.d, dtype=complex)
    ex[j] = h
    fx = {I: (evaluate(st_, w + ex)[I] - evaluate(st_, w - ex)[I]) / (2 * h) for I in st_.comps}
    fy = {I: (evaluate(st_, w + 1j * ex)[I] - evaluate(st_, w - 1j * ex)[I]) / (2 * h) for I in st_.comps}
    s = -1j if holomorphic else 1j
    return {I: 0.5 * (fx[I] + s * fy[I]) for I in st_.comps}


@pytest.mark.parametrize("holomorphic", [True, False])
def test_exact_derivatives_match_finite_differences(holomorphic):
    st_ = _sample_state()
    w = np.array([0.7 - 0.2j, -0.4 + 0.9j])
    op = d_hol if holomorphic else d_anti
    for j in range(2):
        exact = evaluate(op(st_, j), w)
        fd = _fd_derivative(st_, w, j, holomorphic)
        for I in fd:
            assert abs(exact.get(I, 0.0) - fd[I]) < 1e-7 * (1 + abs(fd[I]))


def test_fermion_anticommutators():
    st_ = _sample_state()
    w = np.array([0.3 + 0.1j, 0.5 - 0.6j])
    for j in range(2):
        for k in range(2):
            acomm = create(annihilate(st_, k), j) + annihilate(create(st_, j), k)
            ref = st_ if j == k else st_.scale(0.0)
            a, b = evaluate(acomm, w), evaluate(ref, w)
            for I in set(a) | set(b):
                assert abs(a.get(I, 0) - b.get(I, 0)) < 1e-12
            assert create(create(st_, j), j).is_zero()


def test_simplified_merges_radial_powers():
    st_ = SectorState(2, 0.0)
    st_.add_term((), (0, 0), (0, 0), 0, np.array([1.0]))
    st_.add_term((), (0, 0), (0, 0), 1, np.array([-1.0]))
    st_.add_term((), (0, 0), (0, 0), 0, np.array([1.0, 1.0]))
    # 1 - (1+z) + (1+z) = 1
    w = np.array([0.2, 0.9j])
    assert evaluate(st_.simplified(), w)[()] == pytest.approx(evaluate(st_, w)[()])
    assert len(st_.simplified().comps[()]) == 1


def test_adding_incompatible_states_raises():
    with pytest.raises(ValueError):
        scalar_state(2, 0.0, [1.0]) + scalar_state(2, 0.5, [1.0])


def test_norm_of_z_matches_analytic_value():
    # [DERIVED] int d^4w (1+t)^{-4} z^2 = pi^2 int t z^2 (1+t)^{-4} dt = pi^2/30
    st_ = scalar_state(2, 0.0, [0.0, 1.0])
    assert norm_sq(st_) == pytest.approx(math.pi**2 / 30, rel=1e-13)
    val, _ = quad(lambda t: math.pi**2 * t * ((1 - t) / (1 + t)) ** 2 / (1 + t) ** 4, 0, np.inf, epsrel=1e-13)
    assert norm_sq(st_) == pytest.approx(val, rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(
    extra=st.floats(0.05, 3.0),
    c=st.lists(st.floats(-2, 2), min_size=1, max_size=4),
    b1=st.integers(0, 2),
    b2=st.integers(0, 2),
)
def test_norm_against_radial_quadrature(extra, c, b1, b2):
    d = 2
    e0 = 0.5 * (b1 + b2) + extra  # keeps the integral convergent at the puncture
    st_ = scalar_state(d, e0, c, b=(b1, b2))
    k = b1 + b2
    ang = math.pi**2 * math.factorial(b1) * math.factorial(b2) / math.factorial(d - 1 + k)
    f = lambda t: ang * t ** (k + d - 1) * abs(np.polyval(c[::-1], (1 - t) / (1 + t))) ** 2 \
        * (2 / (1 + t)) ** (2 * e0) / (1 + t) ** (2 * d)
    val = quad(f, 0, 1, epsabs=0, epsrel=1e-12, limit=200)[0] + quad(f, 1, np.inf, epsabs=0, epsrel=1e-12, limit=200)[0]
    assert norm_sq(st_) == pytest.approx(val, rel=1e-8, abs=1e-14)


def test_divergent_norm_is_infinite():
    # |psi|^2 ~ t^2 against t dt/(1+t)^4 diverges logarithmically
    assert norm_sq(scalar_state(2, -1.0, [1.0])) == math.inf
    assert norm_sq(SectorState(2)) == 0.0
    assert radial_density(SectorState(2)) is None


def test_growth_exponent():
    st_ = scalar_state(2, 0.0, [1.0], b=(1, 0))
    assert growth_exponent(st_, [1.0, 0.5j]) == pytest.approx(0.5, abs=1e-6)
    decaying = scalar_state(2, 2.0, [1.0])
    assert growth_exponent(decaying, [1.0, 0.0]) == pytest.approx(-2.0, abs=1e-6)
