import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from pseudocomp.bspline import (
    bspline_build,
    bspline_derivative,
    concavity_floor,
    hermitian_form_density,
    merge_knots,
    spline_density,
    w_functionals,
    w_functionals_batch,
)
from pseudocomp.rand_frames import RngStream, haar_unit_vectors

knot_vectors = st.lists(
    st.floats(-5, 5, allow_nan=False, allow_infinity=False), min_size=3, max_size=12
).map(sorted).filter(lambda t: t[-1] - t[0] > 1e-3)


def test_indicator():
    B = bspline_build([0, 1])
    assert B(0.5) == 1.0
    assert B(1.5) == 0.0


def test_hat():
    B = bspline_build([0, 1, 2])
    assert B(0.5) == pytest.approx(0.5)
    assert B(1.0) == pytest.approx(1.0)


def test_cubic_knots_integral():
    assert bspline_build([0, 1, 2, 3]).integral() == pytest.approx(1.0, abs=1e-14)


def test_unsorted_knots_rejected():
    with pytest.raises(ValueError):
        bspline_build([0, 2, 1])


def test_hat_derivative():
    d = bspline_derivative([0, 1, 2])
    assert d(np.array([0.25, 0.75])) == pytest.approx([1, 1])
    assert d(np.array([1.25, 1.75])) == pytest.approx([-1, -1])


def test_symmetric_derivative_zero():
    assert bspline_derivative([0, 1, 2, 3])(1.5) == pytest.approx(0, abs=1e-14)


def test_derivative_needs_three_knots():
    with pytest.raises(ValueError):
        bspline_derivative([0, 1])


@given(t=knot_vectors, seed=st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_recursive_derivative_matches_piecewise(t, seed):
    t = merge_knots(t)
    x = np.random.default_rng(seed).uniform(t[0], t[-1], 100)
    rec = bspline_derivative(t)(x)
    direct = bspline_build(t).derivative()(x)
    assert np.max(np.abs(rec - direct)) <= 1e-10 * max(1.0, np.max(np.abs(direct)))


@given(t=knot_vectors)
@settings(max_examples=40, deadline=None)
def test_bounds_and_integral(t):
    B = bspline_build(t)
    t = B.breaks
    x = np.linspace(t[0] - 1, t[-1] + 1, 10_000)
    v = B(x)
    assert v.min() >= -1e-12
    assert v.max() <= 1 + 1e-12
    assert B.integral() == pytest.approx((t[-1] - t[0]) / (t.size - 1), rel=1e-10)


def test_integral_against_quadrature():
    B = bspline_build([0.0, 0.3, 0.3, 1.7, 2.0])
    val, _ = integrate.quad(lambda s: float(B(s)), 0, 2, points=[0.3, 1.7], epsabs=1e-13)
    assert B.integral() == pytest.approx(val, abs=1e-10)


def test_uniform_form_law():
    d = hermitian_form_density([0.0, 1.0])
    assert d.pdf(np.array([0.1, 0.5, 0.9])) == pytest.approx([1, 1, 1])
    q = haar_unit_vectors(2, 100_000, RngStream(12))
    x = np.abs(q[:, 1]) ** 2
    assert stats.kstest(x, "uniform").statistic <= 0.02


def test_point_mass():
    d = hermitian_form_density([2.0, 2.0, 2.0])
    assert d.point_mass == 2.0
    assert d.cdf(1.9) == 0.0 and d.cdf(2.0) == 1.0


def test_three_eig_density():
    assert hermitian_form_density([0.0, 1.0, 2.0], 1.0) == pytest.approx(1.0)


def test_cdf_matches_monte_carlo():
    eigs = np.array([-1.0, 0.2, 0.5, 3.0])
    d = spline_density(eigs)
    q = haar_unit_vectors(4, 50_000, RngStream(3))
    x = (np.abs(q) ** 2) @ eigs
    assert stats.kstest(x, lambda s: d.cdf(s)).statistic <= 0.02


def test_w_functionals_examples():
    assert w_functionals([0, 1, 2, 3]) == pytest.approx((3, 1, 1))
    w1, w2, _ = w_functionals([0, 0, 0, 1])
    assert (w1, w2) == (1.0, 0.0)
    with pytest.raises(ValueError):
        w_functionals([0, 1, 2])


@given(seed=st.integers(0, 2**31), c=st.floats(-10, 10))
@settings(max_examples=30, deadline=None)
def test_w_shift_invariant(seed, c):
    eigs = np.random.default_rng(seed).normal(size=6)
    assert w_functionals(eigs + c) == pytest.approx(w_functionals(eigs), abs=1e-9)
    batch = w_functionals_batch(np.sort(eigs)[::-1][None])[0]
    assert batch == pytest.approx(w_functionals(eigs))


def test_concavity_floor_example():
    # 3*2*1 / (3*1*1) = 2
    assert concavity_floor([0, 1, 2, 3]) == pytest.approx(-2)
    rho2 = spline_density([0, 1, 2, 3]).derivative(2)
    x = np.linspace(1.0001, 1.9999, 2001)
    assert rho2(x).min() >= -2 - 1e-12
    # the uniform cubic attains it on the middle piece
    assert rho2(1.5) == pytest.approx(-2)
    assert concavity_floor([0, 0, 0, 1]) == float("-inf")


@given(seed=st.integers(0, 2**31), c=st.floats(0.1, 10))
@settings(max_examples=30, deadline=None)
def test_concavity_floor_scaling_and_bound(seed, c):
    eigs = np.sort(np.random.default_rng(seed).normal(size=7))
    assert concavity_floor(c * eigs) == pytest.approx(concavity_floor(eigs) / c**3)
    rho2 = spline_density(eigs).derivative(2)
    x = np.linspace(eigs[0], eigs[-1], 4001)
    assert rho2(x).min() >= concavity_floor(eigs) - 1e-9
    outside = x[(x < eigs[1]) | (x > eigs[-2])]
    assert rho2(outside).min() >= -1e-9
