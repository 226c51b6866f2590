import numpy as np
import pytest
from scipy import optimize

from pseudocomp.matrices import ginibre, jordan
from pseudocomp.numrange import numerical_range
from pseudocomp.pseudospectrum import (
    Geometry,
    expected_area_by_probability,
    expected_area_mc,
    in_pseudospectrum,
    shift_growth_check,
    pseudospectrum_area,
    pseudospectrum_grid,
    range_bbox,
    regime_exponent,
    sandwich_holds,
    shifted_min,
    sigma_k_shifted,
    theorem_bounds,
)
from pseudocomp.tail_bounds import BoundConstants


def test_membership():
    Z = np.zeros((3, 3))
    assert in_pseudospectrum(Z, 0.05j, 0.1)
    assert not in_pseudospectrum(Z, 0.2, 0.1)
    assert in_pseudospectrum(jordan(2), 0.0, 1e-9)
    D = np.diag([0, 2, 1j])
    z = np.array([0.3, 1.9 + 0.05j, 1 + 1j])
    dist = np.min(np.abs(z[:, None] - np.diag(D)[None, :]), axis=1)
    assert np.array_equal(in_pseudospectrum(D, z, 0.25), dist <= 0.25)


def test_range_bbox():
    x0, x1, y0, y1 = range_bbox(np.diag([0, 2, 1j]), 0.5)
    assert (x0, x1, y0, y1) == pytest.approx((-0.5, 2.5, -0.5, 1.5))


def test_disk_area():
    eps = 0.1
    lo, hi = pseudospectrum_area(np.array([[0.3 + 0.2j]]), eps, 256)
    assert lo <= np.pi * eps**2 <= hi
    assert hi - lo <= 0.05 * np.pi * eps**2


def test_two_disks():
    eps = 0.1
    lo, hi = pseudospectrum_area(np.diag([0.0, 10.0]), eps, 256, slack_budget=0.01 * eps**2)
    assert lo <= 2 * np.pi * eps**2 <= hi
    assert hi - lo <= 0.01 * eps**2


def test_jordan_radial_oracle():
    eps = 1e-2

    def smin(r):
        return np.linalg.svd(np.array([[r, -1], [0, r]]), compute_uv=False)[-1] - eps

    r_star = optimize.brentq(smin, 0, 1, xtol=1e-15)
    exact = np.pi * r_star**2
    assert exact == pytest.approx(np.pi * (eps + eps**2), rel=1e-10)
    lo, hi = pseudospectrum_area(jordan(2), eps, 128)
    assert lo <= exact <= hi
    assert hi - lo <= 0.03 * exact


def test_grid_properties():
    M = ginibre(4, 0)
    g = pseudospectrum_grid(M, 0.05, 64)
    assert g.area_lo <= g.area_hi
    assert g.slack == pytest.approx(g.boundary_cells * g.boundary_size**2)
    # every eigenvalue is well inside
    assert np.all(in_pseudospectrum(M, np.linalg.eigvals(M), 0.0 + 1e-9))
    with pytest.raises(ValueError):
        pseudospectrum_grid(M, 0.0)
    with pytest.raises(ValueError):
        pseudospectrum_grid(M, 0.1, 32)


def test_monotone_in_eps():
    M = ginibre(3, 1)
    box = range_bbox(M, 0.2)
    a = pseudospectrum_grid(M, 0.1, 64, bbox=box)
    b = pseudospectrum_grid(M, 0.2, 64, bbox=box)
    assert a.area_lo <= b.area_hi


def test_shifted_min_cases():
    sm = shifted_min(np.diag([0.0, 3.0]), 1, tol=1e-6)
    assert sm.s_k == pytest.approx(1.5, abs=1e-5)
    assert sm.z_k == pytest.approx(1.5, abs=1e-2)
    assert sm.s_k - sm.certificate_gap <= 1.5 + 1e-12
    sm = shifted_min(jordan(4), 4)
    assert sm.s_k <= sm.certificate_gap + 1e-3
    H = np.diag([0.0, 1.0, 2.5])
    assert shifted_min(H, 3).s_k <= 1e-3


def test_shifted_min_certificate():
    A = ginibre(6, 2)
    sm = shifted_min(A, 2)
    reg = numerical_range(A, 64)
    x0, x1, y0, y1 = reg.bbox()
    g = np.random.default_rng(0)
    z = g.uniform(x0, x1, 2000) + 1j * g.uniform(y0, y1, 2000)
    assert np.all(sigma_k_shifted(A, 2, z) >= sm.s_k - sm.certificate_gap - 1e-12)


def test_shift_growth():
    A = ginibre(10, 4)
    sm = shifted_min(A, 3)
    assert shift_growth_check(A, 3, sm.z_k, sm)
    x0, x1, y0, y1 = range_bbox(A, 0.1)
    g = np.random.default_rng(1)
    z = g.uniform(x0, x1, 100) + 1j * g.uniform(y0, y1, 100)
    assert shift_growth_check(A, 3, z, sm)
    with pytest.raises(ValueError):
        shift_growth_check(A, 6, 0.0, sm)


def test_expected_area_scalar():
    eps = 0.05
    ea = expected_area_mc(2.0 * np.eye(5), 2, eps, 20, 64, rng=0)
    assert ea.mean_lo <= np.pi * eps**2 <= ea.mean_hi


def test_expected_area_hermitian_sandwich():
    eps = 0.05
    ea = expected_area_mc(np.diag([0.0, 1.0, 2.0, 3.0]), 2, eps, 20, 64, rng=1)
    assert np.all(ea.hi >= np.pi * eps**2)
    assert all(sandwich_holds(lo, hi, eps, 2) for lo, hi in zip(ea.lo, ea.hi))
    with pytest.raises(ValueError):
        expected_area_mc(np.eye(3), 2, eps, 10)


def test_area_estimators_agree():
    A = ginibre(6, 3)
    eps = 0.05
    ea = expected_area_mc(A, 2, eps, 40, 64, rng=2, slack_budget=0.02 * np.pi * eps**2)
    pa = expected_area_by_probability(A, 2, eps, 400_000, 3)
    assert abs(ea.mid - pa.estimate) <= np.hypot(ea.halfwidth, pa.halfwidth)


def test_theorem_bounds_item5_arithmetic():
    A = ginibre(30, 0)
    geo = Geometry(R=2.0, r_lo=0.5, r_hi=0.6, s_ell=0.1, s_ell8=0.05)
    c = BoundConstants(4, 30)
    tb = theorem_bounds(A, 4, 1e-3, c, geo)
    assert tb.c1 == 1728 * 4**3 * 29 / (8 * 9)
    expect = 25 * (c.c2_value * c.c1) ** 0.4 * np.log(30 * 2 / 1e-3) * 2**0.8 * 1e-3**1.2
    assert tb.items[4] == pytest.approx(expect)
    assert all(tb.applicable)


def test_theorem_bounds_degenerate_r():
    A = ginibre(30, 0)
    geo = Geometry(R=2.0, r_lo=0.0, r_hi=0.0, s_ell=0.1, s_ell8=0.05)
    tb = theorem_bounds(A, 4, 1e-3, geometry=geo)
    assert tb.first_order_area == 0.0 and not tb.first_order_area_applicable
    assert tb.items[1] == float("inf") and tb.items[3] == float("inf")
    assert not tb.applicable[1]


def test_theorem_bounds_dimension():
    A = ginibre(12, 0)
    geo = Geometry(R=2.0, r_lo=0.5, r_hi=0.6, s_ell=0.1, s_ell8=0.05)
    tb = theorem_bounds(A, 3, 1e-2, geometry=geo)
    assert not any(tb.applicable)


def test_regime_exponent():
    assert regime_exponent("a") == (6 / 5, 5)
    assert regime_exponent("ab") == (4 / 3, 4)
    assert regime_exponent("ac") == (2.0, 1)
    assert regime_exponent("bc") is None
    with pytest.raises(ValueError):
        regime_exponent("a", n=20, ell=3)
    with pytest.raises(ValueError):
        regime_exponent("ab", geometry=Geometry(1.0, 0.0, 0.0, 0.0, 0.0))
