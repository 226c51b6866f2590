import numpy as np
import pytest

from pseudocomp.numrange import (
    bowtie_zero,
    inner_radius,
    minkowski_eps,
    numerical_range,
    polygon_area,
    support_function,
)

N = np.array([[0, 2], [0, 0]], dtype=complex)


def test_support_of_n():
    for th in (0.0, 1.0, 4.0):
        h, z = support_function(N, th)
        assert h == pytest.approx(1.0)
        assert (np.exp(-1j * th) * z).real == pytest.approx(1.0)


def test_disk_area():
    reg = numerical_range(N, 256)
    lo, hi = reg.area_bounds()
    assert lo <= np.pi <= hi
    assert abs(reg.area - np.pi) <= 2e-3
    assert reg.resolution_error == pytest.approx(hi - lo)


def test_resolution_shrinks():
    errs = [numerical_range(N, K).resolution_error for K in (32, 128, 512)]
    assert errs[0] > errs[1] > errs[2]


def test_triangle():
    reg = numerical_range(np.diag([0, 1, 1j]), 512)
    assert reg.area == pytest.approx(0.5, abs=1e-3)
    lo, hi, c = inner_radius(reg)
    assert lo <= (2 - np.sqrt(2)) / 2 + 1e-12
    assert lo == pytest.approx((2 - np.sqrt(2)) / 2, abs=1e-3)
    assert hi >= lo


def test_hermitian_inradius_zero():
    lo, _, _ = inner_radius(numerical_range(np.diag([0.0, 1.0, 3.0])))
    assert lo == 0.0


def test_contains(gen):
    A = gen.normal(size=(5, 5)) + 1j * gen.normal(size=(5, 5))
    reg = numerical_range(A, 128)
    x = gen.normal(size=(200, 5)) + 1j * gen.normal(size=(200, 5))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    vals = np.einsum("ki,ij,kj->k", x.conj(), A, x)
    assert reg.contains(vals, 1e-10).all()
    assert not reg.contains(np.array([100.0 + 0j]))[0]


def test_bowtie_disk_unchanged():
    reg = numerical_range(N, 128)
    assert np.allclose(bowtie_zero(reg).support, reg.support)


def test_bowtie_segment():
    reg = bowtie_zero(numerical_range(np.diag([1.0, 2.0]), 128))
    assert reg.area_bounds()[0] == pytest.approx(0, abs=1e-12)
    lo, hi, _, _ = reg.bbox()
    assert lo == pytest.approx(0, abs=1e-12)
    assert hi == pytest.approx(2)


def test_bowtie_square(gen):
    sq = np.diag([1 + 1j, 2 + 1j, 2 + 2j, 1 + 2j])
    reg = bowtie_zero(numerical_range(sq, 1024))
    shoelace = polygon_area(np.array([0, 2 + 1j, 2 + 2j, 1 + 2j]))
    assert shoelace == pytest.approx(2.0)
    lo, hi = reg.area_bounds()
    assert lo - 1e-9 <= shoelace <= hi + 1e-9
    # rejection sampling oracle on [0,2]^2
    pts = gen.uniform(0, 2, 200_000) + 1j * gen.uniform(0, 2, 200_000)
    frac = reg.contains(pts).mean() * 4
    assert frac == pytest.approx(shoelace, abs=0.03)


def test_minkowski_disk():
    reg = minkowski_eps(numerical_range(N, 64), 0.5)
    assert np.allclose(reg.support, 1.5)


@pytest.mark.parametrize("eps", [0.1, 0.01, 1e-3])
def test_stadium(eps):
    reg = minkowski_eps(numerical_range(np.diag([0.0, 1.0]), 2048), eps)
    lo, hi = reg.area_bounds()
    exact = 2 * eps + np.pi * eps**2
    assert lo <= exact * (1 + 1e-9) and exact <= hi * (1 + 1e-9)
    assert hi - lo <= 1e-3 * exact + 1e-7


def test_minkowski_zero():
    reg = numerical_range(N, 64)
    assert minkowski_eps(reg, 0.0) is reg
