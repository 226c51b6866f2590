import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from pseudocomp.rand_frames import (
    OMEGA,
    RngStream,
    haar_frames,
    haar_unit_vectors,
    haar_unitary,
    polarization_net,
    sample_haar_frame,
    verify_net_inequality,
)

from conftest import ginibre_like


def test_frame_orthonormal():
    Q = sample_haar_frame(5, 3, RngStream(3))
    assert np.linalg.norm(Q.conj().T @ Q - np.eye(3), 2) <= 1e-12


@given(m=st.integers(1, 9), data=st.data())
@settings(max_examples=30, deadline=None)
def test_frames_orthonormal_any_shape(m, data):
    k = data.draw(st.integers(1, m))
    Q = haar_frames(m, k, 4, data.draw(st.integers(0, 2**32)))
    err = np.abs(np.swapaxes(Q.conj(), 1, 2) @ Q - np.eye(k)).max()
    assert err <= 1e-12


def test_k_greater_than_m_rejected():
    with pytest.raises(ValueError):
        haar_frames(3, 4, 1, 0)


def test_width_zero_frame():
    assert haar_frames(4, 0, 2, 0).shape == (2, 4, 0)


def test_stream_reproducible_and_distinct():
    a = RngStream(11, 5).generator().standard_normal(8)
    b = RngStream(11, 5).generator().standard_normal(8)
    c = RngStream(11, 6).generator().standard_normal(8)
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)
    assert RngStream(11, 5).child(2) != RngStream(11, 5).child(3)


def test_distinct_streams_uncorrelated():
    a = RngStream(1, 1).generator().standard_normal(20000)
    b = RngStream(1, 2).generator().standard_normal(20000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / np.sqrt(20000)


def test_coordinate_beta_law():
    n = 6
    q = haar_unit_vectors(n, 100_000, RngStream(4))
    d = stats.kstest(np.abs(q[:, 0]) ** 2, stats.beta(1, n - 1).cdf).statistic
    assert d <= 0.02


def test_unitary_invariance():
    U = haar_unitary(5, RngStream(8))
    Q = haar_frames(5, 2, 10_000, RngStream(9))
    a = np.abs(Q) ** 2
    b = np.abs(U @ Q) ** 2
    se = np.sqrt(a.var(axis=0) / a.shape[0] + b.var(axis=0) / b.shape[0])
    assert np.all(np.abs(a.mean(axis=0) - b.mean(axis=0)) <= 4 * se)


def test_net_sizes():
    assert len(polarization_net(1)) == 1
    assert len(polarization_net(2)) == 8
    net3 = polarization_net(3)
    assert len(net3) == 21
    norms = sorted({round(float(np.linalg.norm(v)), 12) for v in net3})
    assert norms == [1.0, round(np.sqrt(2), 12)]


def test_net_identity():
    r = verify_net_inequality(np.eye(3))
    assert r.lhs == pytest.approx(1.0)
    # pair vectors have norm sqrt(2), so the max form is 2 and rhs = 3 * 2
    assert r.rhs == pytest.approx(6.0)
    assert r.holds


def test_net_rank_one_offdiagonal():
    B = np.zeros((2, 2), dtype=complex)
    B[0, 1] = 1.0
    r = verify_net_inequality(B)
    assert r.lhs == pytest.approx(1.0)
    assert r.holds
    # polarization identity recovers e_2* B e_1 from three quadratic forms
    x, y = np.eye(2)[:, 1], np.eye(2)[:, 0]
    terms = [OMEGA**a * (x + OMEGA**a * y).conj() @ B @ (x + OMEGA**a * y) for a in range(3)]
    assert sum(terms) / 3 == pytest.approx(y.conj() @ B @ x)


def test_net_random_ginibre(gen):
    for _ in range(100):
        assert verify_net_inequality(ginibre_like(gen, 5)).holds
