import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudocomp.compressions import (
    SingularPivotError,
    compress,
    hermitian_part,
    numerical_rank,
    schur_complement,
    sigma_k,
    singular_value,
)
from pseudocomp.numrange import numerical_range
from pseudocomp.rand_frames import sample_haar_frame

from conftest import ginibre_like

N = np.array([[0, 2], [0, 0]], dtype=complex)


def test_compress_coordinate():
    Q = np.eye(3)[:, :2]
    assert np.allclose(compress(np.diag([1, 2, 3]), Q), np.diag([1, 2]))


def test_compress_identity(gen):
    Q = sample_haar_frame(6, 3, gen)
    assert np.allclose(compress(np.eye(6), Q), np.eye(3), atol=1e-13)


def test_compression_eigs_in_range(gen):
    A = ginibre_like(gen, 7)
    reg = numerical_range(A, 256)
    for _ in range(10):
        ev = np.linalg.eigvals(compress(A, sample_haar_frame(7, 3, gen)))
        proj = (np.exp(-1j * reg.angles)[None, :] * ev[:, None]).real
        assert np.all(proj <= reg.support + 1e-8)


def test_compress_stack(gen):
    A = ginibre_like(gen, 4)
    Qs = np.stack([sample_haar_frame(4, 2, gen) for _ in range(3)])
    out = compress(A, Qs)
    assert np.allclose(out[1], Qs[1].conj().T @ A @ Qs[1])


def test_schur_identity(gen):
    Q = sample_haar_frame(5, 2, gen)
    assert np.allclose(schur_complement(np.eye(5), Q), np.eye(5) - Q @ Q.conj().T, atol=1e-13)


def test_schur_block_formula(gen):
    A = ginibre_like(gen, 6)
    k = 2
    out = schur_complement(A, np.eye(6)[:, :k])
    A11, A12, A21, A22 = A[:k, :k], A[:k, k:], A[k:, :k], A[k:, k:]
    assert np.allclose(out[k:, k:], A22 - A21 @ np.linalg.solve(A11, A12))
    # annihilates col(Q) on both sides
    assert np.allclose(out[:k, :], 0, atol=1e-12)
    assert np.allclose(out[:, :k], 0, atol=1e-12)


@given(seed=st.integers(0, 2**31), k=st.integers(1, 4))
@settings(max_examples=25, deadline=None)
def test_schur_rank(seed, k):
    g = np.random.default_rng(seed)
    A = ginibre_like(g, 7)
    Q = sample_haar_frame(7, k, g)
    assert numerical_rank(schur_complement(A, Q) - A) <= k


def test_schur_width_zero(gen):
    A = ginibre_like(gen, 4)
    assert np.array_equal(schur_complement(A, np.zeros((4, 0))), A)


def test_schur_singular_pivot():
    A = np.diag([0.0, 1.0, 2.0]).astype(complex)
    with pytest.raises(SingularPivotError):
        schur_complement(A, np.eye(3)[:, :1])


def test_hermitian_part_cases(gen):
    H = ginibre_like(gen, 4)
    H = H + H.conj().T
    assert np.allclose(hermitian_part(H, 0.0), H)
    for th in (0.0, 0.7, 2.0):
        assert np.allclose(np.linalg.eigvalsh(hermitian_part(N, th)), [-1, 1])
    M = ginibre_like(gen, 3)
    th = np.pi / 2
    direct = np.array([[(np.exp(-1j * th) * M[i, j] + np.exp(1j * th) * np.conj(M[j, i])) / 2 for j in range(3)] for i in range(3)])
    assert np.allclose(hermitian_part(M, th), direct)


def test_singular_values():
    D = np.diag([3.0, 1.0, 2.0])
    assert [singular_value(D, k) for k in (1, 2, 3)] == pytest.approx([3, 2, 1])
    assert singular_value(N, 1) == pytest.approx(2)
    assert singular_value(N, 2) == pytest.approx(0, abs=1e-15)
    with pytest.raises(IndexError):
        singular_value(D, 4)
    assert sigma_k(D, 9) == 0.0


@given(seed=st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_weyl_perturbation(seed):
    g = np.random.default_rng(seed)
    M = ginibre_like(g, 5)
    E = 0.1 * ginibre_like(g, 5)
    s1 = np.linalg.svd(M, compute_uv=False)
    s2 = np.linalg.svd(M + E, compute_uv=False)
    assert np.all(np.abs(s1 - s2) <= np.linalg.norm(E, 2) + 1e-12)
