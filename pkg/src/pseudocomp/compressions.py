"""Dense matrix operations: compressions, Schur complements, Hermitian parts."""

from __future__ import annotations

import numpy as np

RANK_TOL = 1e-10
PIVOT_TOL = 1e-13


class SingularPivotError(ArithmeticError):
    """Q* A Q is numerically singular, so (A/Q) is undefined."""


def as_cmatrix(a, square: bool = False) -> np.ndarray:
    """Validate and convert to a 2-d complex array with finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if square and m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def compress(A, Q) -> np.ndarray:
    """Q* A Q. Works on stacks of frames too (Q of shape (..., n, l))."""
    A = np.asarray(A, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    if A.shape[-1] != Q.shape[-2] or A.shape[-2] != Q.shape[-2]:
        raise ValueError(f"dimension mismatch: A {A.shape}, Q {Q.shape}")
    return np.swapaxes(Q.conj(), -1, -2) @ A @ Q


def schur_complement(A, Q) -> np.ndarray:
    """Generalized Schur complement A - A Q (Q* A Q)^{-1} Q* A.

    A width-0 frame returns A unchanged.
    """
    A = as_cmatrix(A, square=True)
    Q = np.asarray(Q, dtype=complex)
    if Q.ndim != 2 or Q.shape[0] != A.shape[0]:
        raise ValueError(f"dimension mismatch: A {A.shape}, Q {Q.shape}")
    if Q.shape[1] == 0:
        return A.copy()
    pivot = Q.conj().T @ A @ Q
    smin = np.linalg.svd(pivot, compute_uv=False)[-1]
    if smin <= PIVOT_TOL * max(np.linalg.norm(A, 2), np.finfo(float).tiny):
        raise SingularPivotError(f"sigma_min(Q*AQ) = {smin:.3e}")
    return A - (A @ Q) @ np.linalg.solve(pivot, Q.conj().T @ A)


def hermitian_part(M, theta: float = 0.0) -> np.ndarray:
    """H(e^{-i theta} M) = (e^{-i theta} M + e^{i theta} M*) / 2."""
    M = np.asarray(M, dtype=complex)
    rot = np.exp(-1j * theta) * M
    return (rot + np.swapaxes(rot.conj(), -1, -2)) / 2


def hermitian_parts(M, thetas) -> np.ndarray:
    """Stack of H(e^{-i theta} M) over an array of angles."""
    M = as_cmatrix(M, square=True)
    ph = np.exp(-1j * np.asarray(thetas, dtype=float))[:, None, None]
    rot = ph * M[None]
    return (rot + np.swapaxes(rot.conj(), -1, -2)) / 2


def singular_values(M) -> np.ndarray:
    return np.linalg.svd(np.asarray(M, dtype=complex), compute_uv=False)


def singular_value(M, k: int) -> float:
    """k-th largest singular value, 1-indexed.

    Indices past min(nrows, ncols) are an error; use ``sigma_k`` for the
    zero-padded convention.
    """
    M = np.asarray(M, dtype=complex)
    if not 1 <= k <= min(M.shape):
        raise IndexError(f"k={k} out of range for shape {M.shape}")
    return float(singular_values(M)[k - 1])


def sigma_k(M, k: int) -> float:
    """k-th largest singular value, with sigma_k = 0 for k > min(shape)."""
    M = np.asarray(M, dtype=complex)
    if k < 1:
        raise IndexError("k must be >= 1")
    if k > min(M.shape):
        return 0.0
    return float(singular_values(M)[k - 1])


def numerical_rank(M, tol: float = RANK_TOL) -> int:
    s = singular_values(M)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))
