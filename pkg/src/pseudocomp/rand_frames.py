"""Haar sampling on Stiefel manifolds and the polarization net."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OMEGA = np.exp(2j * np.pi / 3)


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream keyed by ``(seed, stream_id)``.

    Backed by a Philox counter-based bit generator, so distinct stream ids
    give independent streams that can be consumed in parallel.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, index: int) -> "RngStream":
        # children live in a disjoint id range so they never collide with siblings
        return RngStream(self.seed, (self.stream_id + 1) * 1_000_003 + index)


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream, a Generator, an int seed or None."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.Philox(rng))


def complex_gaussian(gen: np.random.Generator, shape) -> np.ndarray:
    """Standard complex Gaussians with E|g|^2 = 1."""
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2.0)


def haar_frames(m: int, k: int, count: int, rng) -> np.ndarray:
    """Batch of ``count`` Haar frames, shape ``(count, m, k)``. k = 0 gives empty frames."""
    if not 0 <= k <= m:
        raise ValueError(f"need 0 <= k <= m, got k={k}, m={m}")
    if k == 0:
        return np.zeros((count, m, 0), dtype=complex)
    gen = as_generator(rng)
    g = complex_gaussian(gen, (count, m, k))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    # phase fix: without it QR of a Ginibre matrix is not Haar
    ph = d / np.abs(d)
    return q * ph[:, None, :]


def sample_haar_frame(m: int, k: int, rng) -> np.ndarray:
    """One m x k matrix with orthonormal columns, Haar distributed."""
    return haar_frames(m, k, 1, rng)[0]


def haar_unit_vectors(n: int, count: int, rng) -> np.ndarray:
    """``count`` uniform unit vectors of C^n, shape ``(count, n)``."""
    gen = as_generator(rng)
    g = complex_gaussian(gen, (count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def haar_unitary(n: int, rng) -> np.ndarray:
    return sample_haar_frame(n, n, rng)


def polarization_net(ell: int) -> list[np.ndarray]:
    """The net {e_j} + {e_j + w^a e_k : j != k, a in 0,1,2}, w = exp(2 pi i/3).

    Vectors are returned unnormalized; there are 3 ell^2 - 2 ell of them.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    eye = np.eye(ell, dtype=complex)
    net = [eye[j].copy() for j in range(ell)]
    for j in range(ell):
        for k in range(ell):
            if j == k:
                continue
            for a in range(3):
                net.append(eye[j] + OMEGA**a * eye[k])
    return net


@dataclass
class NetReport:
    lhs: float
    rhs: float
    holds: bool


def verify_net_inequality(B: np.ndarray) -> NetReport:
    """Check ||B|| <= ell * max_{v in net} |v* B v|."""
    B = np.asarray(B, dtype=complex)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("B must be square")
    ell = B.shape[0]
    V = np.array(polarization_net(ell))
    forms = np.einsum("vi,ij,vj->v", V.conj(), B, V)
    lhs = float(np.linalg.norm(B, 2))
    rhs = float(ell * np.max(np.abs(forms)))
    return NetReport(lhs, rhs, lhs <= rhs + 1e-10 * lhs)
