"""Pseudospectra of compressions: certified areas, shifted minima and area bounds.

Certification rests on one fact: z -> sigma_k(z - M) is 1-Lipschitz. A
square cell of half-diagonal d whose center has sigma_min <= eps - d lies
inside the eps-pseudospectrum, one with sigma_min > eps + d lies outside,
and everything else is refined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .compressions import as_cmatrix, compress, hermitian_parts, sigma_k
from .numrange import ConvexRegion, inner_radius, minkowski_eps, numerical_range
from .rand_frames import as_generator, haar_frames
from .stats import binomial_halfwidth, mean_halfwidth
from .tail_bounds import BoundConstants

LEVEL = 0.99


CHUNK_CELLS = 400_000


def smin_shifted(M, z, chunk: int = 200_000) -> np.ndarray:
    """sigma_min(zI - M) for an array of points z."""
    M = np.asarray(M, dtype=complex)
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    if M.shape == (1, 1):
        return np.abs(flat - M[0, 0]).reshape(z.shape)
    eye = np.eye(M.shape[0])
    out = np.empty(flat.size)
    for s in range(0, flat.size, chunk):
        zz = flat[s : s + chunk]
        out[s : s + zz.size] = np.linalg.svd(zz[:, None, None] * eye - M, compute_uv=False)[:, -1]
    return out.reshape(z.shape)


def sigma_k_shifted(A, k: int, z) -> np.ndarray:
    """sigma_k(zI - A) (k-th largest) for an array of points z."""
    A = np.asarray(A, dtype=complex)
    z = np.asarray(z, dtype=complex).ravel()
    eye = np.eye(A.shape[0])
    return np.linalg.svd(z[:, None, None] * eye - A, compute_uv=False)[:, k - 1]


def in_pseudospectrum(M, z, eps: float):
    """sigma_min(zI - M) <= eps (vectorized over z)."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    M = as_cmatrix(M, square=True)
    res = smin_shifted(M, z) <= eps
    return bool(res) if np.ndim(res) == 0 else res


def range_bbox(M, pad: float = 0.0) -> tuple[float, float, float, float]:
    """Exact bounding box of W(M), grown by ``pad`` on every side."""
    M = as_cmatrix(M, square=True)
    th = np.array([0.0, np.pi / 2, np.pi, 3 * np.pi / 2])
    h = np.linalg.eigvalsh(hermitian_parts(M, th))[:, -1]
    return (-h[2] - pad, h[0] + pad, -h[3] - pad, h[1] + pad)


@dataclass
class PseudospectrumGrid:
    """Certified area interval from an adaptively refined cell grid."""

    bbox: tuple[float, float, float, float]
    base_shape: tuple[int, int]
    depth: int
    area_lo: float
    area_hi: float
    in_cells: int
    boundary_cells: int
    boundary_centers: np.ndarray = field(repr=False)
    boundary_size: float = 0.0
    evaluations: int = 0

    @property
    def slack(self) -> float:
        return self.area_hi - self.area_lo


def pseudospectrum_grid(
    M,
    eps: float,
    resolution: int = 256,
    rtol: float = 0.02,
    slack_budget: float | None = None,
    max_depth: int = 18,
    max_cells: int = 4_000_000,
    bbox=None,
) -> PseudospectrumGrid:
    """Classify cells of a square grid over the bounding box of W(M) + eps.

    Boundary cells are split 2 x 2 until their total area is at most
    ``slack_budget`` (default ``rtol * area_lo``), the depth cap is hit, or
    more than ``max_cells`` boundary cells are held. Children are generated
    and classified in chunks, so memory scales with the boundary only.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if resolution < 64:
        raise ValueError("resolution must be >= 64")
    M = as_cmatrix(M, square=True)
    x0, x1, y0, y1 = bbox if bbox is not None else range_bbox(M, eps)
    span = max(x1 - x0, y1 - y0, 1e-300)
    h = span / resolution
    nx, ny = max(1, math.ceil((x1 - x0) / h)), max(1, math.ceil((y1 - y0) / h))
    xs = x0 + h * (np.arange(nx) + 0.5)
    ys = y0 + h * (np.arange(ny) + 0.5)
    centers = (xs[None, :] + 1j * ys[:, None]).ravel()
    area_in = 0.0
    n_in = 0
    evals = 0
    depth = 0
    offsets = np.array([-1 - 1j, 1 - 1j, -1 + 1j, 1 + 1j]) / 4
    parents, fresh = centers, True
    while True:
        # classify the children of ``parents`` chunk by chunk, keeping boundary cells
        kept = []
        d = h / math.sqrt(2)
        step = max(1, CHUNK_CELLS // (1 if fresh else 4))
        for start in range(0, parents.size, step):
            part = parents[start : start + step]
            cells = part if fresh else (part[:, None] + 2 * h * offsets[None, :]).ravel()
            s = smin_shifted(M, cells)
            evals += cells.size
            inside = s <= eps - d
            n_in += int(inside.sum())
            area_in += inside.sum() * h * h
            kept.append(cells[~inside & (s <= eps + d)])
        centers = np.concatenate(kept) if kept else np.empty(0, dtype=complex)
        fresh = False
        bnd_area = centers.size * h * h
        budget = slack_budget if slack_budget is not None else rtol * area_in
        if bnd_area <= budget or depth >= max_depth or centers.size > max_cells:
            break
        parents = centers
        h /= 2
        depth += 1
    return PseudospectrumGrid(
        (x0, x1, y0, y1), (ny, nx), depth, float(area_in), float(area_in + bnd_area),
        n_in, int(centers.size), centers, h, evals,
    )


def pseudospectrum_area(M, eps: float, resolution: int = 256, **kw) -> tuple[float, float]:
    """Certified (area_lo, area_hi) of the eps-pseudospectrum of M."""
    g = pseudospectrum_grid(M, eps, resolution, **kw)
    return g.area_lo, g.area_hi


# --------------------------------------------------------------------------
# shifted singular-value minima


@dataclass
class ShiftMinimum:
    k: int
    z_k: complex
    s_k: float
    certificate_gap: float
    evaluations: int = 0


def shifted_min(A, k: int, region: ConvexRegion | None = None, tol: float | None = None, max_iter: int = 40, max_active: int = 20_000) -> ShiftMinimum:
    """Global min over z of sigma_k(z - A) by Lipschitz branch and bound.

    The search box is the bounding box of ``region`` (default W(A)) grown by
    twice a coarse estimate of s_k. ``certificate_gap`` is the incumbent
    minus the smallest lower bound over all leaves. The default ``tol`` is
    1e-4 ||A||; smooth minima cost about 1/tol evaluations.
    """
    A = as_cmatrix(A, square=True)
    n = A.shape[0]
    if tol is None:
        tol = 1e-4 * max(np.linalg.norm(A, 2), 1e-300)
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if region is None:
        region = numerical_range(A, 128)
    x0, x1, y0, y1 = region.bbox()
    # coarse pass for the margin
    g = 24
    h = max(x1 - x0, y1 - y0, 1e-12) / g
    xs = x0 + h * (np.arange(g) + 0.5)
    ys = y0 + h * (np.arange(g) + 0.5)
    coarse = (xs[None, :] + 1j * ys[:, None]).ravel()
    margin = 2 * float(np.min(sigma_k_shifted(A, k, coarse)))
    x0, x1, y0, y1 = x0 - margin, x1 + margin, y0 - margin, y1 + margin
    h = max(x1 - x0, y1 - y0, 1e-12) / g
    xs = x0 + h * (np.arange(g) + 0.5)
    ys = y0 + h * (np.arange(g) + 0.5)
    cells = (xs[None, :] + 1j * ys[:, None]).ravel()
    best_val, best_z = np.inf, 0j
    leaf_lb = np.inf
    evals = coarse.size
    offsets = np.array([-1 - 1j, 1 - 1j, -1 + 1j, 1 + 1j]) / 4
    for _ in range(max_iter):
        vals = sigma_k_shifted(A, k, cells)
        evals += cells.size
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_z = float(vals[i]), complex(cells[i])
        lb = vals - h / math.sqrt(2)
        keep = lb < best_val - tol
        if np.any(~keep):
            leaf_lb = min(leaf_lb, float(lb[~keep].min()))
        cells, lb = cells[keep], lb[keep]
        if cells.size == 0:
            break
        if cells.size > max_active:
            order = np.argsort(lb)
            leaf_lb = min(leaf_lb, float(lb[order[max_active:]].min()))
            cells = cells[order[:max_active]]
        cells = (cells[:, None] + h * offsets[None, :]).ravel()
        h /= 2
    else:
        leaf_lb = min(leaf_lb, float(np.min(sigma_k_shifted(A, k, cells))) - h / math.sqrt(2))
    gap = max(0.0, best_val - min(leaf_lb, best_val))
    return ShiftMinimum(k, best_z, best_val, gap, evals)


def shift_growth_check(A, k: int, z, sm: ShiftMinimum | None = None) -> bool:
    """sigma_k(z - A) >= max(s_k, |z - z_k|/2), with the certificate gap as slack."""
    A = as_cmatrix(A, square=True)
    n = A.shape[0]
    if k > (n + 1) / 2:
        raise ValueError("need k <= (n + 1)/2")
    if sm is None:
        sm = shifted_min(A, k)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    lhs = sigma_k_shifted(A, k, z)
    gap = sm.certificate_gap
    rhs = np.maximum(sm.s_k - gap, (np.abs(z - sm.z_k) - gap) / 2)
    return bool(np.all(lhs >= rhs - 1e-12 * max(1.0, np.linalg.norm(A, 2))))


# --------------------------------------------------------------------------
# expected area of random compressions


@dataclass
class ExpectedArea:
    mean_lo: float
    mean_hi: float
    ci: float
    lo: np.ndarray = field(repr=False)
    hi: np.ndarray = field(repr=False)

    @property
    def samples(self) -> int:
        return int(self.lo.size)

    @property
    def mid(self) -> float:
        return (self.mean_lo + self.mean_hi) / 2

    @property
    def halfwidth(self) -> float:
        """CI half width widened by half the mean certification slack."""
        return self.ci + (self.mean_hi - self.mean_lo) / 2


def compression_areas(A, ell: int, eps: float, N: int, rng, resolution: int = 64, **kw):
    """Certified (lo, hi) areas of Lambda_eps(Q*AQ) for N Haar frames."""
    A = as_cmatrix(A, square=True)
    gen = as_generator(rng)
    Qs = haar_frames(A.shape[0], ell, N, gen)
    lo, hi = np.empty(N), np.empty(N)
    for i, C in enumerate(compress(A, Qs)):
        g = pseudospectrum_grid(C, eps, resolution, **kw)
        lo[i], hi[i] = g.area_lo, g.area_hi
    return lo, hi


def expected_area_mc(A, ell: int, eps: float, N: int, resolution: int = 64, rng=0, **kw) -> ExpectedArea:
    """Mean certified area over N frames; ``ci`` is the 99% t half width of the upper areas."""
    if N < 20:
        raise ValueError("need N >= 20 frames")
    lo, hi = compression_areas(A, ell, eps, N, rng, resolution, **kw)
    return ExpectedArea(float(lo.mean()), float(hi.mean()), mean_halfwidth(hi, LEVEL), lo, hi)


@dataclass
class ProbabilityArea:
    """Area of the sampling box times the hit rate of (z, Q) pairs."""

    estimate: float
    halfwidth: float
    hits: int
    samples: int
    box_area: float


def expected_area_by_probability(A, ell: int, eps: float, N: int, rng, chunk: int = 100_000) -> ProbabilityArea:
    """Integral over Omega of Pr(sigma_min(Q*(z - A)Q) <= eps), by joint sampling of z and Q.

    z is uniform on the bounding box of W(A) + eps, which contains every
    pseudospectrum of a compression.
    """
    A = as_cmatrix(A, square=True)
    n = A.shape[0]
    gen = as_generator(rng)
    x0, x1, y0, y1 = range_bbox(A, eps)
    box = (x1 - x0) * (y1 - y0)
    hits = 0
    eye = np.eye(ell)
    for s in range(0, N, chunk):
        m = min(chunk, N - s)
        z = gen.uniform(x0, x1, m) + 1j * gen.uniform(y0, y1, m)
        C = compress(A, haar_frames(n, ell, m, gen))
        sv = np.linalg.svd(z[:, None, None] * eye - C, compute_uv=False)[:, -1]
        hits += int(np.sum(sv <= eps))
    return ProbabilityArea(box * hits / N, box * binomial_halfwidth(hits, N, LEVEL), hits, N, box)


def sandwich_holds(area_lo: float, area_hi: float, eps: float, ell: int) -> bool:
    """pi eps^2 <= area <= pi eps^(2/ell), allowing the certification slack on both sides."""
    slack = area_hi - area_lo
    return area_lo + slack >= math.pi * eps**2 and area_hi - slack <= math.pi * eps ** (2 / ell)


# --------------------------------------------------------------------------
# closed-form area bounds


@dataclass
class Geometry:
    """Geometry of Omega = W(A) + eps and the shifted minima s_ell, s_{ell+8}."""

    R: float
    r_lo: float
    r_hi: float
    s_ell: float
    s_ell8: float

    @classmethod
    def of(cls, A, ell: int, eps: float, K: int = 256, tol: float | None = None) -> "Geometry":
        A = as_cmatrix(A, square=True)
        n = A.shape[0]
        region = numerical_range(A, K)
        omega = minkowski_eps(region, eps)
        R = omega.diameter_bounds()[1]
        r_lo, r_hi, _ = inner_radius(omega)
        s_l = shifted_min(A, ell, region, tol)
        s_l = max(0.0, s_l.s_k - s_l.certificate_gap)
        if ell + 8 <= n:
            s8 = shifted_min(A, ell + 8, region, tol)
            s8 = max(0.0, s8.s_k - s8.certificate_gap)
        else:
            s8 = 0.0
        return cls(R, r_lo, r_hi, s_l, s8)


@dataclass
class TheoremBounds:
    items: list[float]
    first_order_area: float
    applicable: list[bool]
    first_order_area_applicable: bool
    geometry: Geometry
    ell: int
    eps: float
    c1: float
    c2: float
    c3: float

    def min_applicable(self) -> float:
        vals = [v for v, ok in zip(self.items, self.applicable) if ok]
        if self.first_order_area_applicable:
            vals.append(self.first_order_area)
        return min(vals) if vals else float("inf")


def _usable(v: float) -> bool:
    return bool(np.isfinite(v) and v > 0)


def theorem_bounds(A, ell: int, eps: float, consts: BoundConstants | None = None, geometry: Geometry | None = None) -> TheoremBounds:
    """The five expected-area bounds and the first-order (r eps) bound, evaluated verbatim.

    A bound counts as applicable when it is finite, positive and its
    dimension condition holds (ell <= n/2 - 7.5 for the five items).
    """
    A = as_cmatrix(A, square=True)
    n = A.shape[0]
    consts = consts or BoundConstants(ell, n)
    g = geometry or Geometry.of(A, ell, eps)
    c1, c2, c3 = consts.c1, consts.c2_value, consts.c3_value
    R, s8 = g.R, g.s_ell8
    inf = float("inf")
    with np.errstate(divide="ignore", invalid="ignore"):
        if s8 > 0:
            L12 = np.log(c3 * 2 * np.e * R**2 / (eps * s8)) ** 2
            b1 = 4 * np.pi * c2 * L12 * R**2 / s8**2 * eps**2
            b2 = 4 * np.pi * c2 * L12 * R**2 / (s8 * g.r_lo) * eps**2 if g.r_lo > 0 else inf
        else:
            b1 = b2 = inf

        def L34(r):
            return np.log(c3 * 2 * np.e * R ** (4 / 3) * r ** (1 / 3) / (c2 ** (1 / 3) * eps ** (5 / 3))) ** 2

        b3 = 4 * np.pi * c2 ** (1 / 3) * L34(g.r_hi) * (R * g.r_hi) ** (2 / 3) * eps ** (2 / 3) if g.r_hi > 0 else inf
        b4 = 4 * np.pi * c2 ** (2 / 3) * L34(g.r_lo) * R ** (4 / 3) / g.r_lo ** (2 / 3) * eps ** (4 / 3) if g.r_lo > 0 else inf
        b5 = 25 * (c2 * c1) ** 0.4 * np.log(n * R / eps) * R**0.8 * eps**1.2
        lem = 2 * np.pi * c1 * np.log(np.e * R / max(c1 * eps, g.r_hi, g.s_ell)) * g.r_hi * eps
    items = [float(b) for b in (b1, b2, b3, b4, b5)]
    dim_ok = ell <= n / 2 - 7.5
    applicable = [dim_ok and _usable(b) for b in items]
    return TheoremBounds(items, float(lem), applicable, _usable(lem), g, ell, eps, c1, c2, c3)


_REGIMES = {
    frozenset("a"): (6 / 5, 5),
    frozenset("ab"): (4 / 3, 4),
    frozenset("ac"): (2.0, 1),
    frozenset("abc"): (2.0, 1),
}


def regime_exponent(flags, geometry: Geometry | None = None, n: int | None = None, ell: int | None = None):
    """Exponent beta of eps and the bound item realizing it, or None without assumption (a)."""
    flags = frozenset(f.strip() for f in flags if f.strip())
    if not flags <= set("abc"):
        raise ValueError(f"unknown flags {sorted(flags - set('abc'))}")
    if n is not None and ell is not None and ell > n / 2 - 8:
        raise ValueError("needs ell <= n/2 - 8")
    if geometry is not None:
        if "a" in flags and not np.isfinite(geometry.R):
            raise ValueError("flag a needs a finite diameter")
        if "b" in flags and not geometry.r_lo > 0:
            raise ValueError("flag b needs a positive inner radius")
        if "c" in flags and not geometry.s_ell8 > 0:
            raise ValueError("flag c needs s_{ell+8} > 0")
    if "a" not in flags:
        return None
    return _REGIMES[flags]
