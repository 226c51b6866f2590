"""Numerical range geometry from support-function samples.

A ConvexRegion keeps two polygons bracketing the true convex set: the outer
polygon cut out by the supporting half-planes at K angles, and the inner
polygon spanned by the boundary points those half-planes touch. Every area,
inner radius and diameter is reported from both, so downstream bound checks
can take the conservative side.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linprog

from .compressions import as_cmatrix, hermitian_parts

DEFAULT_ANGLES = 256


def convex_hull(points) -> np.ndarray:
    """Counter-clockwise hull of complex points (monotone chain, collinear dropped)."""
    p = np.unique(np.round(np.asarray(points, dtype=complex).ravel(), 15))
    if p.size <= 2:
        return p
    order = np.lexsort((p.imag, p.real))
    p = p[order]

    def cross(o, a, b):
        return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)

    lower: list[complex] = []
    for z in p:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], z) <= 0:
            lower.pop()
        lower.append(z)
    upper: list[complex] = []
    for z in p[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], z) <= 0:
            upper.pop()
        upper.append(z)
    return np.array(lower[:-1] + upper[:-1])


def polygon_area(vertices) -> float:
    v = np.asarray(vertices, dtype=complex)
    if v.size < 3:
        return 0.0
    x, y = v.real, v.imag
    return float(abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))) / 2)


def polygon_diameter(vertices) -> float:
    v = np.asarray(vertices, dtype=complex)
    if v.size < 2:
        return 0.0
    return float(np.max(np.abs(v[:, None] - v[None, :])))


def _halfplanes_of_polygon(vertices):
    """(normals as complex unit numbers, offsets) for a ccw convex polygon."""
    v = np.asarray(vertices, dtype=complex)
    edges = np.roll(v, -1) - v
    keep = np.abs(edges) > 0
    v, edges = v[keep], edges[keep]
    normals = -1j * edges / np.abs(edges)  # outward for ccw order
    offsets = (np.conj(normals) * v).real
    return normals, offsets


def chebyshev_center(normals, offsets):
    """Largest disk in {z : Re(conj(n_j) z) <= b_j}; returns (radius, center).

    The 3-variable LP is solved with HiGHS.
    """
    normals = np.asarray(normals, dtype=complex)
    offsets = np.asarray(offsets, dtype=float)
    if normals.size < 3:
        return 0.0, complex(np.nan, np.nan)
    A = np.column_stack([normals.real, normals.imag, np.ones(normals.size)])
    res = linprog(
        c=[0.0, 0.0, -1.0],
        A_ub=A,
        b_ub=offsets,
        bounds=[(None, None), (None, None), (0, None)],
        method="highs",
    )
    if res.status != 0:
        return 0.0, complex(np.nan, np.nan)
    x, y, r = res.x
    return float(max(r, 0.0)), complex(x, y)


def support_function(M, theta: float):
    """Support value h(theta) = lambda_max(H(e^{-i theta} M)) and a touch point v* M v."""
    h, touch, _ = _support_batch(as_cmatrix(M, square=True), np.array([theta]))
    return float(h[0]), complex(touch[0])


def _support_batch(M, thetas):
    H = hermitian_parts(M, thetas)
    w, V = np.linalg.eigh(H)
    v = V[..., -1]
    touch = np.einsum("ki,ij,kj->k", v.conj(), M, v)
    return w[:, -1], touch, v


@dataclass(frozen=True)
class ConvexRegion:
    """Planar convex set known through K support samples.

    ``support`` h_j bounds Re(e^{-i theta_j} z) on the set; ``touch`` are
    boundary points attaining it; ``vectors`` (optional) are unit vectors v
    with v* M v = touch.
    """

    angles: np.ndarray
    support: np.ndarray
    touch: np.ndarray
    vectors: np.ndarray | None = None

    @property
    def normals(self) -> np.ndarray:
        return np.exp(1j * self.angles)

    @property
    def outer_polygon(self) -> np.ndarray:
        th, h = self.angles, self.support
        th2, h2 = np.roll(th, -1), np.roll(h, -1)
        det = np.sin(th2 - th)
        x = (h * np.sin(th2) - h2 * np.sin(th)) / det
        y = (h2 * np.cos(th) - h * np.cos(th2)) / det
        return x + 1j * y

    @property
    def inner_polygon(self) -> np.ndarray:
        return convex_hull(self.touch)

    def area_bounds(self) -> tuple[float, float]:
        lo = polygon_area(self.inner_polygon)
        hi = polygon_area(self.outer_polygon)
        return lo, max(hi, lo)

    @property
    def area(self) -> float:
        return self.area_bounds()[1]

    @property
    def resolution_error(self) -> float:
        lo, hi = self.area_bounds()
        return hi - lo

    def diameter_bounds(self) -> tuple[float, float]:
        return polygon_diameter(self.inner_polygon), polygon_diameter(self.outer_polygon)

    def contains(self, z, slack: float = 0.0):
        """Membership in the outer polygon (a superset of the true set)."""
        z = np.asarray(z, dtype=complex)
        proj = (np.exp(-1j * self.angles) * z[..., None]).real
        return np.all(proj <= self.support + slack, axis=-1)

    def bbox(self) -> tuple[float, float, float, float]:
        out = self.outer_polygon
        return out.real.min(), out.real.max(), out.imag.min(), out.imag.max()


def numerical_range(M, K: int = DEFAULT_ANGLES) -> ConvexRegion:
    """Support-function sampling of W(M) at K uniform angles."""
    if K < 8:
        raise ValueError("need K >= 8 angles")
    M = as_cmatrix(M, square=True)
    thetas = 2 * np.pi * np.arange(K) / K
    h, touch, v = _support_batch(M, thetas)
    return ConvexRegion(thetas, h, touch, v)


def inner_radius(region: ConvexRegion) -> tuple[float, float, complex]:
    """Chebyshev radius bracket (lo, hi) and the center of the inner-polygon disk.

    ``hi`` is the inradius of the outer polygon; ``lo`` that of the inner
    polygon, whose disk lies inside the true set.
    """
    r_hi, _ = chebyshev_center(region.normals, region.support)
    inner = region.inner_polygon
    if inner.size < 3:
        return 0.0, r_hi, complex(np.nan, np.nan)
    nrm, off = _halfplanes_of_polygon(inner)
    r_lo, c_lo = chebyshev_center(nrm, off)
    return r_lo, max(r_hi, r_lo), c_lo


def bowtie_zero(region: ConvexRegion) -> ConvexRegion:
    """Convex hull of the region and the origin."""
    h = np.maximum(region.support, 0.0)
    touch = np.where(region.support >= 0, region.touch, 0.0)
    return ConvexRegion(region.angles, h, touch, None)


def minkowski_eps(region: ConvexRegion, eps: float) -> ConvexRegion:
    """Region + closed disk of radius eps."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if eps == 0:
        return region
    return replace(
        region,
        support=region.support + eps,
        touch=region.touch + eps * np.exp(1j * region.angles),
        vectors=None,
    )


def stacked_regions(Ms, K: int = 128) -> list[ConvexRegion]:
    """numerical_range for a stack of small matrices, sharing one batched eigh."""
    Ms = np.asarray(Ms, dtype=complex)
    thetas = 2 * np.pi * np.arange(K) / K
    ph = np.exp(-1j * thetas)[None, :, None, None]
    rot = ph * Ms[:, None]
    H = (rot + np.swapaxes(rot.conj(), -1, -2)) / 2
    w, V = np.linalg.eigh(H)
    v = V[..., -1]
    touch = np.einsum("bki,bij,bkj->bk", v.conj(), Ms, v)
    return [ConvexRegion(thetas, w[b, :, -1], touch[b], v[b]) for b in range(Ms.shape[0])]
