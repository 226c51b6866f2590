"""Numerical measure of a matrix: density, small-ball bounds and the phi witness.

The law of q* M q (q uniform on the complex unit sphere) is recovered from
its one-dimensional projections: the projection on direction theta is the
B-spline law of q* H(e^{-i theta} M) q, and the planar density is the
filtered back-projection

    rho_M(z) = 1/(4 pi) * integral_0^{2 pi} Hilb(rho_theta')(Re(e^{-i theta} z)) d theta,

evaluated with a uniform trapezoid rule in theta and closed-form Hilbert
transforms of the piecewise-polynomial derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.linalg import block_diag, null_space

from .bspline import (
    KNOT_MERGE_RTOL,
    PiecewisePolynomial,
    SplineDensity,
    _pv_local,
    bspline_coeffs,
    spline_density,
    w_functionals_batch,
)
from .compressions import as_cmatrix, hermitian_part, hermitian_parts, sigma_k
from .numrange import ConvexRegion, inner_radius, numerical_range
from .rand_frames import as_generator, haar_frames, haar_unit_vectors
from .stats import clopper_pearson_upper

N_BLOCK = np.array([[0.0, 2.0], [0.0, 0.0]], dtype=complex)
DEFAULT_KTHETA = 512
KNOT_OFFSET = 1e-12


# --------------------------------------------------------------------------
# regularization and projected densities


def regularize(M, eps: float) -> np.ndarray:
    """M (+) eps N (+) eps N with N = [[0, 2], [0, 0]]."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    M = as_cmatrix(M, square=True)
    return block_diag(M, eps * N_BLOCK, eps * N_BLOCK)


def rho_theta(M, theta: float) -> SplineDensity:
    """Density of q* H(e^{-i theta} M) q."""
    M = as_cmatrix(M, square=True)
    if M.shape[0] < 2:
        raise ValueError("need n >= 2")
    return spline_density(np.linalg.eigvalsh(hermitian_part(M, theta)))


def hilbert_spline_derivative(s: SplineDensity, t):
    """Hilbert transform of the density's derivative at t.

    Points sitting on a knot are evaluated at t +- 1e-12 * (support width)
    and averaged.
    """
    if s.spline is None or s.n < 4:
        raise ValueError("need a non-degenerate density with n >= 4 knots")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    dp = s.derivative()
    delta = KNOT_OFFSET * (s.knots[-1] - s.knots[0])
    on_knot = np.min(np.abs(t[:, None] - s.knots[None, :]), axis=1) <= delta
    out = np.empty_like(t)
    out[~on_knot] = dp.hilbert(t[~on_knot])
    if np.any(on_knot):
        tk = t[on_knot]
        out[on_knot] = (dp.hilbert(tk + delta) + dp.hilbert(tk - delta)) / 2
    return out


def _merge_knots_rows(knots):
    t = np.array(knots, dtype=float)
    tol = KNOT_MERGE_RTOL * (t[:, -1] - t[:, 0])
    for j in range(1, t.shape[1]):
        close = t[:, j] - t[:, j - 1] < tol
        t[:, j] = np.where(close, t[:, j - 1], t[:, j])
    return t


@dataclass(frozen=True)
class _ThetaSplines:
    """Derivative splines of rho_theta for every quadrature angle."""

    thetas: np.ndarray
    knots: np.ndarray  # (K, n) ascending
    dcoeffs: np.ndarray  # (K, n-1, n-2) coefficients of rho_theta'
    degenerate: np.ndarray  # (K,) point-mass angles


def _theta_splines(M, K: int) -> _ThetaSplines:
    thetas = 2 * np.pi * np.arange(K) / K
    lam = np.linalg.eigvalsh(hermitian_parts(M, thetas))
    knots = _merge_knots_rows(lam)
    n = knots.shape[1]
    span = knots[:, -1] - knots[:, 0]
    degenerate = span <= 0
    safe = np.where(degenerate, 1.0, span)
    c = bspline_coeffs(knots) * ((n - 1) / safe)[:, None, None]
    h = np.diff(knots, axis=1)
    d = c.shape[-1] - 1
    dc = c[..., 1:] * np.arange(1, d + 1)
    hs = np.where(h > 0, h, 1.0)[..., None]
    dc = np.where(h[..., None] > 0, dc / hs, 0.0)
    return _ThetaSplines(thetas, knots, dc, degenerate)


def _hilbert_rows(ts: _ThetaSplines, rows, t):
    """Hilb(rho_theta')(t) for the given angle rows; t has shape (len(rows), Z)."""
    knots = ts.knots[rows]
    a = knots[:, :-1]
    h = np.diff(knots, axis=1)
    valid = h > 0
    hs = np.where(valid, h, 1.0)
    s = (t[:, :, None] - a[:, None, :]) / hs[:, None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = _pv_local(ts.dcoeffs[rows], s)
    vals = np.where(valid[:, None, :], vals, 0.0)
    with np.errstate(invalid="ignore", over="ignore"):
        return np.sum(vals, axis=-1) / np.pi


def _backprojected(ts: _ThetaSplines, z, chunk_elems: int = 4_000_000):
    """Per-angle integrand Hilb(rho_theta')(Re(e^{-i theta} z)), shape (K, Z), and an outside mask."""
    K, n = ts.knots.shape
    z = np.asarray(z, dtype=complex).ravel()
    t = (np.exp(-1j * ts.thetas)[:, None] * z[None, :]).real
    lo, hi = ts.knots[:, :1], ts.knots[:, -1:]
    outside = np.any((t < lo) | (t > hi), axis=0)
    width = (hi - lo)[:, 0]
    delta = KNOT_OFFSET * np.where(width > 0, width, 1.0)
    out = np.zeros((K, z.size))
    per_row = max(1, (n - 1) * 24 * z.size)
    step = max(1, chunk_elems // per_row)
    for start in range(0, K, step):
        rows = np.arange(start, min(K, start + step))
        tr = t[rows]
        near = (
            np.min(np.abs(tr[:, :, None] - ts.knots[rows][:, None, :]), axis=-1)
            <= delta[rows, None]
        )
        val = _hilbert_rows(ts, rows, tr)
        if np.any(near):
            d = delta[rows, None]
            shifted = (_hilbert_rows(ts, rows, tr + d) + _hilbert_rows(ts, rows, tr - d)) / 2
            val = np.where(near, shifted, val)
        out[rows] = val
    deg_rows = ts.degenerate
    if np.any(deg_rows):
        out[deg_rows] = np.inf
    return out, outside


@dataclass
class DensityField:
    """Density of q* M q sampled on a set of complex points."""

    grid: np.ndarray
    values: np.ndarray
    theta_count: int
    convergence_gap: float
    gaps: np.ndarray
    clipped: int = 0
    min_raw: float = 0.0

    def cell_mass(self, cell_area: float) -> float:
        return float(np.sum(self.values) * cell_area)


def density_field(M, z, K_theta: int = DEFAULT_KTHETA) -> DensityField:
    """rho_M at the points z (any shape), with the K/2 halving gap."""
    M = as_cmatrix(M, square=True)
    if M.shape[0] < 4:
        raise ValueError("the Radon-inversion density needs n >= 4")
    if K_theta < 64 or K_theta % 2:
        raise ValueError("K_theta must be even and >= 64")
    z = np.asarray(z, dtype=complex)
    ts = _theta_splines(M, K_theta)
    integrand, outside = _backprojected(ts, z)
    with np.errstate(invalid="ignore"):
        full = integrand.sum(axis=0) / (2 * K_theta)
        half = integrand[::2].sum(axis=0) / K_theta
    full = np.where(outside, 0.0, np.where(np.isnan(full), np.inf, full))
    half = np.where(outside, 0.0, np.where(np.isnan(half), np.inf, half))
    with np.errstate(invalid="ignore"):
        gaps = np.abs(full - half)
    gaps = np.where(np.isfinite(gaps), gaps, np.inf)
    neg = full < 0
    vals = np.where(neg, 0.0, full)
    return DensityField(
        grid=z,
        values=vals.reshape(z.shape),
        theta_count=K_theta,
        convergence_gap=float(np.max(gaps)) if gaps.size else 0.0,
        gaps=gaps.reshape(z.shape),
        clipped=int(np.sum(neg)),
        min_raw=float(np.min(full)) if full.size else 0.0,
    )


def density(M, z: complex, K_theta: int = DEFAULT_KTHETA) -> tuple[float, float]:
    """(rho_M(z), |rho at K - rho at K/2|)."""
    f = density_field(M, np.array([z]), K_theta)
    return float(f.values[0]), float(f.gaps[0])


def density_grid(M, box, nx: int, ny: int, K_theta: int = DEFAULT_KTHETA):
    """Density at cell centers of an nx x ny grid over box = (x0, x1, y0, y1)."""
    x0, x1, y0, y1 = box
    hx, hy = (x1 - x0) / nx, (y1 - y0) / ny
    xs = x0 + hx * (np.arange(nx) + 0.5)
    ys = y0 + hy * (np.arange(ny) + 0.5)
    Z = xs[None, :] + 1j * ys[:, None]
    return density_field(M, Z, K_theta), hx * hy


def density_sup_bound(M, K_theta: int = DEFAULT_KTHETA) -> float:
    """(n-1)(n-2)(n-3)/(4 pi^2) * integral of log(4e w1/w3) / (w1 w2) d theta."""
    M = as_cmatrix(M, square=True)
    n = M.shape[0]
    if n < 4:
        raise ValueError("need n >= 4")
    w = theta_w_functionals(M, K_theta)
    w1, w2, w3 = w[:, 0], w[:, 1], w[:, 2]
    scale = np.linalg.norm(M, 2)
    if np.any(np.minimum(np.minimum(w1, w2), w3) <= 1e-14 * scale):
        return float("inf")
    integral = (2 * np.pi / K_theta) * np.sum(np.log(4 * np.e * w1 / w3) / (w1 * w2))
    return float((n - 1) * (n - 2) * (n - 3) / (4 * np.pi**2) * integral)


def theta_w_functionals(M, K_theta: int) -> np.ndarray:
    thetas = 2 * np.pi * np.arange(K_theta) / K_theta
    lam = np.linalg.eigvalsh(hermitian_parts(M, thetas))[:, ::-1]
    return w_functionals_batch(lam)


def l1_factor_quadrature(M, K_theta: int = DEFAULT_KTHETA) -> float:
    """Trapezoid value of the integral of d theta / (w1 w2)."""
    w = theta_w_functionals(as_cmatrix(M, square=True), K_theta)
    prod = w[:, 0] * w[:, 1]
    if np.any(prod <= 0):
        return float("inf")
    return float((2 * np.pi / K_theta) * np.sum(1.0 / prod))


def l1_factor_bound(Mp, eps: float, phi: float) -> float:
    """(4 pi + 16 log(12^{1/4} ||M'|| / eps)) / |phi|^{1/2}."""
    if phi == 0:
        return float("inf")
    norm = np.linalg.norm(as_cmatrix(Mp, square=True), 2)
    return float((4 * np.pi + 16 * np.log(12**0.25 * norm / eps)) / np.sqrt(abs(phi)))


# --------------------------------------------------------------------------
# small-ball probabilities


@dataclass
class SmallBallEstimate:
    p_hat: float
    ci_upper: float
    hits: int
    samples: int


def quadratic_form_samples(M, count: int, rng, chunk: int = 50_000) -> np.ndarray:
    """q* M q for ``count`` uniform unit vectors q."""
    M = as_cmatrix(M, square=True)
    gen = as_generator(rng)
    out = np.empty(count, dtype=complex)
    for start in range(0, count, chunk):
        m = min(chunk, count - start)
        q = haar_unit_vectors(M.shape[0], m, gen)
        out[start : start + m] = np.einsum("ki,ij,kj->k", q.conj(), M, q)
    return out


def small_ball_empirical(M, eps: float, z0: complex, N: int, rng, level: float = 0.99):
    """Fraction of uniform unit q with |q* M q - z0| <= eps, with a one-sided CP bound."""
    if N < 100:
        raise ValueError("need N >= 100 samples")
    vals = quadratic_form_samples(M, N, rng)
    hits = int(np.sum(np.abs(vals - z0) <= eps))
    return SmallBallEstimate(hits / N, float(clopper_pearson_upper(hits, N, level)), hits, N)


def small_ball_counts(M, eps_list, z0: complex, N: int, rng):
    """Hit counts for several radii from one shared sample."""
    vals = quadratic_form_samples(M, N, rng)
    d = np.abs(vals - z0)
    return np.array([int(np.sum(d <= e)) for e in eps_list])


def small_ball_bound(M, eps: float, K: int = 256) -> float:
    """eps^2 log^2(4e||M||/eps) * 5.1 (n+3)^3 / (sigma_9(M) inR(W(M))).

    Uses the certified lower estimate of the inner radius; +inf when
    sigma_9 or the inner radius vanishes.
    """
    M = as_cmatrix(M, square=True)
    n = M.shape[0]
    norm = np.linalg.norm(M, 2)
    if not 0 < eps < norm:
        raise ValueError("need 0 < eps < ||M||")
    s9 = sigma_k(M, 9)
    r_lo = inner_radius(numerical_range(M, K))[0]
    if s9 <= 1e-14 * norm or r_lo <= 0:
        return float("inf")
    return float(eps**2 * np.log(4 * np.e * norm / eps) ** 2 * 5.1 * (n + 3) ** 3 / (s9 * r_lo))


# --------------------------------------------------------------------------
# the phi functional and its witness


def phi_2x2(B) -> float:
    """|ad - bc|^2 - |Re(conj(a) d) - |b|^2/2 - |c|^2/2|^2 for B = [[a, b], [c, d]]."""
    B = np.asarray(B, dtype=complex)
    a, b, c, d = B[..., 0, 0], B[..., 0, 1], B[..., 1, 0], B[..., 1, 1]
    beta = (np.conj(a) * d).real - np.abs(b) ** 2 / 2 - np.abs(c) ** 2 / 2
    return np.abs(a * d - b * c) ** 2 - beta**2


def _bloch_solve(C, w):
    """Unit u in C^2 with u* C u = w, if w lies in W(C); also returns |r0|."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    c0 = np.trace(C) / 2
    ls = [np.trace(C @ s) / 2 for s in (sx, sy, sz)]
    L = np.array([[l.real for l in ls], [l.imag for l in ls]])
    rhs = np.array([(w - c0).real, (w - c0).imag])
    r0, *_ = np.linalg.lstsq(L, rhs, rcond=1e-13)
    nr = np.linalg.norm(r0)
    if nr > 1:
        r = r0 / nr
    else:
        _, sv, vt = np.linalg.svd(L)
        nullvec = vt[-1]
        r = r0 + np.sqrt(max(0.0, 1 - nr**2)) * nullvec
    x, y, zc = r
    u1 = np.sqrt(max(0.0, (1 + zc) / 2))
    if u1 > 1e-12:
        u = np.array([u1, (x + 1j * y) / (2 * u1)])
    else:
        u = np.array([0.0, 1.0], dtype=complex)
    return u / np.linalg.norm(u), nr


def _realize_on_span(M, x, y, w):
    """Unit vector in span{x, y} with quadratic form w (w on the segment between their values)."""
    E, R = np.linalg.qr(np.column_stack([x, y]))
    if abs(R[1, 1]) < 1e-12 * abs(R[0, 0]):
        return x
    C = E.conj().T @ M @ E
    u, _ = _bloch_solve(C, w)
    return E @ u


def realize_point(M, w: complex, region: ConvexRegion | None = None, K: int = 256):
    """Unit vector v with v* M v = w for w inside the inner polygon of W(M).

    Walks from one boundary touch point through w to the opposite edge of the
    inner polygon, then solves two 2-d inverse problems exactly on the Bloch
    sphere. Returns (v, residual).
    """
    M = as_cmatrix(M, square=True)
    if region is None or region.vectors is None:
        region = numerical_range(M, K)
    P, X = region.touch, region.vectors
    p1, x1 = P[0], X[0]
    d = w - p1
    if abs(d) <= 1e-14 * max(1.0, abs(w)):
        return x1, float(abs(x1.conj() @ M @ x1 - w))
    best = None
    K = P.size
    for j in range(K):
        a, b = P[j], P[(j + 1) % K]
        e = b - a
        den = (np.conj(d) * e).imag
        if abs(den) < 1e-300:
            continue
        # solve p1 + s d = a + tau e
        s = (np.conj(a - p1) * e).imag / den
        tau = (np.conj(a - p1) * d).imag / den
        if -1e-12 <= tau <= 1 + 1e-12 and s >= 1 - 1e-12 and (best is None or s > best[0]):
            best = (s, j, min(max(tau, 0.0), 1.0))
    if best is None:
        raise ValueError("target point is not inside the inner polygon")
    s, j, tau = best
    a, b = P[j], P[(j + 1) % K]
    q = a + tau * (b - a)
    vq = _realize_on_span(M, X[j], X[(j + 1) % K], q)
    vq_val = vq.conj() @ M @ vq
    v = _realize_on_span(M, x1, vq, p1 + (vq_val - p1) / s)
    v = v / np.linalg.norm(v)
    return v, float(abs(v.conj() @ M @ v - w))


@dataclass
class PhiWitness:
    """A frame U in U~(N, 2) with its Phi(U* M' U) value and the target bound."""

    U: np.ndarray
    phi_value: float
    bound: float
    evaluations: int
    sigma9: float
    inner_radius: float
    phi_max: float = float("-inf")
    notes: list[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return abs(self.phi_value) >= self.bound

    @property
    def shortfall(self) -> float:
        return max(0.0, self.bound - abs(self.phi_value))


def _sphere_points(x6):
    x = x6[..., :3] + 1j * x6[..., 3:]
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def phi_witness(Mp, budget: int = 10_000, rng=0, K: int = 256) -> PhiWitness:
    """Search for U maximizing |Phi(U* M' U)|, starting from the constructive frames.

    Stage 1 follows the inner-radius construction: boundary-realized vectors
    v, v' for two points flanking the Chebyshev center, frames V1 (3 columns)
    and V2 (the complement of v, v', e, M'v, M'v'), and a search over unit x
    in C^3 for U_x = [V2 y, V1 x]. Stage 2 spends the remaining budget on a
    local search over all of U~(N, 2). Any U is a valid lower witness.
    """
    Mp = as_cmatrix(Mp, square=True)
    N = Mp.shape[0]
    if N < 9:
        raise ValueError("need a regularized matrix with n >= 5")
    gen = as_generator(rng)
    region = numerical_range(Mp, K)
    r_lo, _, z0 = inner_radius(region)
    if not r_lo > 0:
        raise ValueError("inner radius of W(M') must be positive")
    s9 = sigma_k(Mp, 9)
    bound = (s9 * r_lo / 4) ** 2
    notes = []

    direction = z0 / abs(z0) if abs(z0) > 1e-14 else 1.0 + 0j
    if abs(z0) <= 1e-14:
        notes.append("chebyshev center at origin; offset direction 1")
    r_use = r_lo * (1 - 1e-9)
    zp = z0 + direction * (1 + 1j) / np.sqrt(2) * r_use
    zm = z0 + direction * (1 - 1j) / np.sqrt(2) * r_use
    v, res_p = realize_point(Mp, zp, region)
    vp, res_m = realize_point(Mp, zm, region)
    if max(res_p, res_m) > 1e-10 * max(1.0, np.linalg.norm(Mp, 2)):
        notes.append(f"point realization residual {max(res_p, res_m):.2e}")

    e = np.zeros(N, dtype=complex)
    e[N - 4] = 1.0  # first coordinate of the first eps N block
    V1, _ = np.linalg.qr(np.column_stack([v, vp, e]))
    span5 = np.column_stack([v, vp, e, Mp @ v, Mp @ vp])
    V2 = null_space(span5.conj().T)
    C2 = V2.conj().T @ Mp @ V2
    ths = 2 * np.pi * np.arange(64) / 64
    _, vecs = np.linalg.eigh(hermitian_parts(C2, ths))
    cand = vecs[..., -1]
    forms = np.abs(np.einsum("ki,ij,kj->k", cand.conj(), C2, cand))
    y = cand[int(np.argmax(forms))]
    col = V2 @ y
    s = y.conj() @ C2 @ y
    urow = col.conj() @ Mp @ V1  # (3,)
    ucol = V1.conj().T @ Mp @ col  # (3,)
    B = V1.conj().T @ Mp @ V1

    evals = 0

    def phi_x(xs):
        nonlocal evals
        xs = np.atleast_2d(xs)
        evals += xs.shape[0]
        b = xs @ urow
        c = xs.conj() @ ucol
        d = np.einsum("ki,ij,kj->k", xs.conj(), B, xs)
        beta = (np.conj(s) * d).real - np.abs(b) ** 2 / 2 - np.abs(c) ** 2 / 2
        return np.abs(s * d - b * c) ** 2 - beta**2

    n_grid = min(max(budget // 5, 64), 4000)
    xg = _sphere_points(gen.standard_normal((n_grid, 6)))
    vals = phi_x(xg)
    best_i = int(np.argmax(np.abs(vals)))
    best_x, best_phi = xg[best_i], float(vals[best_i])
    phi_max = float(np.max(vals))

    def neg_abs(x6):
        return -abs(float(phi_x(_sphere_points(x6))[0]))

    for i in np.argsort(-np.abs(vals))[:3]:
        if evals >= budget * 0.6:
            break
        x0 = np.concatenate([xg[i].real, xg[i].imag])
        res = optimize.minimize(
            neg_abs, x0, method="Nelder-Mead",
            options={"maxfev": int(min(1500, budget * 0.6 - evals)), "xatol": 1e-10, "fatol": 1e-14},
        )
        val = float(phi_x(_sphere_points(res.x))[0])
        phi_max = max(phi_max, val)
        if abs(val) > abs(best_phi):
            best_phi, best_x = val, _sphere_points(res.x)
    U = np.column_stack([col, V1 @ best_x])

    # stage 2: free local search over U~(N, 2)
    def phi_U(u_flat):
        nonlocal evals
        evals += 1
        Z = (u_flat[: 2 * N] + 1j * u_flat[2 * N :]).reshape(N, 2)
        Qf, _ = np.linalg.qr(Z)
        return float(phi_2x2(Qf.conj().T @ Mp @ Qf))

    remaining = budget - evals
    if remaining > 50:
        u0 = np.concatenate([U.ravel().real, U.ravel().imag])
        sign = 1.0 if best_phi >= 0 else -1.0
        res = optimize.minimize(
            lambda u: -sign * phi_U(u), u0, method="Powell",
            options={"maxfev": int(remaining), "xtol": 1e-8, "ftol": 1e-14},
        )
        Z = (res.x[: 2 * N] + 1j * res.x[2 * N :]).reshape(N, 2)
        Qf, _ = np.linalg.qr(Z)
        val = float(phi_2x2(Qf.conj().T @ Mp @ Qf))
        phi_max = max(phi_max, val)
        if abs(val) > abs(best_phi):
            best_phi, U = val, Qf
    final = float(phi_2x2(U.conj().T @ Mp @ U))
    return PhiWitness(U, final, float(bound), evals, float(s9), float(r_lo), phi_max, notes)


# --------------------------------------------------------------------------
# cone segments and the angular integral


class GeometryError(ValueError):
    """Points do not form the required isosceles configuration."""


@dataclass
class ConeResult:
    u: np.ndarray
    value: float
    threshold: float

    @property
    def holds(self) -> bool:
        return self.value >= self.threshold * (1 - 1e-12)


def cone_f(p):
    p = np.asarray(p, dtype=float)
    return p[..., 0] ** 2 + p[..., 1] ** 2 - p[..., 2] ** 2


def cone_segment_check(p1, p2, d: float, tol: float = 1e-9) -> ConeResult:
    """Exact max of |x^2 + y^2 - z^2| along the segment p1 -> p2.

    Requires the (x, y) shadows to be the base of a non-obtuse isosceles
    triangle with apex at the origin and base length d.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    a, b = p1[:2], p2[:2]
    ra, rb = np.linalg.norm(a), np.linalg.norm(b)
    scale = max(ra, rb, 1e-300)
    if abs(ra - rb) > tol * scale:
        raise GeometryError("shadows are not equidistant from the origin")
    if np.dot(a, b) < -tol * scale**2:
        raise GeometryError("apex angle is obtuse")
    if abs(np.linalg.norm(a - b) - d) > tol * max(d, scale):
        raise GeometryError("base length does not match d")
    e = p2 - p1
    # f(p1 + s e) = A s^2 + B s + C
    A = e[0] ** 2 + e[1] ** 2 - e[2] ** 2
    Bc = 2 * (p1[0] * e[0] + p1[1] * e[1] - p1[2] * e[2])
    cands = [0.0, 1.0]
    if A != 0:
        sv = -Bc / (2 * A)
        if 0 < sv < 1:
            cands.append(sv)
    pts = np.array([p1 + s * e for s in cands])
    vals = np.abs(cone_f(pts))
    i = int(np.argmax(vals))
    return ConeResult(pts[i], float(vals[i]), d**2 / 8)


@dataclass
class AppendixIntegral:
    value: float
    bound: float

    @property
    def holds(self) -> bool:
        # the a < |b| branch is attained exactly; allow the quadrature tolerance
        return self.value <= self.bound + 1e-8 * max(1.0, self.bound)


def appendix_integral(a: float, b: float, eps: float, theta0: float = 0.0) -> AppendixIntegral:
    """Integral over [0, pi] of 1/max(eps^2, |b + a cos(2 theta - theta0)|) and its closed-form bound."""
    if a <= 0 or eps <= 0:
        raise ValueError("need a > 0 and eps > 0")

    def g(th):
        return 1.0 / max(eps**2, abs(b + a * np.cos(2 * th - theta0)))

    # kinks where |b + a cos| = eps^2 or = 0
    pts = []
    for level in (eps**2, -(eps**2), 0.0):
        c = (level - b) / a
        if -1 <= c <= 1:
            base = np.arccos(c)
            for phi in (base, -base):
                for k in range(-2, 3):
                    th = (phi + theta0 + 2 * np.pi * k) / 2
                    if 0 < th < np.pi:
                        pts.append(th)
    edges = np.unique(np.concatenate([[0.0, np.pi], pts]))
    value = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 0:
            continue
        v, _ = integrate.quad(g, lo, hi, epsabs=1e-12, epsrel=1e-11, limit=200)
        value += v
    disc = abs(a * a - b * b)
    if disc == 0:
        return AppendixIntegral(value, float("inf"))
    if a < abs(b):
        bound = np.pi / np.sqrt(disc)
    else:
        bound = (4 * np.pi + 16 * np.log(np.sqrt(2) * max(disc**0.25 / eps, 1.0))) / np.sqrt(disc)
    return AppendixIntegral(float(value), float(bound))
