"""B-splines as exact piecewise polynomials, and Hermitian quadratic-form densities.

A spline on knots ``t_1 <= ... <= t_n`` is stored on the knot intervals
themselves. On interval ``[t_j, t_{j+1}]`` the polynomial is held in the local
variable ``u = (t - t_j) / (t_{j+1} - t_j)`` in [0, 1]; zero-length intervals
carry zero coefficients. Keeping ``|u| <= 1`` keeps coefficient arithmetic well
conditioned up to the degrees used here (n <= ~20).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KNOT_MERGE_RTOL = 1e-12

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)
_GL_X = (_GL_X + 1) / 2
_GL_W = _GL_W / 2


def merge_knots(knots, rtol: float = KNOT_MERGE_RTOL) -> np.ndarray:
    """Snap knots closer than ``rtol * (t_n - t_1)`` onto their left neighbour."""
    t = np.array(knots, dtype=float)
    if t.ndim != 1:
        raise ValueError("knots must be 1-d")
    if np.any(np.diff(t) < 0):
        raise ValueError("knots must be weakly increasing")
    span = t[-1] - t[0]
    if span <= 0:
        return t
    tol = rtol * span
    for j in range(1, t.size):
        if t[j] - t[j - 1] < tol:
            t[j] = t[j - 1]
    return t


def bspline_coeffs(knots) -> np.ndarray:
    """Local power-basis coefficients of B[t_1..t_n] on each knot interval.

    Vectorized over leading axes: ``knots`` of shape (..., n) gives an array
    of shape (..., n-1, n-1) indexed (interval, power of u). Runs the
    de Boor-Cox recursion directly on polynomial coefficients; terms whose
    knot span vanishes are dropped, which realizes the repeated-knot limit.
    """
    t = np.asarray(knots, dtype=float)
    n = t.shape[-1]
    if n < 2:
        raise ValueError("need at least 2 knots")
    m = n - 1
    h = t[..., 1:] - t[..., :-1]
    P = np.zeros(t.shape[:-1] + (m, m, n - 1))
    idx = np.arange(m)
    P[..., idx, idx, 0] = h > 0
    tm = t[..., None, :-1]
    hm = h[..., None, :]
    for k in range(2, n):
        cnt = n - k
        i = np.arange(cnt)
        D1 = t[..., i + k - 1] - t[..., i]
        D2 = t[..., i + k] - t[..., i + 1]
        with np.errstate(divide="ignore"):
            inv1 = np.where(D1 > 0, 1.0 / D1, 0.0)[..., None]
            inv2 = np.where(D2 > 0, 1.0 / D2, 0.0)[..., None]
        a0 = (tm - t[..., i, None]) * inv1
        a1 = hm * inv1
        b0 = (t[..., i + k, None] - tm) * inv2
        b1 = -hm * inv2
        L = P[..., :cnt, :, :]
        R = P[..., 1 : cnt + 1, :, :]
        new = a0[..., None] * L + b0[..., None] * R
        new[..., 1:] += a1[..., None] * L[..., :-1] + b1[..., None] * R[..., :-1]
        P = new
    return P[..., 0, :, :]


def _horner(c, u):
    """Evaluate sum_k c[..., k] u^k with broadcasting over leading axes."""
    out = np.zeros(np.broadcast_shapes(c.shape[:-1], np.shape(u)))
    for k in range(c.shape[-1] - 1, -1, -1):
        out = out * u + c[..., k]
    return out


def _pv_local(c, s):
    """p.v. integral over u in [0,1] of p(u)/(s-u), p given by coeffs c.

    c has shape (..., P, d+1) and s shape (..., T, P); returns (..., T, P).
    Closed form near the piece, 24-point Gauss-Legendre when s is farther
    than one piece length away (the integrand is then analytic).
    """
    d = c.shape[-1] - 1
    cc = c[..., None, :, :]
    near = (s >= -1.0) & (s <= 2.0)
    s_near = np.where(near, s, 0.5)
    # e_m = sum_{k>m} c_k / (k - m)
    e = np.zeros(c.shape[:-1] + (max(d, 1),))
    for mm in range(d):
        ks = np.arange(mm + 1, d + 1)
        e[..., mm] = np.sum(c[..., ks] / (ks - mm), axis=-1)
    poly_part = _horner(e[..., None, :, :], s_near) if d > 0 else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        logt = np.log(np.abs(s_near / (s_near - 1.0)))
        # exactly on a knot this is 0 * inf; callers offset such points
        closed = _horner(cc, s_near) * logt - poly_part
    s_far = np.where(near, 5.0, s)[..., None]
    vals = _horner(c[..., None, :], _GL_X)  # (..., P, G)
    far = np.sum(_GL_W * vals[..., None, :, :] / (s_far - _GL_X), axis=-1)
    return np.where(near, closed, far)


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Piecewise polynomial on ``breaks``; zero outside [breaks[0], breaks[-1]]."""

    breaks: np.ndarray
    coeffs: np.ndarray

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breaks)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[-1] - 1

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        j = np.searchsorted(self.breaks, t, side="right") - 1
        inside = (j >= 0) & (j < len(self.widths))
        jj = np.clip(j, 0, len(self.widths) - 1)
        h = self.widths[jj]
        u = np.where(h > 0, (t - self.breaks[jj]) / np.where(h > 0, h, 1.0), 0.0)
        return jj, u, inside

    def __call__(self, t):
        jj, u, inside = self._locate(t)
        val = _horner(self.coeffs[jj], u)
        return np.where(inside, val, 0.0)

    def derivative(self, order: int = 1) -> "PiecewisePolynomial":
        c = self.coeffs
        h = self.widths
        for _ in range(order):
            d = c.shape[-1] - 1
            if d == 0:
                c = np.zeros_like(c)
                continue
            dc = c[:, 1:] * np.arange(1, d + 1)
            with np.errstate(divide="ignore", invalid="ignore"):
                dc = np.where(h[:, None] > 0, dc / np.where(h > 0, h, 1.0)[:, None], 0.0)
            c = np.concatenate([dc, np.zeros((c.shape[0], 1))], axis=1)
        return PiecewisePolynomial(self.breaks, c)

    def piece_integrals(self) -> np.ndarray:
        k = np.arange(self.coeffs.shape[-1])
        return self.widths * np.sum(self.coeffs / (k + 1), axis=-1)

    def integral(self) -> float:
        return float(np.sum(self.piece_integrals()))

    def antiderivative_at(self, t):
        """Integral from breaks[0] to t (constant past the last break)."""
        t = np.asarray(t, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.piece_integrals())])
        jj, u, inside = self._locate(t)
        k = np.arange(self.coeffs.shape[-1])
        anti = np.concatenate(
            [np.zeros((self.coeffs.shape[0], 1)), self.coeffs / (k + 1)], axis=1
        )
        partial = self.widths[jj] * _horner(anti[jj], u)
        val = cum[jj] + partial
        return np.where(t < self.breaks[0], 0.0, np.where(inside, val, cum[-1]))

    def hilbert(self, t):
        """(1/pi) p.v. integral of p(tau) / (t - tau) d tau, in closed form per piece.

        ``t`` must not sit on a break where the function jumps; callers
        evaluate at a small offset on either side in that case.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        keep = self.widths > 0
        a = self.breaks[:-1][keep]
        h = self.widths[keep]
        s = (t[:, None] - a[None, :]) / h[None, :]
        vals = _pv_local(self.coeffs[keep], s)
        return np.sum(vals, axis=-1) / np.pi

    def max_abs_on_grid(self, num: int = 2001) -> float:
        g = np.linspace(self.breaks[0], self.breaks[-1], num)
        return float(np.max(np.abs(self(g))))


def bspline_build(knots) -> PiecewisePolynomial:
    """B[t_1, ..., t_n] with the max-one normalization (0 <= B <= 1)."""
    t = merge_knots(knots)
    if t.size < 2:
        raise ValueError("need at least 2 knots")
    return PiecewisePolynomial(t, bspline_coeffs(t))


def bspline_derivative(knots) -> PiecewisePolynomial:
    """d/dt B[t_1..t_n] as the recursive combination of the two lower splines.

    (n-2) * ( B[t_1..t_{n-1}] / (t_{n-1}-t_1) - B[t_2..t_n] / (t_n-t_2) ),
    a term being dropped when its knot span is zero.
    """
    t = merge_knots(knots)
    n = t.size
    if n < 3:
        raise ValueError("derivative recursion needs at least 3 knots")
    left = bspline_coeffs(t[:-1])
    right = bspline_coeffs(t[1:])
    deg = n - 2
    c = np.zeros((n - 1, deg + 1))
    dl, dr = t[-2] - t[0], t[-1] - t[1]
    if dl > 0:
        c[:-1, : left.shape[1]] += left / dl
    if dr > 0:
        c[1:, : right.shape[1]] += -right / dr
    return PiecewisePolynomial(t, (n - 2) * c)


@dataclass(frozen=True)
class SplineDensity:
    """Density of a Dirichlet(1,...,1) combination of the knots.

    ``spline`` is B[t_1..t_n]; the density is ``normalization * B``. When all
    knots coincide the law is a point mass and ``point_mass`` holds its location.
    """

    knots: np.ndarray
    spline: PiecewisePolynomial | None
    normalization: float
    point_mass: float | None = None

    @property
    def n(self) -> int:
        return self.knots.size

    @property
    def support(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def pdf(self, t):
        if self.spline is None:
            return np.zeros_like(np.asarray(t, dtype=float))
        return self.normalization * self.spline(t)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.spline is None:
            return np.where(t >= self.point_mass, 1.0, 0.0)
        return self.normalization * self.spline.antiderivative_at(t)

    def density_pp(self) -> PiecewisePolynomial:
        if self.spline is None:
            raise ValueError("point mass has no density")
        return PiecewisePolynomial(self.spline.breaks, self.normalization * self.spline.coeffs)

    def derivative(self, order: int = 1) -> PiecewisePolynomial:
        return self.density_pp().derivative(order)


def spline_density(knots) -> SplineDensity:
    t = merge_knots(np.sort(np.asarray(knots, dtype=float)))
    span = t[-1] - t[0]
    if span <= 0:
        return SplineDensity(t, None, float("inf"), float(t[0]))
    return SplineDensity(t, PiecewisePolynomial(t, bspline_coeffs(t)), (t.size - 1) / span)


def hermitian_form_density(eigs, t=None):
    """Law of q* H q for uniform unit q, from the eigenvalues of H.

    Returns the SplineDensity when ``t`` is None, else its value(s) at ``t``.
    A scalar H (all eigenvalues equal) yields a point mass.
    """
    eigs = np.asarray(eigs, dtype=float)
    if eigs.size < 2:
        raise ValueError("need n >= 2 eigenvalues")
    dens = spline_density(eigs)
    if t is None:
        return dens
    return dens.pdf(t)


def w_functionals(eigs) -> tuple[float, float, float]:
    """Gap functionals (w1, w2, w3) of a Hermitian spectrum, n >= 4.

    w1 = l_1 - l_n, w2 = 1 / (1/(l_2 - l_n) + 1/(l_1 - l_{n-1})),
    w3 = l_2 - l_{n-1}; w2 is 0 when either edge gap vanishes.
    """
    lam = np.sort(np.asarray(eigs, dtype=float))[::-1]
    if lam.size < 4:
        raise ValueError("w functionals need n >= 4")
    w1 = lam[0] - lam[-1]
    g1, g2 = lam[1] - lam[-1], lam[0] - lam[-2]
    w2 = 0.0 if g1 <= 0 or g2 <= 0 else 1.0 / (1.0 / g1 + 1.0 / g2)
    w3 = lam[1] - lam[-2]
    return float(w1), float(w2), float(w3)


def w_functionals_batch(eigs_desc) -> np.ndarray:
    """Vectorized w functionals; rows are spectra sorted descending. Shape (..., 3)."""
    lam = np.asarray(eigs_desc, dtype=float)
    w1 = lam[..., 0] - lam[..., -1]
    g1 = lam[..., 1] - lam[..., -1]
    g2 = lam[..., 0] - lam[..., -2]
    with np.errstate(divide="ignore", invalid="ignore"):
        w2 = np.where((g1 > 0) & (g2 > 0), g1 * g2 / (g1 + g2), 0.0)
    w3 = lam[..., 1] - lam[..., -2]
    return np.stack([w1, w2, w3], axis=-1)


def concavity_floor(eigs) -> float:
    """Lower bound -(n-1)(n-2)(n-3)/(w1 w2 w3) on the second derivative of the density."""
    lam = np.asarray(eigs, dtype=float)
    n = lam.size
    w1, w2, w3 = w_functionals(lam)
    prod = w1 * w2 * w3
    if prod <= 0:
        return float("-inf")
    return -(n - 1) * (n - 2) * (n - 3) / prod
