"""Lower-tail bounds for sigma_min of random compressions and their Monte Carlo checks.

Every empirical verdict is one-sided: an estimated probability passes when
its 99% Clopper-Pearson upper limit sits below the theoretical bound. Where
an event depends on a polygon-bracketed geometric quantity, the side of the
bracket that can only over-count events is used.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .compressions import (
    SingularPivotError,
    as_cmatrix,
    compress,
    schur_complement,
    sigma_k,
)
from .numrange import bowtie_zero, inner_radius, numerical_range, stacked_regions
from .rand_frames import as_generator, haar_frames, haar_unit_vectors
from .stats import CheckReport, binomial_halfwidth, clopper_pearson_upper

LEVEL = 0.99


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the first- and second-order tail bounds.

    ``c1`` is fixed by (ell, n). ``c2`` and ``c3`` default to the values
    obtained by following the second-order argument step by step.
    """

    ell: int
    n: int
    c2: float | None = None
    c3: float | None = None

    @property
    def c1(self) -> float:
        return 24.0 * self.ell**3 * (self.n - 1)

    @property
    def c2_value(self) -> float:
        if self.c2 is not None:
            return float(self.c2)
        n, ell = self.n, self.ell
        return 10 * 5.1 * (n + 3) ** 3 * (70 * (ell + 3) * n) ** 2.5

    @property
    def c3_value(self) -> float:
        if self.c3 is not None:
            return float(self.c3)
        return 4 * np.e * 2 * 24 * (self.ell - 1) ** 3 * (self.n - 1)

    @property
    def c2_c3_traced(self) -> bool:
        return self.c2 is None and self.c3 is None


def first_order_bound(A, ell: int, eps: float) -> float:
    """min(1, 24 ell^3 (n-1) eps / sigma_ell(A)); 1 when sigma_ell(A) = 0."""
    A = as_cmatrix(A, square=True)
    n = A.shape[0]
    if not 1 <= ell <= n:
        raise ValueError("need 1 <= ell <= n")
    if eps <= 0:
        return 0.0
    s = sigma_k(A, ell)
    if s <= 1e-14 * max(np.linalg.norm(A, 2), 1e-300):
        return 1.0
    return float(min(1.0, 24 * ell**3 * (n - 1) * eps / s))


def second_order_bound(A, ell: int, eps: float, consts: BoundConstants | None = None, nr=None) -> float:
    """eps^2 log^2((c3/eps) 2||A||^2/sigma_{ell-1}) ||A||^2 / (sigma_{ell+8} sigma_{ell+3}^2) c2 / inR(W(A)), clamped to [0, 1]."""
    A = as_cmatrix(A, square=True)
    n = A.shape[0]
    if not 2 <= ell <= n - 8:
        raise ValueError(f"second-order bound needs 2 <= ell <= n - 8 (ell={ell}, n={n})")
    norm = np.linalg.norm(A, 2)
    if not 0 < eps < norm / 2:
        raise ValueError("need 0 < eps < ||A||/2")
    consts = consts or BoundConstants(ell, n)
    if nr is None:
        nr = numerical_range(A)
    r_in = inner_radius(nr)[0]
    s8, s3, s1m = sigma_k(A, ell + 8), sigma_k(A, ell + 3), sigma_k(A, ell - 1)
    tiny = 1e-14 * norm
    if s8 <= tiny or r_in <= 0:
        return 1.0
    log_arg = consts.c3_value / eps * 2 * norm**2 / s1m
    val = eps**2 * np.log(log_arg) ** 2 * norm**2 / (s8 * s3**2) * consts.c2_value / r_in
    return float(min(1.0, max(0.0, val)))


# --------------------------------------------------------------------------
# empirical tails


def smin_of_compressions(A, ell: int, count: int, rng, z: complex = 0.0, chunk: int = 4000) -> np.ndarray:
    """sigma_min(Q*(z - A)Q) for ``count`` Haar frames Q."""
    A = as_cmatrix(A, square=True)
    n = A.shape[0]
    gen = as_generator(rng)
    B = z * np.eye(n) - A
    out = np.empty(count)
    for start in range(0, count, chunk):
        m = min(chunk, count - start)
        C = compress(B, haar_frames(n, ell, m, gen))
        out[start : start + m] = np.linalg.svd(C, compute_uv=False)[:, -1]
    return out


@dataclass
class TailCurve:
    eps_grid: np.ndarray
    p_hat: np.ndarray
    ci_upper: np.ndarray
    bound: np.ndarray
    n_samples: int
    seed: object = None
    second_order: np.ndarray | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def dominated(self) -> bool:
        """CI upper limit below the first-order bound at every grid point."""
        return bool(np.all(self.ci_upper <= self.bound))


def smin_tail_empirical(A, ell: int, z: complex, eps_grid, N: int, rng, consts: BoundConstants | None = None) -> TailCurve:
    """Empirical CDF of pooled sigma_min(Q*(z - A)Q) draws on eps_grid, with both bounds."""
    if N < 100:
        raise ValueError("need N >= 100 samples")
    A = as_cmatrix(A, square=True)
    n = A.shape[0]
    eps_grid = np.asarray(eps_grid, dtype=float)
    s = np.sort(smin_of_compressions(A, ell, N, rng, z))
    hits = np.searchsorted(s, eps_grid, side="right")
    B = z * np.eye(n) - A
    first = np.array([first_order_bound(B, ell, e) for e in eps_grid])
    notes = []
    second = None
    if 2 <= ell <= n - 8:
        nr = numerical_range(B)
        norm = np.linalg.norm(B, 2)
        second = np.array(
            [second_order_bound(B, ell, e, consts, nr) if 0 < e < norm / 2 else np.nan for e in eps_grid]
        )
    else:
        notes.append("second-order bound not applicable (needs 2 <= ell <= n - 8)")
    return TailCurve(
        eps_grid, hits / N, np.asarray(clopper_pearson_upper(hits, N, LEVEL)), first, N,
        seed=getattr(rng, "seed", rng), second_order=second, notes=notes,
    )


# --------------------------------------------------------------------------
# the reduction to a numerical-measure small ball


def _schur_draws(A, width: int, count: int, gen):
    """``count`` Schur complements (A/Q') with resampling of singular pivots."""
    n = A.shape[0]
    mats, rejected = [], 0
    while len(mats) < count:
        Q = haar_frames(n, width, 1, gen)[0]
        try:
            mats.append(schur_complement(A, Q))
        except SingularPivotError:
            rejected += 1
            if rejected > 10 * count + 100:
                raise
    return np.array(mats), rejected


def reduction_check(A, ell: int, eps: float, N: int, rng, inner: int = 1) -> CheckReport:
    """Pr(sigma_min(Q*AQ) <= eps) against 3 ell^2 Pr(|q*(A/Q')q| <= 2 ell eps).

    The right side samples Q' and then ``inner`` vectors q per Q'.
    Holds when left <= right + 3 pooled binomial half widths.
    """
    A = as_cmatrix(A, square=True)
    n = A.shape[0]
    gen = as_generator(rng)
    left_hits = int(np.sum(smin_of_compressions(A, ell, N, gen) <= eps))
    mats, rejected = _schur_draws(A, ell - 1, N, gen)
    q = haar_unit_vectors(n, N * inner, gen).reshape(N, inner, n)
    forms = np.einsum("bki,bij,bkj->bk", q.conj(), mats, q)
    right_hits = int(np.sum(np.abs(forms) <= 2 * ell * eps))
    m = N * inner
    pl, pr = left_hits / N, 3 * ell**2 * right_hits / m
    hw = np.hypot(binomial_halfwidth(left_hits, N, LEVEL), 3 * ell**2 * binomial_halfwidth(right_hits, m, LEVEL))
    return CheckReport(
        "reduction", pl <= pr + 3 * hw, pl, pr,
        {"ell": ell, "eps": eps, "samples": N, "pooled_halfwidth": hw, "singular_pivots": rejected},
    )


# --------------------------------------------------------------------------
# random-compression geometry


def xlogx_tail(x: float) -> float:
    """x log(e/x), the tail profile of the random-geometry checks (1 at x = 1)."""
    if x <= 0:
        return 0.0
    return float(x * (1 + np.log(1 / x)))


def compression_area_check(B, k: int, theta: float, N: int, rng, K: int = 128) -> CheckReport:
    """Pr(area(W(T*BT) hull 0) < theta area(W(B) hull 0)/(4 pi m^2)) for T in U~(m, 2k).

    Events are counted from the inner polygon of each sample against the
    outer-polygon area of B, so the empirical rate can only be overstated.
    """
    B = as_cmatrix(B, square=True)
    m = B.shape[0]
    if 2 * k > m:
        raise ValueError("need 2k <= m")
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    gen = as_generator(rng)
    hull = bowtie_zero(numerical_range(B, 4 * K))
    area_B = hull.area_bounds()[1]
    threshold = area_B * theta / (4 * np.pi * m**2)
    bound = xlogx_tail(theta**k)
    # round-off area of a segment is not an area
    if area_B <= 1e-12 * hull.diameter_bounds()[1] ** 2:
        return CheckReport(
            "area49", True, 0.0, bound, {"note": "W(B) hull 0 has zero area; both sides trivial", "samples": 0}
        )
    hits = 0
    chunk = 1000
    for start in range(0, N, chunk):
        c = min(chunk, N - start)
        Ts = haar_frames(m, 2 * k, c, gen)
        for reg in stacked_regions(compress(B, Ts), K):
            hits += bowtie_zero(reg).area_bounds()[0] < threshold
    ci = float(clopper_pearson_upper(hits, N, LEVEL))
    return CheckReport(
        "area49", ci <= bound, ci, bound,
        {"p_hat": hits / N, "hits": hits, "samples": N, "k": k, "theta": theta, "threshold": threshold},
    )


def schur_inner_radius_check(A, ell: int, ell_prime: int, theta: float, N: int, rng, K: int = 128) -> CheckReport:
    """Failure rate of inR(W(A/Q')) >= theta/(70 l' n)^2.5 (s_l'/s_1)^2 inR(W(A) hull 0)."""
    A = as_cmatrix(A, square=True)
    n = A.shape[0]
    if not ell_prime > ell >= 1:
        raise ValueError("need ell' > ell >= 1")
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    base = inner_radius(bowtie_zero(numerical_range(A, 4 * K)))
    if base[0] <= 0:
        raise ValueError("inR(W(A) hull 0) must be positive")
    gen = as_generator(rng)
    s1, sl = sigma_k(A, 1), sigma_k(A, ell_prime)
    threshold = theta / (70 * ell_prime * n) ** 2.5 * (sl / s1) ** 2 * base[1]
    mats, rejected = _schur_draws(A, ell - 1, N, gen)
    fails = 0
    for reg in stacked_regions(mats, K):
        fails += inner_radius(reg)[0] < threshold
    bound = xlogx_tail(theta ** ((ell_prime - ell) / 2))
    ci = float(clopper_pearson_upper(fails, N, LEVEL))
    return CheckReport(
        "inradius52", ci <= bound, ci, bound,
        {"p_hat": fails / N, "failures": fails, "samples": N, "threshold": threshold, "singular_pivots": rejected},
    )


def corner_smin_check(n: int, r: int, theta: float, N: int, rng) -> CheckReport:
    """Smallest singular value of the r x r corner of a Haar frame.

    The verdict uses Pr(sigma_r(X) < theta/sqrt(r(n-r))) <= theta^2; the
    rate for the threshold sqrt(r(n-r))/theta is reported alongside.
    """
    if not 1 <= r <= n:
        raise ValueError("need 1 <= r <= n")
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    gen = as_generator(rng)
    U = haar_frames(n, r, N, gen)
    s = np.linalg.svd(U[:, :r, :], compute_uv=False)[:, -1]
    bound = theta**2
    if r == n:
        # X is the whole unitary, sigma_r = 1
        return CheckReport(
            "corner53", True, 0.0, bound,
            {"note": "r = n: X is unitary", "sigma_r_min": float(s.min()), "samples": N,
             "printed_reading_rate": 0.0, "printed_reading_holds": True},
        )
    scale = np.sqrt(r * (n - r))
    usage_fail = int(np.sum(s < theta / scale))
    printed_fail = int(np.sum(s < scale / theta))
    hw = binomial_halfwidth(usage_fail, N, LEVEL)
    p = usage_fail / N
    return CheckReport(
        "corner53", p <= bound + 3 * hw, p, bound,
        {
            "samples": N, "halfwidth": hw,
            "printed_reading_rate": printed_fail / N,
            "printed_reading_holds": bool(printed_fail / N <= bound + 3 * binomial_halfwidth(printed_fail, N, LEVEL)),
        },
    )
