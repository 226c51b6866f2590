"""Desk-scale verification suites, one per inequality or identity.

Every suite draws from its own RNG stream (seed, crc32 of its name), so
results do not depend on which other suites run or in which order.
"""

from __future__ import annotations

import math
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy import integrate, stats

from . import __version__
from .bspline import bspline_build, concavity_floor, spline_density, w_functionals
from .compressions import sigma_k
from .matrices import ginibre, jordan
from .numerical_measure import (
    N_BLOCK,
    appendix_integral,
    cone_segment_check,
    density_grid,
    hilbert_spline_derivative,
    l1_factor_bound,
    l1_factor_quadrature,
    phi_witness,
    regularize,
    small_ball_empirical,
    theta_w_functionals,
)
from .numrange import numerical_range
from .pseudospectrum import (
    expected_area_by_probability,
    expected_area_mc,
    shift_growth_check,
    regime_exponent,
    shifted_min,
    theorem_bounds,
)
from .rand_frames import RngStream, complex_gaussian, haar_frames, haar_unit_vectors, polarization_net, verify_net_inequality
from .stats import CheckReport, binomial_halfwidth, clopper_pearson_upper
from .tail_bounds import (
    compression_area_check,
    corner_smin_check,
    reduction_check,
    schur_inner_radius_check,
    smin_tail_empirical,
)


def suite_stream(seed: int, name: str) -> np.random.Generator:
    return RngStream(seed, zlib.crc32(name.encode())).generator()


def random_hermitian(gen, n: int) -> np.ndarray:
    G = complex_gaussian(gen, (n, n))
    return (G + G.conj().T) / 2


# --------------------------------------------------------------------------


def suite_haar(gen):
    out = []
    Q = haar_frames(12, 4, 2000, gen)
    err = float(np.max(np.abs(np.swapaxes(Q.conj(), 1, 2) @ Q - np.eye(4))))
    out.append(CheckReport("orthonormal columns", err < 1e-12, err, 1e-12))
    # |q_1|^2 of a uniform unit vector in C^n is Beta(1, n-1)
    q = haar_unit_vectors(8, 20000, gen)
    p = stats.kstest(np.abs(q[:, 0]) ** 2, stats.beta(1, 7).cdf).pvalue
    out.append(CheckReport("coordinate law Beta(1, n-1)", p > 1e-3, float(p), 1e-3))
    # phase fix: E Q_11 should vanish, unlike unfixed QR
    m = abs(np.mean(Q[:, 0, 0]))
    out.append(CheckReport("phase invariance |E Q_11|", m < 4 / math.sqrt(2000), float(m), 4 / math.sqrt(2000)))
    return out


def suite_net(gen):
    worst, fails = 0.0, 0
    for ell in range(2, 9):
        if len(polarization_net(ell)) != 3 * ell * ell - 2 * ell:
            fails += 1
        for _ in range(40):
            r = verify_net_inequality(complex_gaussian(gen, (ell, ell)))
            worst = max(worst, r.lhs / r.rhs)
            fails += not r.holds
    return [CheckReport("norm <= ell max over net", fails == 0, worst, 1.0, {"trials": 280})]


def suite_a22(gen):
    worst = 0.0
    for _ in range(100):
        n = int(gen.integers(2, 13))
        t = np.sort(gen.uniform(-3, 3, n))
        worst = max(worst, abs(bspline_build(t).integral() - (t[-1] - t[0]) / (n - 1)))
    return [CheckReport("spline integral identity", worst <= 1e-10, worst, 1e-10)]


def suite_a24(gen):
    worst = 0.0
    for n in (2, 3, 5, 8):
        H = random_hermitian(gen, n)
        lam = np.linalg.eigvalsh(H)
        q = haar_unit_vectors(n, 20000, gen)
        x = np.einsum("ki,ij,kj->k", q.conj(), H, q).real
        d = stats.kstest(x, spline_density(lam).cdf).statistic
        worst = max(worst, d)
    return [CheckReport("KS distance spline law vs sampling", worst <= 0.02, worst, 0.02)]


def suite_a25(gen):
    out = []
    grid = 10.0 ** -np.arange(1, 6)
    for label, A in (("jordan12", jordan(12)), ("ginibre12", ginibre(12, 5))):
        tc = smin_tail_empirical(A, 2, 0.0, grid, 4000, gen)
        out.append(CheckReport(f"first-order tail {label}", tc.dominated, float(np.max(tc.ci_upper - tc.bound)), 0.0))
    return out


def suite_a35(gen):
    worst, ok = -np.inf, True
    for _ in range(20):
        n = int(gen.integers(4, 11))
        lam = np.linalg.eigvalsh(random_hermitian(gen, n))
        floor = concavity_floor(lam)
        d2 = spline_density(lam).derivative(2)
        u = np.linspace(0, 1, 41)
        for j, (a, w) in enumerate(zip(d2.breaks[:-1], d2.widths)):
            if w <= 0:
                continue
            v = np.polyval(d2.coeffs[j][::-1], u)
            mid = a + w / 2
            inside = lam[1] <= mid <= lam[-2]
            lim = floor if inside else 0.0
            tol = 1e-8 * max(1.0, abs(floor))
            ok &= bool(np.min(v) >= lim - tol)
            if inside:
                worst = max(worst, float(np.min(v) / floor))
    return [CheckReport("second derivative floor", ok, worst, 1.0, {"note": "lhs is the worst ratio rho''/floor inside"})]


def suite_a36(gen):
    worst, ok = 0.0, True
    for _ in range(20):
        n = int(gen.integers(4, 11))
        lam = np.linalg.eigvalsh(random_hermitian(gen, n))
        w1, w2, w3 = w_functionals(lam)
        bound = (n - 1) * (n - 2) * (n - 3) / (np.pi * w1 * w2) * np.log(4 * np.e * w1 / w3)
        t = np.linspace(lam[0], lam[-1], 301)
        val = float(np.max(hilbert_spline_derivative(spline_density(lam), t)))
        worst = max(worst, val / bound)
        ok &= val <= bound
    return [CheckReport("Hilbert transform of density slope", ok, worst, 1.0)]


def suite_a41(gen):
    M = ginibre(8, 11)
    eps = 0.05
    Mp = regularize(M, eps)
    reg = numerical_range(Mp, 128)
    field, _ = density_grid(Mp, reg.bbox(), 48, 48, 256)
    sup = float(np.max(field.values)) + field.convergence_gap
    est = small_ball_empirical(M, eps, 0.0, 100_000, gen)
    rhs = math.pi * eps**2 * sup
    return [CheckReport("small ball vs regularized density sup", est.p_hat <= rhs + 3 * binomial_halfwidth(est.hits, est.samples), est.p_hat, rhs)]


def suite_a42(gen):
    out = []
    for seed in (1, 2):
        eps = 0.1
        Mp = regularize(ginibre(6, seed), eps)
        w = theta_w_functionals(Mp, 512)
        ratio = float(np.max(w[:, 0] / w[:, 2]))
        lim = np.linalg.norm(Mp, 2) / eps
        out.append(CheckReport(f"sup w1/w3 (ginibre6 seed {seed})", ratio <= lim, ratio, lim, {"min_w3_over_2eps": float(np.min(w[:, 2]) / (2 * eps))}))
    return out


def suite_a44(gen):
    eps = 0.1
    Mp = regularize(ginibre(6, 3), eps)
    wit = phi_witness(Mp, budget=3000, rng=gen)
    quad = l1_factor_quadrature(Mp, 1024)
    bound = l1_factor_bound(Mp, eps, wit.phi_value)
    return [CheckReport("integral of 1/(w1 w2)", quad <= bound, quad, bound, {"phi_witness": wit.phi_value})]


def suite_a45(gen):
    worst, ok = 0.0, True
    for _ in range(100):
        a = float(gen.uniform(0.01, 3))
        b = float(gen.uniform(-3, 3))
        eps = float(10 ** gen.uniform(-3, 0))
        r = appendix_integral(a, b, eps, float(gen.uniform(0, 2 * np.pi)))
        ok &= r.holds
        worst = max(worst, r.value / r.bound)
    return [CheckReport("appendix integral", ok, worst, 1.0)]


def random_cone_config(gen):
    rad = gen.uniform(0.1, 3)
    half = gen.uniform(1e-3, np.pi / 4)
    phi = gen.uniform(0, 2 * np.pi)
    a = rad * np.array([np.cos(phi - half), np.sin(phi - half)])
    b = rad * np.array([np.cos(phi + half), np.sin(phi + half)])
    z1, z2 = gen.uniform(-3, 3, 2)
    return np.r_[a, z1], np.r_[b, z2], 2 * rad * np.sin(half)


def suite_a46(gen):
    ok, worst = True, np.inf
    for _ in range(10_000):
        p1, p2, d = random_cone_config(gen)
        r = cone_segment_check(p1, p2, d)
        ok &= r.holds
        worst = min(worst, r.value / r.threshold)
    return [CheckReport("cone segment maximum", ok, worst, 1.0, {"note": "lhs is min |f(u)|/(d^2/8)"})]


def suite_a47(gen):
    out = []
    mats = {
        "diag6": regularize(np.diag([0, 1, 1j, 1 + 1j, 2, 2j]), 0.05),
        "ginibre8": regularize(ginibre(8, 4), 0.1),
    }
    for name, Mp in mats.items():
        w = phi_witness(Mp, budget=10_000, rng=gen)
        out.append(CheckReport(f"phi witness {name}", w.holds, abs(w.phi_value), w.bound, {"evaluations": w.evaluations}))
    return out


def suite_a49(gen):
    B = np.zeros((3, 3), dtype=complex)
    B[:2, :2] = N_BLOCK
    B[2, 2] = 1 + 1j
    return [compression_area_check(B, 1, 0.1, 2000, gen)]


def suite_a52(gen):
    A = np.diag(np.exp(2j * np.pi * np.arange(12) / 12))
    return [schur_inner_radius_check(A, 2, 5, 0.2, 300, gen)]


def suite_a53(gen):
    return [corner_smin_check(10, 3, 0.3, 10_000, gen)]


def suite_a56(gen):
    A = ginibre(8, 6)
    ell, eps = 2, 0.05
    ea = expected_area_mc(A, ell, eps, 40, rng=gen)
    pa = expected_area_by_probability(A, ell, eps, 200_000, gen)
    hw = math.hypot(ea.halfwidth, pa.halfwidth)
    diff = abs(ea.mid - pa.estimate)
    return [CheckReport("area vs probability estimators", diff <= hw, diff, hw, {"area_mean": ea.mid, "prob_estimate": pa.estimate})]


def suite_a57(gen):
    A = ginibre(10, 7)
    sm = shifted_min(A, 3)
    z = gen.normal(size=100) + 1j * gen.normal(size=100)
    return [CheckReport("shifted minimum growth", shift_growth_check(A, 3, z, sm), sm.s_k, sm.certificate_gap, {"z_k": sm.z_k})]


def suite_a2(gen):
    A = ginibre(20, 8)
    ell, eps = 2, 1e-2
    tb = theorem_bounds(A, ell, eps)
    ea = expected_area_mc(A, ell, eps, 20, rng=gen)
    best = tb.min_applicable()
    out = [CheckReport("expected area below bounds", ea.mean_hi + ea.ci <= best, ea.mean_hi + ea.ci, best, {"items": tb.items, "first_order_area": tb.first_order_area})]
    cases = {"a": (1.2, 5), "ab": (4 / 3, 4), "ac": (2.0, 1)}
    ok = all(regime_exponent(f) == v for f, v in cases.items()) and regime_exponent("") is None
    out.append(CheckReport("regime table", ok, float(ok), 1.0))
    return out


def suite_reduction(gen):
    A = ginibre(12, 9)
    return [reduction_check(A, 3, 1e-2, 2000, gen), reduction_check(A, 1, 1e-2, 2000, gen)]


SUITES = {
    "haar": suite_haar,
    "a17": suite_net,
    "a22": suite_a22,
    "a24": suite_a24,
    "a25": suite_a25,
    "a35": suite_a35,
    "a36": suite_a36,
    "a41": suite_a41,
    "a42": suite_a42,
    "a44": suite_a44,
    "a45": suite_a45,
    "a46": suite_a46,
    "a47": suite_a47,
    "a49": suite_a49,
    "a52": suite_a52,
    "a53": suite_a53,
    "a56": suite_a56,
    "a57": suite_a57,
    "a2": suite_a2,
    "reduction": suite_reduction,
}
ALIASES = {"net": "a17", "area49": "a49", "inradius52": "a52", "corner53": "a53"}


def resolve_suites(name: str) -> list[str]:
    if name == "all":
        return list(SUITES)
    names = [ALIASES.get(s.strip(), s.strip()) for s in name.split(",") if s.strip()]
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    return names


def run_one(name: str, seed: int) -> dict:
    t0 = time.perf_counter()
    try:
        checks = SUITES[name](suite_stream(seed, name))
        entry = {"holds": all(c.holds for c in checks), "checks": [c.as_dict() for c in checks]}
    except Exception as exc:  # a crashing suite is a failed suite
        entry = {"holds": False, "error": f"{type(exc).__name__}: {exc}", "checks": []}
    entry["seconds"] = round(time.perf_counter() - t0, 3)
    return entry


def workers() -> int:
    try:
        return max(1, int(os.environ.get("WORKERS", "")))
    except ValueError:
        return os.cpu_count() or 1


def run_suites(name: str, seed: int) -> dict:
    names = resolve_suites(name)
    nw = min(workers(), len(names))
    if nw > 1:
        with ProcessPoolExecutor(nw) as ex:
            results = dict(zip(names, ex.map(run_one, names, [seed] * len(names))))
    else:
        results = {n: run_one(n, seed) for n in names}
    return {
        "version": __version__,
        "seed": seed,
        "all_pass": all(r["holds"] for r in results.values()),
        "suites": results,
    }
