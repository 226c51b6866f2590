"""Binomial and mean confidence intervals used by the dominance checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats


def clopper_pearson_upper(k, n, level: float = 0.99):
    """One-sided Clopper-Pearson upper limit for a binomial proportion."""
    k = np.asarray(k)
    out = np.where(k >= n, 1.0, stats.beta.ppf(level, k + 1, np.maximum(n - k, 1)))
    return out if out.ndim else float(out)


def clopper_pearson_lower(k, n, level: float = 0.99):
    k = np.asarray(k)
    out = np.where(k <= 0, 0.0, stats.beta.ppf(1 - level, np.maximum(k, 1), n - k + 1))
    return out if out.ndim else float(out)


def mean_halfwidth(samples, level: float = 0.99) -> float:
    """Two-sided Student-t half width for the mean."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        return float("inf")
    t = stats.t.ppf(0.5 + level / 2, x.size - 1)
    return float(t * x.std(ddof=1) / np.sqrt(x.size))


def binomial_halfwidth(k: int, n: int, level: float = 0.99) -> float:
    """Half width of the two-sided exact interval (max of the two sides)."""
    p = k / n
    a = (1 - level) / 2
    hi = 1.0 if k >= n else stats.beta.ppf(1 - a, k + 1, n - k)
    lo = 0.0 if k <= 0 else stats.beta.ppf(a, k, n - k + 1)
    return float(max(hi - p, p - lo))


@dataclass
class CheckReport:
    """Verdict of one empirical check: ``lhs`` is compared against ``rhs``."""

    name: str
    holds: bool
    lhs: float
    rhs: float
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"name": self.name, "holds": bool(self.holds), "lhs": _jsonable(self.lhs), "rhs": _jsonable(self.rhs)}
        out.update({k: _jsonable(v) for k, v in self.details.items()})
        return out


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        return [v.real, v.imag]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v
