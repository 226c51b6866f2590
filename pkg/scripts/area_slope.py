"""Log-log slope of the mean pseudospectral area of compressions of a normal matrix.

    python3 scripts/area_slope.py [--config FILE] [--frames N]
"""

import argparse
import csv

import numpy as np

from pseudocomp.config import ExperimentConfig
from pseudocomp.pseudospectrum import expected_area_mc
from pseudocomp.rand_frames import RngStream


def disk_normal(n: int, seed: int) -> np.ndarray:
    g = RngStream(seed, 1).generator()
    lam = np.sqrt(g.uniform(0, 1, n)) * np.exp(2j * np.pi * g.uniform(0, 1, n))
    return np.diag(lam)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--n", type=int, default=30)
    args = ap.parse_args()
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig(
        eps=list(10.0 ** -np.arange(1.5, 3.01, 0.25)), samples=40
    )
    A = disk_normal(args.n, cfg.seed)
    rows = []
    for k, eps in enumerate(cfg.eps):
        ea = expected_area_mc(A, cfg.ell, eps, cfg.samples, cfg.resolution, rng=RngStream(cfg.seed, 10 + k))
        rows.append((eps, ea.mean_lo, ea.mean_hi, ea.ci))
        print(f"eps={eps:.3e}  area in [{ea.mean_lo:.4e}, {ea.mean_hi:.4e}]  ci={ea.ci:.2e}")
    eps = np.array([r[0] for r in rows])
    mid = np.array([(r[1] + r[2]) / 2 for r in rows])
    slope = np.polyfit(np.log(eps), np.log(mid), 1)[0]
    print(f"log-log slope {slope:.3f}  (pi eps^2 envelope has slope 2)")
    path = cfg.output("area_slope.csv")
    with open(path, "w", newline="") as fh:
        fh.write(cfg.to_text("area_slope"))
        w = csv.writer(fh)
        w.writerow(["eps", "mean_lo", "mean_hi", "ci"])
        w.writerows(rows)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
