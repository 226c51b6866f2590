"""Density of the numerical measure on a grid over W(M), as CSV and an SVG heat map.

    python3 scripts/density_map.py [--config FILE] [--nx 80]
"""

import argparse

import numpy as np

from pseudocomp.cli import heatmap_svg
from pseudocomp.config import ExperimentConfig
from pseudocomp.matrices import resolve_matrix
from pseudocomp.numerical_measure import density_grid, density_sup_bound
from pseudocomp.numrange import numerical_range


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--nx", type=int, default=80)
    args = ap.parse_args()
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig(matrix="ginibre:6:3", ktheta=256)
    M = resolve_matrix(cfg.matrix)
    box = numerical_range(M).bbox()
    field, cell = density_grid(M, box, args.nx, args.nx, cfg.ktheta)
    print(f"mass {field.cell_mass(cell):.4f}  max {field.values.max():.4g}  "
          f"gap {field.convergence_gap:.2e}  sup bound {density_sup_bound(M, cfg.ktheta):.4g}")
    z = field.grid.ravel()
    data = np.column_stack([z.real, z.imag, field.values.ravel(), field.gaps.ravel()])
    path = cfg.output("density_map.csv")
    header = cfg.to_text("density_map") + "re,im,rho,gap"
    np.savetxt(path, data, delimiter=",", header=header, comments="# ")
    cfg.output("density_map.svg").write_text(heatmap_svg(header.splitlines()[:-1], field.values))
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
