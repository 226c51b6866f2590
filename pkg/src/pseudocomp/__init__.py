"""Pseudospectra of Haar-random compressions.

Numerical tools for compressions ``Q* A Q`` onto Haar-random subspaces:
B-spline densities of numerical measures, small-ball and least singular
value tail bounds, and certified pseudospectral areas, each paired with a
Monte Carlo check.
"""

__version__ = "0.1.0"
