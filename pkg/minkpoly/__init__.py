"""
Numerics for hyperpolygon spaces and closed polygons in Minkowski 3-space.

The package computes moment maps and alpha-stability of hyperpolygons,
normalizes points with a Kempf-Ness solver, classifies fixed points of the
circle-action involution, and maps the non-compact fixed components to
closed Minkowski polygons and to strongly parabolic Higgs data. The
``minkpoly`` command exposes these operations on JSON files.
"""

__version__ = "0.1.0"
