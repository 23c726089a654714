"""Tiling-based planar graphs: construction, growth, resistance, walks, connectivity."""
from .tiling import (
    ColumnSpec, FamilyParams, Tile, Tiling, TilingError, alpha, boundary_sets, concat,
    concat_all, gamma_bk, make_column_tiling, max_side, mixed_power_for_degree, power,
    product, stack, tower, unit_tiling,
)
from .dual import (
    CylindricalGraph, DualGraph, WeightedGraph, build_cylinder, build_dual, columns,
    cylindrify, linearize,
)

__version__ = "0.1.0"
