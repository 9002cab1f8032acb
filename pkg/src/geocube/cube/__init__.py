"""Hierarchical spatiotemporal data cube over trajectory streams."""

from geocube.cube.core import Cube, LevelTable, build_base, rollup_cell, rollup_flows
from geocube.cube.facts import (
    GROUP_ALL,
    GROUP_ILI,
    GROUPS,
    Diagnostics,
    EmptyRegion,
    Fact,
    MissingChildren,
    merge_cuboids,
)
from geocube.cube.kde import cell_areas_km2, flu_points, flu_risk_surface, total_mass
from geocube.cube.query import (
    dyadic_spatial_blocks,
    dyadic_time_blocks,
    flow_query,
    polygon_to_base_cells,
    region_aggregate,
)

__all__ = [
    "Cube",
    "LevelTable",
    "build_base",
    "rollup_cell",
    "rollup_flows",
    "GROUP_ALL",
    "GROUP_ILI",
    "GROUPS",
    "Diagnostics",
    "EmptyRegion",
    "Fact",
    "MissingChildren",
    "merge_cuboids",
    "cell_areas_km2",
    "flu_points",
    "flu_risk_surface",
    "total_mass",
    "dyadic_spatial_blocks",
    "dyadic_time_blocks",
    "flow_query",
    "polygon_to_base_cells",
    "region_aggregate",
]
