"""Flow-map layouts: critical nodes, edge bundling, spiral trees."""

from geocube.flowmap.bundling import (
    DegenerateEdge,
    FdebParams,
    LayoutPolyline,
    corridor_count,
    fdeb_bundle,
    straight_polylines,
)
from geocube.flowmap.geojson import feature_collection, polyline_feature
from geocube.flowmap.graph import FlowEdge, FlowGraph, FlowNode, critical_nodes
from geocube.flowmap.spiral import single_source_tree

__all__ = [
    "DegenerateEdge",
    "FdebParams",
    "LayoutPolyline",
    "corridor_count",
    "fdeb_bundle",
    "straight_polylines",
    "feature_collection",
    "polyline_feature",
    "FlowEdge",
    "FlowGraph",
    "FlowNode",
    "critical_nodes",
    "single_source_tree",
]
