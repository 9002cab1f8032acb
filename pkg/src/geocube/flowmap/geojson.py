"""GeoJSON serialization of flow-map layouts."""

from __future__ import annotations

from geocube.flowmap.bundling import LayoutPolyline


def polyline_feature(p: LayoutPolyline, **extra_properties) -> dict:
    props = {
        "flow": p.weight,
        "flow_flu": p.weight_flu,
        "bundle_id": p.bundle_id,
        "origin": str(p.origin),
        "dest": str(p.dest),
    }
    props.update(extra_properties)
    return {
        "type": "Feature",
        "geometry": {
            "type": "LineString",
            "coordinates": [[float(x), float(y)] for x, y in p.points],
        },
        "properties": props,
    }


def feature_collection(polylines: list[LayoutPolyline], per_feature_properties=None) -> dict:
    features = []
    for i, p in enumerate(polylines):
        extra = per_feature_properties[i] if per_feature_properties else {}
        features.append(polyline_feature(p, **extra))
    return {"type": "FeatureCollection", "features": features}
