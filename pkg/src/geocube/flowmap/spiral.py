"""Single-source flow trees routed along logarithmic spirals.

Destinations are sorted by bearing from the source and greedily merged:
the two angularly closest adjacent branches join at the meeting point of
their inward spirals (pitch bounded by the restricting angle) whenever
that point lies between the source and both branches and neither spiral
winds more than a quarter turn.  A destination that is directly reachable
from a farther one along an admissible spiral is chained onto its path
instead.  The result is a crossing-free tree whose edge weights accumulate
descendant flows, so flow is conserved at the root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from geocube.flowmap.bundling import LayoutPolyline
from geocube.geo import LocalProjection

MIN_SEGMENT_POINTS = 8
_MAX_WIND = math.pi / 2 - 1e-9  # a spiral arm may not wind a quarter turn
_EPS_KM = 1e-9


@dataclass
class _Branch:
    r: float
    theta: float
    weight: float
    node_id: object


def single_source_tree(
    source: tuple[float, float],
    dests: list[tuple[object, tuple[float, float], float]],
    restricting_angle_deg: float = 25.0,
    source_id: object = "source",
) -> list[LayoutPolyline]:
    """Layout polylines of the spiral tree.

    source is (lon, lat); dests are (node_id, (lon, lat), weight) with
    positive weights.  Every polyline runs parent-to-child; weights carry
    the total flow through the edge.
    """
    if not dests:
        raise ValueError("dests must be non-empty")
    if not 0.0 < restricting_angle_deg < 90.0:
        raise ValueError("restricting angle must be in (0, 90) degrees")
    tan_a = math.tan(math.radians(restricting_angle_deg))
    proj = LocalProjection(source[0], source[1])

    branches: list[_Branch] = []
    segments: list[tuple[_Branch, _Branch]] = []  # (child, parent-end)
    join_counter = 0
    at_source: list[_Branch] = []

    for node_id, (lon, lat), weight in dests:
        x, y = proj.to_xy(lon, lat)
        r = math.hypot(float(x), float(y))
        if r < _EPS_KM:
            at_source.append(_Branch(0.0, 0.0, weight, node_id))
        else:
            branches.append(_Branch(r, math.atan2(float(y), float(x)) % (2 * math.pi), weight, node_id))

    branches.sort(key=lambda b: (b.theta, b.r))

    def gap(i: int) -> float:
        """Angular gap from branch i to its successor, in [0, 2*pi)."""
        a, b = branches[i], branches[(i + 1) % len(branches)]
        return (b.theta - a.theta) % (2 * math.pi)

    while len(branches) > 1:
        best = None
        for i in range(len(branches)):
            d_theta = gap(i)
            b1 = branches[i]
            b2 = branches[(i + 1) % len(branches)]
            plan = _join_plan(b1, b2, d_theta, tan_a)
            if plan is not None and (best is None or d_theta < best[0]):
                best = (d_theta, i, plan)
        if best is None:
            break
        d_theta, i, (r_q, theta_q, kind) = best
        b1 = branches[i]
        b2 = branches[(i + 1) % len(branches)]
        if kind == "chain":
            near = b1 if b1.r <= b2.r else b2
            far = b2 if near is b1 else b1
            merged = _Branch(near.r, near.theta, b1.weight + b2.weight, near.node_id)
            segments.append((far, merged))
        else:
            join_counter += 1
            merged = _Branch(r_q, theta_q % (2 * math.pi), b1.weight + b2.weight, f"join{join_counter}")
            segments.append((b1, merged))
            segments.append((b2, merged))
        hi = (i + 1) % len(branches)
        for idx in sorted((i, hi), reverse=True):
            branches.pop(idx)
        lo = 0
        while lo < len(branches) and (branches[lo].theta, branches[lo].r) < (merged.theta, merged.r):
            lo += 1
        branches.insert(lo, merged)

    root = _Branch(0.0, 0.0, 0.0, source_id)
    for b in branches:
        segments.append((b, root))

    polylines = []
    for child, parent in segments:
        pts = _spiral_points(child, parent)
        lon, lat = proj.to_lonlat(pts[:, 0], pts[:, 1])
        coords = np.column_stack((lon, lat))[::-1].copy()  # parent -> child
        if parent.node_id == source_id:
            coords[0] = source
        polylines.append(
            LayoutPolyline(origin=parent.node_id, dest=child.node_id, points=coords, weight=child.weight)
        )
    for b in at_source:
        polylines.append(
            LayoutPolyline(
                origin=source_id, dest=b.node_id,
                points=np.array([source, source], dtype=np.float64), weight=b.weight,
            )
        )
    # exact endpoint preservation for destination leaves
    by_id = {node_id: (lon, lat) for node_id, (lon, lat), _w in dests}
    for p in polylines:
        if p.dest in by_id:
            p.points[-1] = by_id[p.dest]
    return polylines


def _join_plan(b1: _Branch, b2: _Branch, d_theta: float, tan_a: float):
    """Feasible meeting point of two adjacent branches, or None.

    Returns (r, theta, kind) where kind is "join" (fresh Steiner point on
    both spirals) or "chain" (the nearer branch already lies on an
    admissible spiral from the farther one).
    """
    near, far = (b1, b2) if b1.r <= b2.r else (b2, b1)
    if far.r < _EPS_KM:
        return None
    # chain: near point reachable from far along a spiral with pitch <= angle
    if near.r > _EPS_KM:
        required = tan_a * math.log(far.r / near.r)
        if d_theta <= required + 1e-12 and d_theta <= _MAX_WIND:
            return (near.r, near.theta, "chain")
    r_q = math.sqrt(b1.r * b2.r) * math.exp(-d_theta / (2.0 * tan_a))
    if r_q > min(b1.r, b2.r) * (1.0 + 1e-12) or r_q < _EPS_KM:
        return None
    wind_1 = tan_a * math.log(b1.r / r_q)
    wind_2 = tan_a * math.log(b2.r / r_q)
    if max(wind_1, wind_2) >= _MAX_WIND:
        return None
    theta_q = b1.theta + wind_1
    return (r_q, theta_q, "join")


def _spiral_points(child: _Branch, parent: _Branch, n: int = MIN_SEGMENT_POINTS) -> np.ndarray:
    """Sample the spiral (theta linear in log r) from child inward to parent."""
    r1, t1 = child.r, child.theta
    r0, t0 = parent.r, parent.theta
    d_theta = (t0 - t1 + math.pi) % (2 * math.pi) - math.pi  # signed short way
    if r0 < _EPS_KM:
        # straight radial into the source
        rr = np.linspace(r1, 0.0, n)
        tt = np.full(n, t1)
    elif r1 < _EPS_KM or abs(math.log(max(r1, _EPS_KM) / max(r0, _EPS_KM))) < 1e-12:
        rr = np.linspace(r1, r0, n)
        tt = t1 + np.linspace(0.0, d_theta, n)
    else:
        rr = r1 * (r0 / r1) ** np.linspace(0.0, 1.0, n)
        tt = t1 + d_theta * (np.log(r1 / rr) / math.log(r1 / r0))
    return np.column_stack((rr * np.cos(tt), rr * np.sin(tt)))
