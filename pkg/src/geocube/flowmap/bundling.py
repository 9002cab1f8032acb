"""Force-directed edge bundling of flow-map polylines.

Follows the classic force-directed scheme: edges start straight, control
points are doubled each cycle, and each iteration applies spring forces
along the edge plus attraction between compatible edge pairs.  Edge-pair
compatibility is the product of angle, scale, position and visibility
terms, each in [0, 1]; edge weights modulate the attraction.  Endpoints
never move and the whole pass is deterministic for fixed inputs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from geocube import _kernels
from geocube.geo import DEG_KM


@dataclass
class LayoutPolyline:
    """Render-ready polyline for one flow edge."""

    origin: object
    dest: object
    points: np.ndarray  # (n, 2) lon/lat
    weight: float = 1.0
    weight_flu: float = 0.0
    bundle_id: int = 0

    def length(self) -> float:
        d = np.diff(self.points, axis=0)
        return float(np.hypot(d[:, 0], d[:, 1]).sum())


@dataclass(frozen=True)
class FdebParams:
    cycles: int = 6
    initial_subdivisions: int = 1
    step_size: float = 0.04
    iterations: int = 50
    compatibility_threshold: float = 0.05


class DegenerateEdge(ValueError):
    """Zero-length edge cannot be bundled."""


SPRING_K = 0.1  # global spring stiffness in normalized display units


def straight_polylines(edges) -> list[LayoutPolyline]:
    """LayoutPolylines with two-point straight geometry from
    (origin, dest, (lon0, lat0), (lon1, lat1), weight, weight_flu) tuples."""
    out = []
    for origin, dest, p0, p1, w, wf in edges:
        out.append(LayoutPolyline(origin, dest, np.array([p0, p1], dtype=np.float64), w, wf))
    return out


def _compatibility(p: np.ndarray, q: np.ndarray) -> float:
    """Product of the four pairwise compatibility terms for two segments."""
    vp = p[1] - p[0]
    vq = q[1] - q[0]
    lp = math.hypot(*vp)
    lq = math.hypot(*vq)
    if lp <= 0 or lq <= 0:
        return 0.0
    avg = 0.5 * (lp + lq)

    angle = abs(float(np.dot(vp, vq)) / (lp * lq))
    scale = 2.0 / (avg / min(lp, lq) + max(lp, lq) / avg)
    mp = 0.5 * (p[0] + p[1])
    mq = 0.5 * (q[0] + q[1])
    position = avg / (avg + math.hypot(*(mp - mq)))

    def visibility(a, va, la, b):
        t0 = float(np.dot(b[0] - a[0], va)) / (la * la)
        t1 = float(np.dot(b[1] - a[0], va)) / (la * la)
        i0 = a[0] + t0 * va
        i1 = a[0] + t1 * va
        li = math.hypot(*(i1 - i0))
        if li <= 0:
            return 0.0
        mi = 0.5 * (i0 + i1)
        ma = 0.5 * (a[0] + a[1])
        return max(0.0, 1.0 - 2.0 * math.hypot(*(ma - mi)) / li)

    vis = min(visibility(p, vp, lp, q), visibility(q, vq, lq, p))
    return angle * scale * position * vis


def fdeb_bundle(edges: list[LayoutPolyline], params: FdebParams | None = None) -> list[LayoutPolyline]:
    """Bundle straight polylines; returns new polylines with curved
    geometry.  Zero-length edges pass through unchanged and take no part in
    the bundling."""
    params = params or FdebParams()
    if params.cycles <= 0 or params.iterations <= 0 or params.step_size <= 0:
        raise ValueError("fdeb params must be positive")
    for e in edges:
        if len(e.points) < 2:
            raise DegenerateEdge(f"edge {e.origin}->{e.dest} has fewer than 2 points")

    # local equirectangular km frame over the display extent, normalized to
    # a unit box so the classic step-size defaults apply
    all_pts = np.concatenate([e.points for e in edges]) if edges else np.zeros((0, 2))
    if not len(all_pts):
        return []
    lon0 = 0.5 * (all_pts[:, 0].min() + all_pts[:, 0].max())
    lat0 = 0.5 * (all_pts[:, 1].min() + all_pts[:, 1].max())
    kx = DEG_KM * math.cos(math.radians(lat0))
    ky = DEG_KM

    def to_xy(pts):
        return np.column_stack(((pts[:, 0] - lon0) * kx, (pts[:, 1] - lat0) * ky))

    xy_ends = [to_xy(e.points[[0, -1]]) for e in edges]
    scale = max(float(np.abs(np.concatenate(xy_ends)).max()), 1e-9)

    active: list[int] = []
    passthrough: list[int] = []
    segs = []
    for i, seg in enumerate(xy_ends):
        seg = seg / scale
        if math.hypot(*(seg[1] - seg[0])) < 1e-12:
            passthrough.append(i)
        else:
            active.append(i)
        segs.append(seg)

    results: dict[int, np.ndarray] = {i: edges[i].points.copy() for i in passthrough}

    if active:
        n = len(active)
        w = np.array([max(edges[i].weight, 0.0) for i in active])
        w_norm = w / w.max() if w.max() > 0 else np.ones_like(w)
        pairs = []
        compat = []
        rev = []
        for a, b in itertools.combinations(range(n), 2):
            p, q = segs[active[a]], segs[active[b]]
            c = _compatibility(p, q)
            c *= math.sqrt(w_norm[a] * w_norm[b])  # weight-modulated attraction
            if c >= params.compatibility_threshold:
                pairs.append((a, b))
                compat.append(c)
                reversed_pair = min(
                    np.hypot(*(p[0] - q[0])), np.hypot(*(p[1] - q[1]))
                ) > min(np.hypot(*(p[0] - q[1])), np.hypot(*(p[1] - q[0])))
                rev.append(1 if reversed_pair else 0)
        pairs_arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
        compat_arr = np.array(compat, dtype=np.float64)
        rev_arr = np.array(rev, dtype=np.uint8)

        pos = np.stack([segs[i] for i in active])  # (E, 2, 2)
        d = pos[:, 1] - pos[:, 0]
        lengths = np.hypot(d[:, 0], d[:, 1])
        step = params.step_size
        iters = params.iterations
        n_interior = params.initial_subdivisions

        for _cycle in range(params.cycles):
            pos = _expand(pos, n_interior)
            kp = SPRING_K / (lengths * (pos.shape[1] - 1))
            for _ in range(iters):
                pos = _kernels.fdeb_iterate(pos, kp, pairs_arr, compat_arr, rev_arr, step)
            step /= 2.0
            iters = max(1, int(2 * iters / 3))
            n_interior = 2 * n_interior + 1

        for idx, i in enumerate(active):
            pts = pos[idx] * scale
            lonlat = np.column_stack((pts[:, 0] / kx + lon0, pts[:, 1] / ky + lat0))
            lonlat[0] = edges[i].points[0]
            lonlat[-1] = edges[i].points[-1]
            results[i] = lonlat

    return [
        replace(edges[i], points=results[i], bundle_id=i)
        for i in range(len(edges))
    ]


def _expand(pos: np.ndarray, target_interior: int) -> np.ndarray:
    """Re-sample each edge's control points so it has target_interior
    interior points (midpoint insertion semantics via linear resampling)."""
    e, p, _ = pos.shape
    new_p = target_interior + 2
    # arc-length parameterization along current polyline
    out = np.empty((e, new_p, 2))
    t_new = np.linspace(0.0, 1.0, new_p)
    for i in range(e):
        seg = np.diff(pos[i], axis=0)
        d = np.hypot(seg[:, 0], seg[:, 1])
        t = np.concatenate(([0.0], np.cumsum(d)))
        total = t[-1]
        t = t / total if total > 0 else np.linspace(0.0, 1.0, p)
        out[i, :, 0] = np.interp(t_new, t, pos[i, :, 0])
        out[i, :, 1] = np.interp(t_new, t, pos[i, :, 1])
    return out


def corridor_count(polylines: list[LayoutPolyline], radius: float | None = None) -> int:
    """Number of distinct corridors: clusters of polyline midpoints within
    `radius` of each other (single-linkage).  A coarse ink/clutter metric
    for judging bundling quality."""
    mids = np.array([p.points[len(p.points) // 2] for p in polylines])
    if not len(mids):
        return 0
    if radius is None:
        span = max(
            float(mids[:, 0].max() - mids[:, 0].min()),
            float(mids[:, 1].max() - mids[:, 1].min()),
            1e-9,
        )
        radius = 0.05 * span
    n = len(mids)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if math.hypot(*(mids[i] - mids[j])) <= radius:
                pi, pj = find(i), find(j)
                if pi != pj:
                    parent[pi] = pj
    return len({find(i) for i in range(n)})
