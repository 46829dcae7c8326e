"""Small planar geometry helpers used by the mesh and planner modules.

All functions work on plain floats / numpy arrays and are deterministic.
Polygons are open vertex lists (no repeated terminal vertex); the even-odd
rule is used for containment so hole loops can simply be appended to the
loop list.
"""

from __future__ import annotations

import numpy as np


def polygon_signed_area(vertices: np.ndarray) -> float:
    """Shoelace signed area; positive for counter-clockwise vertex order."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def ensure_ccw(vertices: np.ndarray) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    if polygon_signed_area(v) < 0.0:
        return v[::-1].copy()
    return v


def polygon_is_simple(vertices: np.ndarray) -> bool:
    """True when no two non-adjacent edges intersect (O(n^2) scan)."""
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            c, d = v[j], v[(j + 1) % n]
            if _segments_intersect(a, b, c, d):
                return False
    return True


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_intersect(a, b, c, d) -> bool:
    """Proper or improper intersection of closed segments ab and cd."""
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return True
    # collinear / endpoint touches
    for p, q, r in ((a, b, c), (a, b, d), (c, d, a), (c, d, b)):
        if _orient(p, q, r) == 0 and min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) \
                and min(p[1], q[1]) <= r[1] <= max(p[1], q[1]):
            return True
    return False


def segments_cross(p: np.ndarray, q: np.ndarray, a: np.ndarray, b: np.ndarray) -> bool:
    """Proper crossing test with shared-endpoint exclusion.

    Returns True only when the open segments pq and ab cross at a single
    interior point.  Touching at an endpoint does not count.
    """
    o1 = _orient(p, q, a)
    o2 = _orient(p, q, b)
    o3 = _orient(a, b, p)
    o4 = _orient(a, b, q)
    return ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) \
        and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0


def points_in_polygon(xs: np.ndarray, ys: np.ndarray, loops: list[np.ndarray]) -> np.ndarray:
    """Vectorized even-odd containment of points against one or more loops."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    inside = np.zeros(xs.shape, dtype=bool)
    for loop in loops:
        v = np.asarray(loop, dtype=float)
        x1, y1 = v[:, 0], v[:, 1]
        x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
        for ex1, ey1, ex2, ey2 in zip(x1, y1, x2, y2):
            cond = (ey1 > ys) != (ey2 > ys)
            with np.errstate(divide="ignore", invalid="ignore"):
                xcross = ex1 + (ys - ey1) * (ex2 - ex1) / (ey2 - ey1)
            hit = cond & (xs < xcross)
            inside ^= hit
    return inside


def point_in_polygon(x: float, y: float, loops: list[np.ndarray]) -> bool:
    return bool(points_in_polygon(np.asarray([x]), np.asarray([y]), loops)[0])


def loops_bbox(loops: list[np.ndarray]) -> tuple[float, float, float, float]:
    allv = np.vstack([np.asarray(l, dtype=float) for l in loops])
    return (float(allv[:, 0].min()), float(allv[:, 1].min()),
            float(allv[:, 0].max()), float(allv[:, 1].max()))


def clip_line_to_loops(point: np.ndarray, direction: np.ndarray,
                       loops: list[np.ndarray]) -> list[tuple[float, float, tuple[int, int]]]:
    """Intersect the infinite line `point + t*direction` with loop edges.

    Returns intersections sorted by line parameter t, each as
    ``(t, edge_t, (loop_index, edge_index))`` where edge_t is the parameter
    along the loop edge.  Raises ValueError when the crossing count is odd
    (line through a vertex); callers should nudge the line and retry.
    """
    p = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)
    hits: list[tuple[float, float, tuple[int, int]]] = []
    for li, loop in enumerate(loops):
        v = np.asarray(loop, dtype=float)
        n = len(v)
        for ei in range(n):
            a = v[ei]
            b = v[(ei + 1) % n]
            e = b - a
            denom = d[0] * e[1] - d[1] * e[0]
            if denom == 0.0:
                continue
            w = a - p
            t = (w[0] * e[1] - w[1] * e[0]) / denom
            u = (d[1] * w[0] - d[0] * w[1]) / denom
            if 0.0 <= u < 1.0:
                hits.append((float(t), float(u), (li, ei)))
    hits.sort(key=lambda h: h[0])
    if len(hits) % 2 != 0:
        raise ValueError("line passes through a polygon vertex")
    return hits


def boundary_walk(loop: np.ndarray, from_edge: int, from_t: float,
                  to_edge: int, to_t: float) -> list[np.ndarray]:
    """Intermediate loop vertices along the shorter boundary arc.

    Both end points sit on loop edges (edge index + parameter in [0, 1)).
    The returned list excludes the end points themselves.
    """
    v = np.asarray(loop, dtype=float)
    n = len(v)
    seglen = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)

    def forward(e0: int, t0: float, e1: int, t1: float):
        if e0 == e1 and t1 >= t0:
            return [], (t1 - t0) * seglen[e0]
        pts = [v[(e0 + 1) % n]]
        length = (1.0 - t0) * seglen[e0]
        e = (e0 + 1) % n
        while e != e1:
            length += seglen[e]
            pts.append(v[(e + 1) % n])
            e = (e + 1) % n
        length += t1 * seglen[e1]
        return pts, length

    fwd_pts, fwd_len = forward(from_edge, from_t, to_edge, to_t)
    bwd_pts, bwd_len = forward(to_edge, to_t, from_edge, from_t)
    if fwd_len <= bwd_len:
        return fwd_pts
    return list(reversed(bwd_pts))


def dedupe_consecutive(points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Drop consecutive points closer than tol (keeps the first of a run)."""
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return pts
    keep = [0]
    for i in range(1, len(pts)):
        if np.hypot(*(pts[i] - pts[keep[-1]])) > tol:
            keep.append(i)
    return pts[keep]
