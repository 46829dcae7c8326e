"""Coverage path generation.

The continuous planners build a breadth-first spanning skeleton over the
face-adjacency graph (minus blocked edges) and walk counter-clockwise
around it through the per-face quad subdivision: at each quad, the walk
either advances to the next quad of the same face or, when the mesh edge
ahead is a skeleton edge, crosses into the facing quad of the neighbor
face.  The resulting closed cycle visits every quad centroid exactly once
and crosses each skeleton edge exactly twice, never a blocked edge.

The back-and-forth planners lay parallel tracks a footprint apart, clip
them to the region outline, and join consecutive tracks along the
boundary.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .errors import UnreachableRegionError
from .geometry import boundary_walk, clip_line_to_loops, loops_bbox
from .mesh import DualGraph, TriMesh, quad_centroids
from .partition import Partition
from .sonar import SonarConfig, opening_angle
from .terrain import RoiPolygon


@dataclass(frozen=True)
class CoveragePath:
    """Ordered waypoint list with per-waypoint sonar annotations.

    A segment inherits the annotations (aperture, region, sonar-active
    flag) of its start waypoint.  Closed paths do not repeat the first
    waypoint; the closing segment is implicit.
    """

    waypoints: np.ndarray          # (N, 2)
    theta_deg: np.ndarray          # (N,)
    region_id: np.ndarray          # (N,) int
    closed: bool
    angle_switches: tuple[int, ...]
    planner: str
    config_hash: str = ""
    face_ids: np.ndarray | None = None   # quad tour only: face per waypoint
    active: np.ndarray | None = None     # sonar on/off per segment start

    def __post_init__(self):
        n = len(self.waypoints)
        if n < 2:
            raise ValueError("a coverage path needs at least 2 waypoints")
        if len(self.theta_deg) != n or len(self.region_id) != n:
            raise ValueError("annotation arrays must match the waypoint count")
        d = np.diff(self.waypoints, axis=0)
        if np.any(np.hypot(d[:, 0], d[:, 1]) == 0.0):
            raise ValueError("consecutive waypoints must be distinct")
        if self.closed and np.all(self.waypoints[0] == self.waypoints[-1]):
            raise ValueError("closed paths must not repeat the first waypoint")
        for name in ("waypoints", "theta_deg", "region_id", "face_ids", "active"):
            arr = getattr(self, name)
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n_waypoints(self) -> int:
        return len(self.waypoints)

    def segment_starts(self) -> np.ndarray:
        """Indices of segment start waypoints (includes the closing one)."""
        n = self.n_waypoints
        return np.arange(n if self.closed else n - 1)

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        """(start, end) point arrays for every segment."""
        p = self.waypoints
        if self.closed:
            return p, np.roll(p, -1, axis=0)
        return p[:-1], p[1:]

    def length(self) -> float:
        a, b = self.segments()
        return float(np.sum(np.hypot(*(b - a).T)))


def _switches_from_theta(theta: np.ndarray, closed: bool) -> tuple[int, ...]:
    n = len(theta)
    out = []
    start = 0 if closed else 1
    for i in range(start, n):
        if theta[i] != theta[i - 1]:
            out.append(i)
    return tuple(out)


@dataclass(frozen=True)
class SkeletonTree:
    """Breadth-first spanning tree of the (filtered) face-adjacency graph."""

    root: int
    parent: np.ndarray            # parent face per face, -1 at the root
    tree_edges: frozenset[int]    # mesh-edge ids used by the tree

    def __post_init__(self):
        self.parent.setflags(write=False)

    @property
    def n_faces(self) -> int:
        return len(self.parent)


def build_skeleton(dual: DualGraph, blocked: frozenset[int] | set[int] = frozenset(),
                   seed_face: int = 0, partition: Partition | None = None) -> SkeletonTree:
    """BFS spanning tree rooted at seed_face, ignoring blocked links.

    Children are visited in ascending face id, which makes the tree (and
    every path derived from it) deterministic.  Raises
    UnreachableRegionError when the filtered graph is disconnected.
    """
    adj: list[list[tuple[int, int]]] = [[] for _ in range(dual.n_faces)]
    for a, b, e in dual.links:
        if int(e) in blocked:
            continue
        adj[a].append((int(b), int(e)))
        adj[b].append((int(a), int(e)))
    for lst in adj:
        lst.sort()

    parent = np.full(dual.n_faces, -1, dtype=np.int64)
    seen = np.zeros(dual.n_faces, dtype=bool)
    seen[seed_face] = True
    tree_edges: set[int] = set()
    queue = [seed_face]
    while queue:
        nxt: list[int] = []
        for f in queue:
            for g, e in adj[f]:
                if not seen[g]:
                    seen[g] = True
                    parent[g] = f
                    tree_edges.add(e)
                    nxt.append(g)
        queue = sorted(nxt)
    if not seen.all():
        face = int(np.argmax(~seen))
        region = None
        if partition is not None:
            region = int(partition.face_region[face])
        raise UnreachableRegionError(face, region)
    return SkeletonTree(seed_face, parent, frozenset(tree_edges))


def _tour(mesh: TriMesh, tree: SkeletonTree,
          start: tuple[int, int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Quad-centroid cycle around the skeleton.

    Returns (waypoints (3F, 2), face id per waypoint).  Asserts that every
    quad is visited exactly once.
    """
    faces = mesh.faces
    face_edges = mesh.face_edges
    edge_faces = mesh.edge_faces
    qc = quad_centroids(mesh)
    n_faces = mesh.n_faces

    # corner index of each vertex within each face, for edge crossings
    corner_of: list[dict[int, int]] = [
        {int(faces[f, i]): i for i in range(3)} for f in range(n_faces)]

    tree_edges = tree.tree_edges
    if start is None:
        start = (tree.root, 0)
    f, i = start
    visited = np.zeros((n_faces, 3), dtype=bool)
    order: list[tuple[int, int]] = []
    for _ in range(3 * n_faces):
        if visited[f, i]:
            raise AssertionError("quad revisited: skeleton/quad inconsistency")
        visited[f, i] = True
        order.append((f, i))
        e = int(face_edges[f, i])
        if e in tree_edges:
            a, b = edge_faces[e]
            g = int(b) if int(a) == f else int(a)
            v = int(faces[f, i])
            f, i = g, corner_of[g][v]
        else:
            i = (i + 1) % 3
        if (f, i) == start:
            break
    if len(order) != 3 * n_faces or not visited.all():
        raise AssertionError(
            f"tour covered {len(order)} of {3 * n_faces} quads: "
            "skeleton/quad inconsistency")
    fids = np.asarray([f for f, _ in order], dtype=np.int64)
    pts = np.asarray([qc[f, i] for f, i in order])
    return pts, fids


def circumnavigate(mesh: TriMesh, tree: SkeletonTree) -> CoveragePath:
    """Geometry-only tour of all quad centroids (no aperture annotations)."""
    pts, fids = _tour(mesh, tree)
    n = len(pts)
    return CoveragePath(pts, np.zeros(n), np.zeros(n, dtype=np.int64), True,
                        (), "tour", face_ids=fids)


def plan_nuc(mesh: TriMesh, dual: DualGraph, sonar_cfg: SonarConfig,
             global_mean_depth: float | None = None, seed_face: int = 0,
             config_hash: str = "") -> CoveragePath:
    """Single-aperture tour: one region, aperture from the mesh mean depth."""
    if global_mean_depth is None:
        global_mean_depth = mesh.mean_depth()
    tree = build_skeleton(dual, frozenset(), seed_face)
    pts, fids = _tour(mesh, tree)
    theta = opening_angle(sonar_cfg.footprint, global_mean_depth, sonar_cfg.theta_max)
    n = len(pts)
    return CoveragePath(pts, np.full(n, theta), np.zeros(n, dtype=np.int64), True,
                        (), "nuc", config_hash, face_ids=fids)


def plan_mdnuc(mesh: TriMesh, dual: DualGraph, partition: Partition,
               sonar_cfg: SonarConfig, seed_face: int = 0,
               config_hash: str = "") -> CoveragePath:
    """Depth-adaptive tour: blocked edges avoided, aperture per region."""
    tree = build_skeleton(dual, partition.blocked, seed_face, partition)
    unused = [pair for pair, gate in partition.gates.items()
              if gate not in tree.tree_edges]
    if unused:
        warnings.warn(
            f"gate(s) {sorted(unused)} exist but the skeleton does not cross "
            "them (cyclic region adjacency)", stacklevel=2)
    pts, fids = _tour(mesh, tree)
    region = partition.face_region[fids]
    thetas = np.asarray([
        opening_angle(sonar_cfg.footprint, partition.region_mean_depths[r],
                      sonar_cfg.theta_max)
        for r in range(partition.n_regions)])
    theta = thetas[region]
    switches = _switches_from_theta(theta, closed=True)
    return CoveragePath(pts, theta, region.astype(np.int64), True, switches,
                        "mdnuc", config_hash, face_ids=fids)


# ---------------------------------------------------------------------------
# Back-and-forth baselines
# ---------------------------------------------------------------------------

def _resolve_heading(heading: str, bbox: tuple[float, float, float, float]) -> str:
    if heading in ("x", "y"):
        return heading
    if heading != "auto":
        raise ValueError("heading must be 'x', 'y', or 'auto'")
    return "y" if (bbox[3] - bbox[1]) >= (bbox[2] - bbox[0]) else "x"


def _bf_over_loops(loops: list[np.ndarray], w: float, heading: str, theta: float,
                   region_id: int, planner: str, config_hash: str,
                   sweep_connectors: bool = True,
                   context: str = "ROI") -> CoveragePath | None:
    bbox = loops_bbox(loops)
    axis = _resolve_heading(heading, bbox)
    if axis == "y":
        d = np.asarray([0.0, 1.0])
        lo, hi = bbox[0], bbox[2]
    else:
        d = np.asarray([1.0, 0.0])
        lo, hi = bbox[1], bbox[3]

    if hi - lo <= w:
        positions = [0.5 * (lo + hi)]
        warnings.warn(
            f"{context} narrower than the footprint ({hi - lo:.2f} m <= {w:.2f} m); "
            "planning a single track", stacklevel=3)
    else:
        positions = []
        pos = lo + w / 2.0
        while pos <= hi - w / 2.0 + 1e-9:
            positions.append(pos)
            pos += w

    points: list[np.ndarray] = []
    flags: list[bool] = []
    prev_exit: tuple[np.ndarray, tuple[int, int], float] | None = None

    for ti, pos in enumerate(positions):
        base = np.asarray([pos, 0.0]) if axis == "y" else np.asarray([0.0, pos])
        hits = None
        for nudge in range(6):
            try:
                hits = clip_line_to_loops(base, d, loops)
                break
            except ValueError:
                shift = (nudge + 1) * 1e-7 * w
                base = base + (np.asarray([shift, 0.0]) if axis == "y"
                               else np.asarray([0.0, shift]))
        if hits is None or not hits:
            continue
        segs = [(hits[k], hits[k + 1]) for k in range(0, len(hits) - 1, 2)]
        if ti % 2 == 1:
            segs = [(b, a) for a, b in reversed(segs)]
        for si, (ent, ext) in enumerate(segs):
            p_ent = base + ent[0] * d
            p_ext = base + ext[0] * d
            if prev_exit is not None and si == 0:
                # boundary-following connector between consecutive tracks
                exit_pt, (exit_loop, exit_edge), exit_t = prev_exit
                ent_loop, ent_edge = ent[2]
                if exit_loop == ent_loop:
                    mids = boundary_walk(loops[exit_loop], exit_edge, exit_t,
                                         ent_edge, ent[1])
                    for m in mids:
                        points.append(np.asarray(m))
                        flags.append(sweep_connectors)
            points.append(p_ent)
            flags.append(True)
            points.append(p_ext)
            flags.append(sweep_connectors)  # governs the connector that follows
            prev_exit = (p_ext, ext[2], ext[1])

    if not points:
        return None
    pts_all = np.asarray(points)
    keep_idx = [0]
    for i in range(1, len(pts_all)):
        if np.hypot(*(pts_all[i] - pts_all[keep_idx[-1]])) > 1e-9:
            keep_idx.append(i)
    pts = pts_all[keep_idx]
    flags_arr = np.asarray(flags)[keep_idx]
    if len(pts) < 2:
        return None
    n = len(pts)
    return CoveragePath(pts, np.full(n, theta), np.full(n, region_id, dtype=np.int64),
                        False, (), planner, config_hash, active=flags_arr)


def plan_bf(roi: RoiPolygon, w: float, heading: str, sonar_cfg: SonarConfig,
            global_mean_depth: float, sweep_connectors: bool = True,
            config_hash: str = "") -> CoveragePath:
    """Parallel tracks w apart, clipped to the ROI, serpentine order.

    The first track is inset w/2 from the bounding edge; consecutive
    tracks are joined along the ROI boundary.  The aperture is constant,
    sized for the global mean depth.
    """
    theta = opening_angle(w, global_mean_depth, sonar_cfg.theta_max)
    path = _bf_over_loops([roi.vertices], w, heading, theta, 0, "bf",
                          config_hash, sweep_connectors)
    if path is None:
        raise ValueError("ROI produced no back-and-forth tracks")
    return path


def region_outline_loops(mesh: TriMesh, faces: Sequence[int]) -> list[np.ndarray]:
    """Boundary loop(s) of a face set via directed-edge cancellation.

    Interior edges appear in both directions and cancel; the remaining
    directed edges chain into closed loops (outer boundaries CCW, holes
    CW).  Loops are returned as vertex coordinate arrays.
    """
    directed: set[tuple[int, int]] = set()
    for f in faces:
        tri = mesh.faces[f]
        for i in range(3):
            a, b = int(tri[i]), int(tri[(i + 1) % 3])
            if (b, a) in directed:
                directed.remove((b, a))
            else:
                directed.add((a, b))
    nxt: dict[int, list[int]] = {}
    for a, b in directed:
        nxt.setdefault(a, []).append(b)
    for lst in nxt.values():
        lst.sort()
    loops: list[np.ndarray] = []
    remaining = set(directed)
    while remaining:
        start = min(remaining)
        loop_v = [start[0]]
        a, b = start
        remaining.remove(start)
        while b != loop_v[0]:
            loop_v.append(b)
            cands = [c for c in nxt.get(b, []) if (b, c) in remaining]
            if not cands:
                raise AssertionError("open region boundary chain")
            c = cands[0]
            remaining.remove((b, c))
            a, b = b, c
        loops.append(mesh.vertices[loop_v, :2])
    return loops


def plan_mdbf(partition: Partition, mesh: TriMesh, w: float,
              sonar_cfg: SonarConfig, heading: str = "auto",
              sweep_connectors: bool = True,
              config_hash: str = "") -> list[CoveragePath]:
    """Independent back-and-forth sweep per region, aperture per region."""
    paths: list[CoveragePath] = []
    for r in range(partition.n_regions):
        faces = partition.region_faces[r]
        loops = region_outline_loops(mesh, faces)
        theta = opening_angle(w, partition.region_mean_depths[r], sonar_cfg.theta_max)
        path = _bf_over_loops(loops, w, heading, theta, r, "mdbf", config_hash,
                              sweep_connectors, context=f"region {r}")
        if path is None:
            # degenerate region: single pass through its first face centroid
            warnings.warn(f"region {r} is too small for a track; planning a "
                          "single centroid pass", stacklevel=2)
            c = mesh.face_centroid(faces[0])
            bbox = loops_bbox(loops)
            axis = _resolve_heading(heading, bbox)
            d = np.asarray([0.0, 1.0]) if axis == "y" else np.asarray([1.0, 0.0])
            base = np.asarray([c[0], 0.0]) if axis == "y" else np.asarray([0.0, c[1]])
            hits = None
            for nudge in range(6):
                try:
                    hits = clip_line_to_loops(base, d, loops)
                    break
                except ValueError:
                    shift = (nudge + 1) * 1e-7 * w
                    base = base + (np.asarray([shift, 0.0]) if axis == "y"
                                   else np.asarray([0.0, shift]))
            if hits and len(hits) >= 2:
                p0 = base + hits[0][0] * d
                p1 = base + hits[1][0] * d
                pts = np.asarray([p0, p1])
                path = CoveragePath(pts, np.full(2, theta),
                                    np.full(2, r, dtype=np.int64), False, (),
                                    "mdbf", config_hash,
                                    active=np.asarray([True, True]))
        if path is not None:
            paths.append(path)
    return paths


def resample(path: CoveragePath, step: float) -> CoveragePath:
    """Arc-length resampling at spacing <= step, preserving corner points.

    Each segment is split into ceil(length / step) equal pieces; samples
    inherit the segment's annotations.  Closed paths stay closed (the
    duplicate terminal point is dropped).
    """
    if step <= 0:
        raise ValueError("step must be > 0")
    starts, ends = path.segments()
    seg_idx = path.segment_starts()
    pts: list[np.ndarray] = [path.waypoints[0]]
    theta: list[float] = [float(path.theta_deg[0])]
    region: list[int] = [int(path.region_id[0])]
    active: list[bool] = [bool(path.active[0]) if path.active is not None else True]
    for k, (a, b) in enumerate(zip(starts, ends)):
        i = seg_idx[k]
        length = float(np.hypot(*(b - a)))
        n = max(1, int(math.ceil(length / step - 1e-12)))
        for j in range(1, n + 1):
            pts.append(a + (j / n) * (b - a))
            theta.append(float(path.theta_deg[i]))
            region.append(int(path.region_id[i]))
            active.append(bool(path.active[i]) if path.active is not None else True)
    if path.closed:
        pts.pop()
        theta.pop()
        region.pop()
        active.pop()
    out_theta = np.asarray(theta)
    out = CoveragePath(np.asarray(pts), out_theta,
                       np.asarray(region, dtype=np.int64), path.closed,
                       _switches_from_theta(out_theta, path.closed),
                       path.planner, path.config_hash,
                       active=np.asarray(active))
    return out


def optimize_skeleton(tree: SkeletonTree, iterations: int = 0) -> SkeletonTree:
    """Post-processing hook for local skeleton optimization.

    Intentionally a no-op: the deterministic breadth-first skeleton is the
    supported construction, and this hook only reserves the API surface
    for stochastic refinement.
    """
    return tree


# ---------------------------------------------------------------------------
# Serialization (formats documented in docs/formats.md)
# ---------------------------------------------------------------------------

def save_path_csv(path: CoveragePath, stream: IO[str]) -> None:
    """Fixed 6-decimal CSV; a closed path repeats its first row at the end."""
    stream.write("x,y,theta_deg,region_id,switch_flag\n")
    switch = set(path.angle_switches)

    def row(i: int) -> str:
        return (f"{path.waypoints[i, 0]:.6f},{path.waypoints[i, 1]:.6f},"
                f"{path.theta_deg[i]:.6f},{int(path.region_id[i])},"
                f"{1 if i in switch else 0}\n")

    for i in range(path.n_waypoints):
        stream.write(row(i))
    if path.closed:
        stream.write(row(0))


def load_path_csv(stream: IO[str], planner: str = "file",
                  config_hash: str = "") -> CoveragePath:
    header = stream.readline().strip()
    if header != "x,y,theta_deg,region_id,switch_flag":
        raise ValueError(f"unexpected path CSV header: {header!r}")
    rows = []
    for line in stream:
        line = line.strip()
        if not line:
            continue
        x, y, t, r, s = line.split(",")
        rows.append((float(x), float(y), float(t), int(r), int(s)))
    if len(rows) < 2:
        raise ValueError("path CSV has fewer than 2 waypoints")
    closed = rows[0][:4] == rows[-1][:4]
    if closed:
        rows = rows[:-1]
    pts = np.asarray([(r[0], r[1]) for r in rows])
    theta = np.asarray([r[2] for r in rows])
    region = np.asarray([r[3] for r in rows], dtype=np.int64)
    switches = tuple(i for i, r in enumerate(rows) if r[4] == 1)
    return CoveragePath(pts, theta, region, closed, switches, planner, config_hash)


def path_to_geojson(path: CoveragePath) -> str:
    coords = [[round(float(x), 6), round(float(y), 6)] for x, y in path.waypoints]
    if path.closed:
        coords.append(coords[0])
    feature = {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": {
            "planner": path.planner,
            "config_hash": path.config_hash,
            "closed": path.closed,
            "theta_deg": [round(float(t), 6) for t in path.theta_deg],
            "region_id": [int(r) for r in path.region_id],
            "angle_switches": list(path.angle_switches),
        },
    }
    return json.dumps(feature, sort_keys=True, indent=2)
