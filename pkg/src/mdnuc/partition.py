"""Depth-range partition of the mesh: regions, shared edges, gates, blocks.

Faces are labeled by the depth range containing their mean depth, then
split into connected components.  For every adjacent region pair exactly
one shared edge (the one with the smallest cross-edge depth gradient)
stays traversable as the gate; the remaining shared edges are blocked.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PartitionError
from .mesh import DualGraph, TriMesh, _dual_components
from .terrain import DepthRange, validate_ranges


@dataclass(frozen=True)
class Partition:
    """Frozen result of region labeling and gating."""

    ranges: tuple[DepthRange, ...]
    face_region: np.ndarray                      # region id per face
    region_faces: tuple[tuple[int, ...], ...]    # faces per region
    region_range: tuple[int, ...]                # range index per region
    region_mean_depths: tuple[float, ...]        # area-weighted, per region
    shared: dict[tuple[int, int], tuple[int, ...]]   # region pair -> edge ids
    gates: dict[tuple[int, int], int]                # region pair -> edge id
    blocked: frozenset[int]

    def __post_init__(self):
        self.face_region.setflags(write=False)

    @property
    def n_regions(self) -> int:
        return len(self.region_faces)

    def to_json(self) -> str:
        """Deterministic JSON rendering for inspection and golden tests."""
        payload = {
            "ranges": [[r.d_min, r.d_max] for r in self.ranges],
            "face_region": [int(r) for r in self.face_region],
            "regions": [
                {
                    "id": i,
                    "range": int(self.region_range[i]),
                    "faces": list(self.region_faces[i]),
                    "mean_depth": self.region_mean_depths[i],
                }
                for i in range(self.n_regions)
            ],
            "shared": {f"{a}-{b}": list(edges) for (a, b), edges in sorted(self.shared.items())},
            "gates": {f"{a}-{b}": gate for (a, b), gate in sorted(self.gates.items())},
            "blocked": sorted(self.blocked),
        }
        return json.dumps(payload, sort_keys=True, indent=2)


def assign_regions(mesh: TriMesh, ranges: list[DepthRange]) -> np.ndarray:
    """Label each face with its region id.

    A face's range is the one containing its mean depth ([d_min, d_max),
    last range closed above); faces in the same range form one region per
    connected component of same-range adjacency.  Region ids follow the
    ascending smallest face id of each component.
    """
    ranges = validate_ranges(ranges)
    depths = mesh.face_mean_depths
    range_idx = np.full(mesh.n_faces, -1, dtype=np.int64)
    for k, r in enumerate(ranges):
        closed = k == len(ranges) - 1
        if closed:
            hit = (depths >= r.d_min) & (depths <= r.d_max)
        else:
            hit = (depths >= r.d_min) & (depths < r.d_max)
        range_idx[np.where(hit & (range_idx < 0))[0]] = k
    if np.any(range_idx < 0):
        bad = int(np.argmax(range_idx < 0))
        raise PartitionError(
            f"uncovered depth: face {bad} has mean depth {depths[bad]:.3f} m, "
            "outside all supplied ranges")

    # connected components through same-range adjacency
    adj: list[list[int]] = [[] for _ in range(mesh.n_faces)]
    for e in mesh.interior_edges():
        a, b = mesh.edge_faces[e]
        if range_idx[a] == range_idx[b]:
            adj[a].append(int(b))
            adj[b].append(int(a))
    face_region = np.full(mesh.n_faces, -1, dtype=np.int64)
    next_region = 0
    for start in range(mesh.n_faces):  # ascending smallest-face-id discovery
        if face_region[start] >= 0:
            continue
        stack = [start]
        face_region[start] = next_region
        while stack:
            f = stack.pop()
            for g in adj[f]:
                if face_region[g] < 0:
                    face_region[g] = next_region
                    stack.append(g)
        next_region += 1

    populated = set(int(k) for k in np.unique(range_idx))
    empty = [k for k in range(len(ranges)) if k not in populated]
    if empty:
        warnings.warn(
            f"depth range(s) {empty} contain no faces and yield no regions",
            stacklevel=2)
    return face_region


def find_shared_edges(mesh: TriMesh, face_region: np.ndarray) -> dict[tuple[int, int], tuple[int, ...]]:
    """Interior edges whose two faces sit in different regions, per pair."""
    shared: dict[tuple[int, int], list[int]] = {}
    for e in mesh.interior_edges():
        a, b = (int(x) for x in mesh.edge_faces[e])
        ra, rb = int(face_region[a]), int(face_region[b])
        if ra != rb:
            key = (min(ra, rb), max(ra, rb))
            shared.setdefault(key, []).append(int(e))
    return {k: tuple(sorted(v)) for k, v in sorted(shared.items())}


def edge_slope(mesh: TriMesh, edge_id: int, mode: str = "face-gradient") -> float:
    """Slope score used for gate selection (lower is better).

    "face-gradient": |difference of adjacent face mean depths| divided by
    the horizontal distance between the face centroids (the cross-edge
    depth gradient).  "edge-endpoints": |difference of the edge endpoint
    depths| divided by the edge length.
    """
    if mode == "face-gradient":
        a, b = mesh.edge_faces[edge_id]
        if b < 0:
            raise ValueError(f"edge {edge_id} is a boundary edge")
        dz = abs(float(mesh.face_mean_depths[a] - mesh.face_mean_depths[b]))
        dist = float(np.linalg.norm(mesh.face_centroid(int(a)) - mesh.face_centroid(int(b))))
        return dz / dist
    if mode == "edge-endpoints":
        va, vb = mesh.edges[edge_id]
        dz = abs(float(mesh.vertices[va, 2] - mesh.vertices[vb, 2]))
        length = float(np.linalg.norm(mesh.vertices[va, :2] - mesh.vertices[vb, :2]))
        return dz / length
    raise ValueError(f"unknown slope mode {mode!r}")


def select_gates(mesh: TriMesh, shared: dict[tuple[int, int], tuple[int, ...]],
                 slope_mode: str = "face-gradient") -> tuple[dict[tuple[int, int], int], frozenset[int]]:
    """Pick the lowest-slope shared edge per region pair; block the rest.

    Ties break toward the smallest mesh-edge id, which keeps the result
    stable across runs.
    """
    gates: dict[tuple[int, int], int] = {}
    blocked: set[int] = set()
    for pair, edges in sorted(shared.items()):
        best = min(edges, key=lambda e: (edge_slope(mesh, e, slope_mode), e))
        gates[pair] = best
        blocked.update(e for e in edges if e != best)
    return gates, frozenset(blocked)


def region_mean_depth(mesh: TriMesh, faces: tuple[int, ...] | list[int]) -> float:
    """Area-weighted mean of the face mean depths over one region."""
    idx = np.asarray(faces, dtype=np.int64)
    if len(idx) == 0:
        raise PartitionError("region has no faces")
    areas = mesh.face_areas[idx]
    return float(np.sum(areas * mesh.face_mean_depths[idx]) / np.sum(areas))


def partition_mesh(mesh: TriMesh, ranges: list[DepthRange],
                   slope_mode: str = "face-gradient") -> Partition:
    """Full pipeline: label, find shared edges, gate, and verify connectivity."""
    face_region = assign_regions(mesh, ranges)
    n_regions = int(face_region.max()) + 1
    region_faces = tuple(
        tuple(int(f) for f in np.nonzero(face_region == r)[0]) for r in range(n_regions))
    depths = mesh.face_mean_depths

    ranges = validate_ranges(ranges)

    def range_of(depth: float) -> int:
        for k, r in enumerate(ranges):
            if r.d_min <= depth < r.d_max or (k == len(ranges) - 1 and depth == r.d_max):
                return k
        raise PartitionError(f"depth {depth} outside all ranges")

    region_range = tuple(range_of(float(depths[faces[0]])) for faces in region_faces)
    region_means = tuple(region_mean_depth(mesh, faces) for faces in region_faces)
    shared = find_shared_edges(mesh, face_region)
    gates, blocked = select_gates(mesh, shared, slope_mode)

    part = Partition(tuple(ranges), face_region, region_faces, region_range,
                     region_means, shared, gates, blocked)
    _assert_gating_keeps_connectivity(mesh, part)
    return part


def _assert_gating_keeps_connectivity(mesh: TriMesh, part: Partition) -> None:
    """Gates must preserve one dual link per adjacent region pair."""
    from .mesh import build_dual

    links = build_dual(mesh).links
    keep = np.asarray([e not in part.blocked for e in links[:, 2]])
    labels = _dual_components(mesh.n_faces, links[keep])
    if mesh.n_faces and labels.max() > 0:
        raise PartitionError(
            "gating disconnected the mesh although the region adjacency graph "
            "is connected; this indicates an internal error")
