"""Footprint-sized triangle mesh over the ROI, plus adjacency and quad split.

The remesh is a structured, axis-aligned lattice of right isosceles
triangles: squares of side s = h / sqrt(2) split along alternating
diagonals, where the hypotenuse h is sized just under twice the sensor
footprint width.  Faces are kept when their centroid falls inside the ROI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .errors import MeshError
from .geometry import points_in_polygon
from .terrain import Heightfield, RoiPolygon, depth_at_many


def footprint_target(n_beams: int, resolution: float) -> float:
    """Desired seafloor footprint width: beam count times sounding spacing."""
    if n_beams < 2:
        raise ValueError("n_beams must be >= 2")
    if resolution <= 0:
        raise ValueError("resolution must be > 0")
    return n_beams * resolution


@dataclass(frozen=True)
class TriMesh:
    """Triangulated survey region with cached adjacency.

    vertices: (NV, 3) float array of (x, y, depth).
    faces: (NF, 3) int array of CCW vertex indices.
    edges: (NE, 2) int array of vertex pairs (vmin < vmax), sorted
        lexicographically; edge ids are row indices.
    edge_faces: (NE, 2) adjacent face ids, -1 when the edge is on the
        boundary.
    face_edges: (NF, 3); slot i holds the edge id between face vertex i
        and vertex (i + 1) % 3.
    n_dropped: lattice faces discarded because their centroid fell outside
        the ROI (reported in plan summaries).
    """

    vertices: np.ndarray
    faces: np.ndarray
    edges: np.ndarray
    edge_faces: np.ndarray
    face_edges: np.ndarray
    n_dropped: int = 0

    def __post_init__(self):
        for name in ("vertices", "faces", "edges", "edge_faces", "face_edges"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def face_points(self, face_id: int) -> np.ndarray:
        """(3, 2) xy corners of a face."""
        return self.vertices[self.faces[face_id], :2]

    def face_centroid(self, face_id: int) -> np.ndarray:
        return self.face_points(face_id).mean(axis=0)

    @property
    def face_centroids(self) -> np.ndarray:
        return self.vertices[self.faces, :2].mean(axis=1)

    @property
    def face_mean_depths(self) -> np.ndarray:
        """Arithmetic mean of the three vertex depths, per face."""
        return self.vertices[self.faces, 2].mean(axis=1)

    @property
    def face_areas(self) -> np.ndarray:
        p = self.vertices[self.faces, :2]
        a, b, c = p[:, 0], p[:, 1], p[:, 2]
        return 0.5 * np.abs((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                            - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    def mean_depth(self) -> float:
        """Area-weighted mean of face mean depths over the whole mesh."""
        areas = self.face_areas
        return float(np.sum(areas * self.face_mean_depths) / np.sum(areas))

    def interior_edges(self) -> np.ndarray:
        """Edge ids with two adjacent faces."""
        return np.nonzero(self.edge_faces[:, 1] >= 0)[0]

    def boundary_edges(self) -> np.ndarray:
        return np.nonzero(self.edge_faces[:, 1] < 0)[0]


@dataclass(frozen=True)
class FaceQuads:
    """The three corner quadrilaterals of one face.

    Quad i sits at face vertex i with corners (vertex, midpoint of the
    CCW-next edge, face centroid, midpoint of the CCW-previous edge).
    half_edges[i] lists the two (edge_id, vertex_id) halves the quad
    touches; the vertex id names the edge end the half is nearest to.
    """

    face_id: int
    corners: np.ndarray        # (3, 4, 2)
    centroids: np.ndarray      # (3, 2)
    half_edges: tuple[tuple[tuple[int, int], tuple[int, int]], ...]


def subdivide_quads(mesh: TriMesh, face_id: int) -> FaceQuads:
    """Split a face into 3 quads via its centroid and edge midpoints."""
    vids = mesh.faces[face_id]
    pts = mesh.vertices[vids, :2]
    centroid = pts.mean(axis=0)
    mids = 0.5 * (pts + np.roll(pts, -1, axis=0))  # mids[i] between corner i and i+1
    corners = np.empty((3, 4, 2))
    halves = []
    for i in range(3):
        corners[i, 0] = pts[i]
        corners[i, 1] = mids[i]
        corners[i, 2] = centroid
        corners[i, 3] = mids[(i - 1) % 3]
        e_next = int(mesh.face_edges[face_id, i])
        e_prev = int(mesh.face_edges[face_id, (i - 1) % 3])
        halves.append(((e_next, int(vids[i])), (e_prev, int(vids[i]))))
    centroids = corners.mean(axis=1)
    return FaceQuads(face_id, corners, centroids, tuple(halves))


def quad_centroids(mesh: TriMesh) -> np.ndarray:
    """(NF, 3, 2) quad centroids for every face, vectorized.

    Equivalent to stacking subdivide_quads(...).centroids over all faces:
    centroid of quad i = 7/12 v_i + 5/24 v_{i+1} + 5/24 v_{i-1}.
    """
    p = mesh.vertices[mesh.faces, :2]  # (NF, 3, 2)
    nxt = np.roll(p, -1, axis=1)
    prv = np.roll(p, 1, axis=1)
    return (7.0 / 12.0) * p + (5.0 / 24.0) * (nxt + prv)


@dataclass(frozen=True)
class DualGraph:
    """Face-adjacency graph; one link per interior mesh edge."""

    n_faces: int
    links: np.ndarray        # (NL, 3) rows: (face_a, face_b, mesh_edge_id)

    def __post_init__(self):
        self.links.setflags(write=False)

    def neighbors(self) -> list[list[tuple[int, int]]]:
        """Per face, sorted (neighbor_face, edge_id) pairs."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_faces)]
        for a, b, e in self.links:
            adj[a].append((int(b), int(e)))
            adj[b].append((int(a), int(e)))
        for lst in adj:
            lst.sort()
        return adj


def build_dual(mesh: TriMesh) -> DualGraph:
    """One node per face, one link per interior edge, labeled by edge id."""
    interior = mesh.interior_edges()
    links = np.column_stack([mesh.edge_faces[interior], interior]).astype(np.int64)
    return DualGraph(mesh.n_faces, links)


def _dual_components(n_faces: int, links: np.ndarray) -> np.ndarray:
    """Connected-component label per face via BFS over the links."""
    adj: list[list[int]] = [[] for _ in range(n_faces)]
    for a, b, _ in links:
        adj[a].append(int(b))
        adj[b].append(int(a))
    labels = np.full(n_faces, -1, dtype=np.int64)
    comp = 0
    for start in range(n_faces):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = comp
        while stack:
            f = stack.pop()
            for g in adj[f]:
                if labels[g] < 0:
                    labels[g] = comp
                    stack.append(g)
        comp += 1
    return labels


def remesh(hf: Heightfield, roi: RoiPolygon, w: float, shrink: float = 0.05) -> TriMesh:
    """Lattice remesh of the ROI at footprint scale.

    Hypotenuse h = 2w(1 - shrink); square side s = h / sqrt(2); each square
    splits along a checkerboard-alternating diagonal into two right
    isosceles triangles.  Faces whose centroid lies inside the ROI are
    kept; vertex depths are sampled from the heightfield.
    """
    if w <= 0:
        raise MeshError("footprint width w must be > 0")
    if not 0 < shrink < 0.5:
        raise MeshError("shrink must be in (0, 0.5)")
    roi.validate_inside(hf)
    h = 2.0 * w * (1.0 - shrink)
    s = h / math.sqrt(2.0)
    xmin, ymin, xmax, ymax = roi.bbox
    ncx = max(1, int(math.ceil((xmax - xmin) / s - 1e-12)))
    ncy = max(1, int(math.ceil((ymax - ymin) / s - 1e-12)))

    # candidate faces over the lattice; vertex ids on the (ncx+1)x(ncy+1) grid
    def vid(ix: int, iy: int) -> int:
        return iy * (ncx + 1) + ix

    cand_faces: list[tuple[int, int, int]] = []
    for iy in range(ncy):
        for ix in range(ncx):
            a = vid(ix, iy)
            b = vid(ix + 1, iy)
            c = vid(ix + 1, iy + 1)
            d = vid(ix, iy + 1)
            if (ix + iy) % 2 == 0:
                cand_faces.append((a, b, c))  # diagonal a-c
                cand_faces.append((a, c, d))
            else:
                cand_faces.append((a, b, d))  # diagonal b-d
                cand_faces.append((b, c, d))

    grid_x = xmin + s * (np.arange(ncx + 1))
    grid_y = ymin + s * (np.arange(ncy + 1))
    vx = np.tile(grid_x, ncy + 1)
    vy = np.repeat(grid_y, ncx + 1)

    faces_arr = np.asarray(cand_faces, dtype=np.int64)
    cx = vx[faces_arr].mean(axis=1)
    cy = vy[faces_arr].mean(axis=1)
    keep = points_in_polygon(cx, cy, [roi.vertices])
    if not keep.any():
        raise MeshError(
            f"ROI under-resolved: no face centroid falls inside the ROI at "
            f"footprint {w:g} m (lattice side {s:.2f} m); use a smaller footprint")
    n_dropped = int(len(faces_arr) - keep.sum())
    kept = faces_arr[keep]

    # compact vertex ids, preserving lattice order
    used = np.unique(kept)
    remap = np.full(len(vx), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    faces = remap[kept]
    xy = np.column_stack([vx[used], vy[used]])
    ex = hf.extent
    if (xy[:, 0].min() < ex[0] or xy[:, 0].max() > ex[2]
            or xy[:, 1].min() < ex[1] or xy[:, 1].max() > ex[3]):
        raise MeshError(
            "mesh vertices fall outside the heightfield; pad the terrain extent "
            f"by at least one lattice cell ({s:.2f} m) around the ROI")
    depths = depth_at_many(hf, xy[:, 0], xy[:, 1])
    vertices = np.column_stack([xy, depths])

    edges, edge_faces, face_edges = _build_edges(faces)
    mesh = TriMesh(vertices, faces, edges, edge_faces, face_edges, n_dropped)

    labels = _dual_components(mesh.n_faces, build_dual(mesh).links)
    if labels.max() > 0:
        raise MeshError(
            f"fragmented ROI: kept faces form {labels.max() + 1} disconnected "
            "patches; adjust the ROI or use a smaller footprint")
    return mesh


def _build_edges(faces: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pair_ids: dict[tuple[int, int], int] = {}
    pairs: list[tuple[int, int]] = []
    for tri in faces:
        for i in range(3):
            a, b = int(tri[i]), int(tri[(i + 1) % 3])
            key = (a, b) if a < b else (b, a)
            if key not in pair_ids:
                pair_ids[key] = len(pairs)
                pairs.append(key)
    order = sorted(range(len(pairs)), key=lambda k: pairs[k])
    rank = np.empty(len(pairs), dtype=np.int64)
    rank[order] = np.arange(len(pairs))
    edges = np.asarray([pairs[k] for k in order], dtype=np.int64)
    edge_faces = np.full((len(pairs), 2), -1, dtype=np.int64)
    face_edges = np.empty((len(faces), 3), dtype=np.int64)
    for fi, tri in enumerate(faces):
        for i in range(3):
            a, b = int(tri[i]), int(tri[(i + 1) % 3])
            key = (a, b) if a < b else (b, a)
            e = int(rank[pair_ids[key]])
            face_edges[fi, i] = e
            if edge_faces[e, 0] < 0:
                edge_faces[e, 0] = fi
            elif edge_faces[e, 1] < 0:
                edge_faces[e, 1] = fi
            else:
                raise MeshError(f"edge {key} shared by more than two faces")
    return edges, edge_faces, face_edges


def mesh_from_arrays(vertices: np.ndarray, faces: np.ndarray) -> TriMesh:
    """Build a TriMesh from explicit (x, y, depth) vertices and CCW faces.

    Used by tests and custom scenes; performs the same adjacency build and
    orientation fixup as remesh.
    """
    vertices = np.asarray(vertices, dtype=float)
    faces = np.asarray(faces, dtype=np.int64).copy()
    p = vertices[faces, :2]
    cross = ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
             - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))
    flip = cross < 0
    faces[flip] = faces[flip][:, ::-1]
    edges, edge_faces, face_edges = _build_edges(faces)
    return TriMesh(vertices, faces, edges, edge_faces, face_edges)


def save_off(mesh: TriMesh, stream: IO[str]) -> None:
    """Plain-text OFF export (x, y, depth as z) for external viewers."""
    stream.write("OFF\n")
    stream.write(f"{mesh.n_vertices} {mesh.n_faces} {mesh.n_edges}\n")
    for v in mesh.vertices:
        stream.write(f"{v[0]:.6f} {v[1]:.6f} {v[2]:.6f}\n")
    for f in mesh.faces:
        stream.write(f"3 {f[0]} {f[1]} {f[2]}\n")
