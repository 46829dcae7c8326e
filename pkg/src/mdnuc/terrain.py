"""Seafloor heightfields: domain types, synthetic generators, file I/O, queries.

Sign convention: depth is positive down with the sensor plane at depth 0,
so all stored depths are strictly positive.  A heightfield is a regular,
node-registered grid; continuous queries use bilinear interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .errors import DomainError, FormatError, TerrainError
from .geometry import ensure_ccw, loops_bbox, polygon_is_simple, polygon_signed_area


@dataclass(frozen=True)
class Heightfield:
    """Regular grid of seafloor depths (meters, positive down).

    depths has shape (ny, nx); row iy runs south to north, column ix west
    to east.  Node (ix, iy) sits at origin + cell_size * (ix, iy).  NaN
    nodes mark no-data holes (permitted only outside the planning region;
    queries touching them raise DomainError).
    """

    origin: tuple[float, float]
    cell_size: float
    depths: np.ndarray

    def __post_init__(self):
        if self.cell_size <= 0:
            raise TerrainError("cell_size must be > 0")
        d = np.asarray(self.depths, dtype=float)
        if d.ndim != 2 or d.shape[0] < 2 or d.shape[1] < 2:
            raise TerrainError("depth grid must be at least 2x2 nodes")
        finite = np.isfinite(d)
        if np.any(d[finite] <= 0):
            raise TerrainError("all depths must be > 0 (positive down)")
        if np.any(np.isinf(d)):
            raise TerrainError("depths must be finite or NaN (no-data)")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "depths", d)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "cell_size", float(self.cell_size))

    @property
    def nx(self) -> int:
        return self.depths.shape[1]

    @property
    def ny(self) -> int:
        return self.depths.shape[0]

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) spanned by the grid nodes."""
        x0, y0 = self.origin
        return (x0, y0,
                x0 + (self.nx - 1) * self.cell_size,
                y0 + (self.ny - 1) * self.cell_size)

    @property
    def has_nodata(self) -> bool:
        return bool(np.isnan(self.depths).any())

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        xmin, ymin, xmax, ymax = self.extent
        return (np.asarray(x) >= xmin) & (np.asarray(x) <= xmax) \
            & (np.asarray(y) >= ymin) & (np.asarray(y) <= ymax)

    def max_depth(self) -> float:
        return float(np.nanmax(self.depths))

    def min_depth(self) -> float:
        return float(np.nanmin(self.depths))


def depth_at(hf: Heightfield, x: float, y: float) -> float:
    """Bilinear depth at one point; raises DomainError outside the extent."""
    return float(depth_at_many(hf, np.asarray([x], dtype=float),
                               np.asarray([y], dtype=float))[0])


def depth_at_many(hf: Heightfield, xs: np.ndarray, ys: np.ndarray,
                  nodata_ok: bool = False) -> np.ndarray:
    """Vectorized bilinear interpolation of the four surrounding nodes.

    Raises DomainError for queries outside the extent, and for queries
    touching a no-data node unless nodata_ok is set (those return NaN).
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    xmin, ymin, xmax, ymax = hf.extent
    if np.any(xs < xmin) or np.any(xs > xmax) or np.any(ys < ymin) or np.any(ys > ymax):
        bad = np.argmax(~((xs >= xmin) & (xs <= xmax) & (ys >= ymin) & (ys <= ymax)))
        raise DomainError(
            f"query ({xs.flat[bad]:g}, {ys.flat[bad]:g}) outside heightfield extent "
            f"[{xmin:g}, {xmax:g}] x [{ymin:g}, {ymax:g}]")
    gx = (xs - hf.origin[0]) / hf.cell_size
    gy = (ys - hf.origin[1]) / hf.cell_size
    ix = np.clip(np.floor(gx).astype(np.int64), 0, hf.nx - 2)
    iy = np.clip(np.floor(gy).astype(np.int64), 0, hf.ny - 2)
    fx = gx - ix
    fy = gy - iy
    d = hf.depths
    d00 = d[iy, ix]
    d10 = d[iy, ix + 1]
    d01 = d[iy + 1, ix]
    d11 = d[iy + 1, ix + 1]
    out = (d00 * (1 - fx) * (1 - fy) + d10 * fx * (1 - fy)
           + d01 * (1 - fx) * fy + d11 * fx * fy)
    if not nodata_ok and hf.has_nodata and np.any(np.isnan(out)):
        raise DomainError("query touches a no-data node")
    return out


@dataclass(frozen=True)
class RoiPolygon:
    """Simple counter-clockwise polygon bounding the survey region."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise TerrainError("ROI needs at least 3 (x, y) vertices")
        if abs(polygon_signed_area(v)) <= 0:
            raise TerrainError("ROI polygon has zero area")
        if not polygon_is_simple(v):
            raise TerrainError("ROI polygon is self-intersecting")
        v = ensure_ccw(v)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return loops_bbox([self.vertices])

    def validate_inside(self, hf: Heightfield) -> None:
        xmin, ymin, xmax, ymax = self.bbox
        ex = hf.extent
        if xmin < ex[0] or ymin < ex[1] or xmax > ex[2] or ymax > ex[3]:
            raise TerrainError("ROI extends outside the heightfield extent")


@dataclass(frozen=True)
class DepthRange:
    """Half-open depth band [d_min, d_max); the last range of a set is closed."""

    d_min: float
    d_max: float

    def __post_init__(self):
        if not self.d_min < self.d_max:
            raise TerrainError(f"invalid depth range [{self.d_min}, {self.d_max}]")


def validate_ranges(ranges: Iterable[DepthRange]) -> list[DepthRange]:
    """Check that ranges are ordered and disjoint; returns them as a list."""
    rs = list(ranges)
    if not rs:
        raise TerrainError("at least one depth range is required")
    for a, b in zip(rs, rs[1:]):
        if b.d_min < a.d_max:
            raise TerrainError(
                f"depth ranges overlap or are out of order: "
                f"[{a.d_min}, {a.d_max}) vs [{b.d_min}, {b.d_max})")
    return rs


# ---------------------------------------------------------------------------
# Synthetic terrain generators
# ---------------------------------------------------------------------------

def _grid(extent: tuple[float, float], cell_size: float,
          origin: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
    if cell_size <= 0:
        raise TerrainError("cell_size must be > 0")
    w, h = float(extent[0]), float(extent[1])
    if w <= 0 or h <= 0:
        raise TerrainError("extent must be positive")
    nx = int(round(w / cell_size)) + 1
    ny = int(round(h / cell_size)) + 1
    xs = origin[0] + cell_size * np.arange(nx)
    ys = origin[1] + cell_size * np.arange(ny)
    return np.meshgrid(xs, ys)  # each (ny, nx)


def smoothstep(t: np.ndarray) -> np.ndarray:
    """C1 ramp 3t^2 - 2t^3 clamped to [0, 1]."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def gen_shaft(extent: tuple[float, float], plain_depth: float, pit_depth: float,
              pit_center: tuple[float, float], pit_radius: float,
              wall_smoothing: float, cell_size: float,
              origin: tuple[float, float] = (0.0, 0.0)) -> Heightfield:
    """Deep circular pit in the middle of a constant-depth plain.

    The rim transitions from pit_depth to plain_depth with a smoothstep of
    width ``wall_smoothing`` centered on the rim circle; with zero smoothing
    the rim itself counts as inside the pit.
    """
    if not pit_depth > plain_depth > 0:
        raise TerrainError("need pit_depth > plain_depth > 0")
    if wall_smoothing < 0:
        raise TerrainError("wall_smoothing must be >= 0")
    xg, yg = _grid(extent, cell_size, origin)
    outer = pit_radius + wall_smoothing / 2.0
    if (pit_center[0] - outer < origin[0] or pit_center[1] - outer < origin[1]
            or pit_center[0] + outer > origin[0] + extent[0]
            or pit_center[1] + outer > origin[1] + extent[1]):
        raise TerrainError("pit (including rim transition) must fit inside the extent")
    r = np.hypot(xg - pit_center[0], yg - pit_center[1])
    if wall_smoothing == 0.0:
        inside = r <= pit_radius
        depths = np.where(inside, pit_depth, plain_depth)
    else:
        # fraction of "pit-ness": 1 well inside, 0 well outside
        u = (pit_radius + wall_smoothing / 2.0 - r) / wall_smoothing
        depths = plain_depth + (pit_depth - plain_depth) * smoothstep(u)
    return Heightfield(origin, cell_size, depths)


def shaft_depth(x: float, y: float, plain_depth: float, pit_depth: float,
                pit_center: tuple[float, float], pit_radius: float,
                wall_smoothing: float) -> float:
    """Closed-form shaft depth at a point (same formula the grid samples)."""
    r = math.hypot(x - pit_center[0], y - pit_center[1])
    if wall_smoothing == 0.0:
        return pit_depth if r <= pit_radius else plain_depth
    u = (pit_radius + wall_smoothing / 2.0 - r) / wall_smoothing
    return float(plain_depth + (pit_depth - plain_depth) * smoothstep(np.asarray(u)))


def gen_saddle(extent: tuple[float, float], base_depth: float, amplitude: float,
               cell_size: float, origin: tuple[float, float] = (0.0, 0.0)) -> Heightfield:
    """Saddle surface: depth = base + amplitude * (u^2 - v^2).

    (u, v) are the grid coordinates normalized to [-1, 1] over the extent,
    u along x and v along y.
    """
    if amplitude >= base_depth:
        raise TerrainError("amplitude must be < base_depth to keep depths positive")
    if amplitude <= 0:
        raise TerrainError("amplitude must be > 0")
    xg, yg = _grid(extent, cell_size, origin)
    xmin, xmax = xg.min(), xg.max()
    ymin, ymax = yg.min(), yg.max()
    u = 2.0 * (xg - xmin) / (xmax - xmin) - 1.0
    v = 2.0 * (yg - ymin) / (ymax - ymin) - 1.0
    depths = base_depth + amplitude * (u * u - v * v)
    return Heightfield(origin, cell_size, depths)


def gen_channel(extent: tuple[float, float], shallow_depth: float = 3.26,
                deep_depth: float = 25.96, channel_axis: str = "y",
                channel_width: float | None = None, cell_size: float = 1.0,
                origin: tuple[float, float] = (0.0, 0.0)) -> Heightfield:
    """Deep channel band with vertical walls across a shallow shelf.

    The band runs along ``channel_axis`` ('x' or 'y'), centered on the
    extent midline, ``channel_width`` wide (default: a third of the
    cross dimension).  Walls are sharp: no transition zone.
    """
    if not deep_depth > shallow_depth > 0:
        raise TerrainError("need deep_depth > shallow_depth > 0")
    if channel_axis not in ("x", "y"):
        raise TerrainError("channel_axis must be 'x' or 'y'")
    xg, yg = _grid(extent, cell_size, origin)
    across = yg if channel_axis == "x" else xg
    lo = across.min()
    hi = across.max()
    if channel_width is None:
        channel_width = (hi - lo) / 3.0
    if channel_width <= 0 or channel_width >= hi - lo:
        raise TerrainError("channel_width must be positive and narrower than the extent")
    center = 0.5 * (lo + hi)
    inside = np.abs(across - center) <= channel_width / 2.0
    depths = np.where(inside, deep_depth, shallow_depth)
    return Heightfield(origin, cell_size, depths)


# ---------------------------------------------------------------------------
# File formats (documented bit-exactly in docs/formats.md)
# ---------------------------------------------------------------------------

_FMT = "%.17g"  # round-trips float64 exactly


def save_xyz(hf: Heightfield, stream: IO[str]) -> None:
    """Write "x y depth" lines, row-major (south rows first, west first)."""
    x0, y0 = hf.origin
    for iy in range(hf.ny):
        for ix in range(hf.nx):
            stream.write(f"{_FMT % (x0 + ix * hf.cell_size)} "
                         f"{_FMT % (y0 + iy * hf.cell_size)} "
                         f"{_FMT % hf.depths[iy, ix]}\n")


def save_esri_ascii(hf: Heightfield, stream: IO[str], nodata: float = -9999.0) -> None:
    """Write a 6-line ESRI ASCII header followed by north-up rows."""
    stream.write(f"ncols {hf.nx}\n")
    stream.write(f"nrows {hf.ny}\n")
    stream.write(f"xllcorner {_FMT % hf.origin[0]}\n")
    stream.write(f"yllcorner {_FMT % hf.origin[1]}\n")
    stream.write(f"cellsize {_FMT % hf.cell_size}\n")
    stream.write(f"NODATA_value {_FMT % nodata}\n")
    d = hf.depths
    for iy in range(hf.ny - 1, -1, -1):
        row = np.where(np.isnan(d[iy]), nodata, d[iy])
        stream.write(" ".join(_FMT % v for v in row) + "\n")


def load_grid(stream: IO[str], fmt: str, value_sign: str = "depth",
              roi: RoiPolygon | None = None) -> Heightfield:
    """Parse an xyz-ascii or esri-ascii grid into a Heightfield.

    value_sign selects whether stored values are depths (positive down,
    the default) or elevations (negated on read).  No-data cells are a
    format error unless an ROI is given and the cell lies outside it,
    in which case the node is kept as NaN.
    """
    if fmt == "xyz-ascii":
        hf = _load_xyz(stream, value_sign)
    elif fmt == "esri-ascii":
        hf = _load_esri(stream, value_sign, roi)
    else:
        raise FormatError(f"unknown grid format {fmt!r} (use xyz-ascii or esri-ascii)")
    return hf


def _convert(value: float, value_sign: str, line: int) -> float:
    if value_sign == "elevation":
        value = -value
    elif value_sign != "depth":
        raise FormatError(f"value_sign must be 'depth' or 'elevation', got {value_sign!r}")
    if math.isnan(value):
        raise FormatError("NaN depth", line)
    if value <= 0:
        raise FormatError(f"non-positive depth {value:g} after conversion", line)
    return value


def _load_xyz(stream: IO[str], value_sign: str) -> Heightfield:
    nodes: dict[tuple[float, float], float] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"expected 'x y depth', got {line!r}", lineno)
        try:
            x, y, v = (float(p) for p in parts)
        except ValueError:
            raise FormatError(f"non-numeric token in {line!r}", lineno) from None
        v = _convert(v, value_sign, lineno)
        key = (x, y)
        if key in nodes:
            raise FormatError(f"duplicate node ({x:g}, {y:g})", lineno)
        nodes[key] = v
    if not nodes:
        raise FormatError("empty grid")
    xs = np.array(sorted({k[0] for k in nodes}))
    ys = np.array(sorted({k[1] for k in nodes}))
    if len(xs) < 2 or len(ys) < 2:
        raise FormatError("grid must have at least 2 distinct x and y values")
    if len(xs) * len(ys) != len(nodes):
        raise FormatError(
            f"ragged grid: {len(xs)} x-values * {len(ys)} y-values != {len(nodes)} nodes")
    dxs = np.diff(xs)
    dys = np.diff(ys)
    cell = dxs[0]
    if np.any(np.abs(dxs - cell) > 1e-9 * max(1.0, cell)) \
            or np.any(np.abs(dys - cell) > 1e-9 * max(1.0, cell)):
        raise FormatError("grid spacing is not uniform")
    depths = np.empty((len(ys), len(xs)))
    xi = {x: i for i, x in enumerate(xs)}
    yi = {y: i for i, y in enumerate(ys)}
    for (x, y), v in nodes.items():
        depths[yi[y], xi[x]] = v
    return Heightfield((float(xs[0]), float(ys[0])), float(cell), depths)


def _load_esri(stream: IO[str], value_sign: str, roi: RoiPolygon | None) -> Heightfield:
    header: dict[str, float] = {}
    keys = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")
    lines = iter(enumerate(stream, start=1))
    for _ in range(6):
        try:
            lineno, raw = next(lines)
        except StopIteration:
            raise FormatError("truncated header: expected 6 header lines") from None
        parts = raw.split()
        if len(parts) != 2:
            raise FormatError(f"bad header line {raw.strip()!r}", lineno)
        key = parts[0].lower()
        if key not in keys:
            raise FormatError(f"unknown header key {parts[0]!r}", lineno)
        try:
            header[key] = float(parts[1])
        except ValueError:
            raise FormatError(f"non-numeric header value {parts[1]!r}", lineno) from None
    missing = [k for k in keys if k not in header]
    if missing:
        raise FormatError(f"missing header keys: {', '.join(missing)}")
    ncols = int(header["ncols"])
    nrows = int(header["nrows"])
    nodata = header["nodata_value"]
    cell = header["cellsize"]
    origin = (header["xllcorner"], header["yllcorner"])
    rows: list[list[float]] = []
    for lineno, raw in lines:
        if not raw.strip():
            continue
        vals = raw.split()
        if len(vals) != ncols:
            raise FormatError(f"expected {ncols} values, got {len(vals)}", lineno)
        row = []
        for tok in vals:
            try:
                v = float(tok)
            except ValueError:
                raise FormatError(f"non-numeric token {tok!r}", lineno) from None
            if v == nodata:
                row.append(math.nan)
            else:
                row.append(_convert(v, value_sign, lineno))
        rows.append(row)
        if len(rows) == nrows:
            break
    if len(rows) != nrows:
        raise FormatError(f"expected {nrows} data rows, got {len(rows)}")
    depths = np.asarray(rows[::-1], dtype=float)  # north-up file -> south-up array
    nan_mask = np.isnan(depths)
    if nan_mask.any():
        iy, ix = np.nonzero(nan_mask)
        xs = origin[0] + cell * ix
        ys = origin[1] + cell * iy
        if roi is None:
            raise FormatError(
                f"NODATA node at ({xs[0]:g}, {ys[0]:g}); pass an ROI to permit "
                "no-data outside the planning region")
        from .geometry import points_in_polygon
        inside = points_in_polygon(xs, ys, [roi.vertices])
        if inside.any():
            k = int(np.argmax(inside))
            raise FormatError(f"NODATA node inside ROI at ({xs[k]:g}, {ys[k]:g})")
    return Heightfield(origin, cell, depths)
