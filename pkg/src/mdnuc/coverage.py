"""Survey simulation and coverage metrics.

A path is sampled at the ping spacing; every sample fires a beam fan at
its annotated aperture, and each seafloor hit increments the evaluation
grid cell it lands in.  A cell counts as covered when it holds at least
one hit; ratios are taken over the cells whose centers lie inside the ROI.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import IO, Sequence

import numpy as np

from .errors import SimulationError
from .geometry import points_in_polygon
from .planner import CoveragePath
from .sonar import SonarConfig, ping_batch
from .terrain import Heightfield, RoiPolygon


@dataclass
class CoverageGrid:
    """Hit-count raster in the heightfield frame at evaluation resolution."""

    origin: tuple[float, float]
    resolution: float
    hit_count: np.ndarray     # (ny, nx) int32
    roi_mask: np.ndarray      # (ny, nx) bool, cell centers inside the ROI
    skipped_pings: int = 0

    @property
    def nx(self) -> int:
        return self.hit_count.shape[1]

    @property
    def ny(self) -> int:
        return self.hit_count.shape[0]

    @classmethod
    def empty(cls, hf: Heightfield, resolution: float, roi: RoiPolygon) -> "CoverageGrid":
        if resolution <= 0:
            raise SimulationError("eval resolution must be > 0")
        xmin, ymin, xmax, ymax = hf.extent
        nx = int(np.ceil((xmax - xmin) / resolution - 1e-9))
        ny = int(np.ceil((ymax - ymin) / resolution - 1e-9))
        cx = xmin + resolution * (np.arange(nx) + 0.5)
        cy = ymin + resolution * (np.arange(ny) + 0.5)
        gx, gy = np.meshgrid(cx, cy)
        mask = points_in_polygon(gx.ravel(), gy.ravel(), [roi.vertices]).reshape(ny, nx)
        return cls((xmin, ymin), resolution, np.zeros((ny, nx), dtype=np.int32), mask)

    def add_hits(self, xs: np.ndarray, ys: np.ndarray) -> None:
        ix = np.clip(((xs - self.origin[0]) / self.resolution).astype(np.int64),
                     0, self.nx - 1)
        iy = np.clip(((ys - self.origin[1]) / self.resolution).astype(np.int64),
                     0, self.ny - 1)
        np.add.at(self.hit_count, (iy, ix), 1)


def _arc_samples(path: CoveragePath, spacing: float
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample positions, headings, apertures at multiples of `spacing`.

    Pure arc-length sampling (corners are not forcibly included), so a
    finer spacing always produces a superset of the sample positions.
    Samples on sonar-inactive segments are dropped.
    """
    starts, ends = path.segments()
    seg_vec = ends - starts
    seg_len = np.hypot(seg_vec[:, 0], seg_vec[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]
    n_samples = int(np.floor(total / spacing + 1e-9)) + 1
    t = spacing * np.arange(n_samples)
    t = np.minimum(t, total)
    seg = np.clip(np.searchsorted(cum, t, side="right") - 1, 0, len(seg_len) - 1)
    frac = (t - cum[seg]) / np.where(seg_len[seg] > 0, seg_len[seg], 1.0)
    pos = starts[seg] + seg_vec[seg] * frac[:, None]
    heading = seg_vec[seg] / seg_len[seg][:, None]
    idx = path.segment_starts()[seg]
    theta = path.theta_deg[idx]
    if path.active is not None:
        on = path.active[idx]
        pos, heading, theta = pos[on], heading[on], theta[on]
    return pos, heading, theta


def simulate(hf: Heightfield, roi: RoiPolygon, paths: Sequence[CoveragePath],
             cfg: SonarConfig, eval_resolution: float,
             ping_spacing: float | None = None, noise_std: float = 0.0,
             seed: int = 0) -> CoverageGrid:
    """Run the sounding simulation along the path(s) into a coverage grid.

    Pings fire at arc-length multiples of ping_spacing (default: one per
    evaluation cell).  noise_std > 0 adds a seeded Gaussian cross-track
    offset to each ping origin; pings pushed outside the heightfield are
    skipped and counted.
    """
    if ping_spacing is None:
        ping_spacing = eval_resolution
    if ping_spacing <= 0:
        raise SimulationError("ping_spacing must be > 0")
    grid = CoverageGrid.empty(hf, eval_resolution, roi)
    rng = np.random.default_rng(seed)
    for path in paths:
        if path.n_waypoints < 2:
            raise SimulationError("cannot simulate an empty path")
        pos, heading, theta = _arc_samples(path, ping_spacing)
        if noise_std > 0.0:
            offsets = rng.normal(0.0, noise_std, size=len(pos))
            across = np.column_stack([heading[:, 1], -heading[:, 0]])
            pos = pos + offsets[:, None] * across
        inside = hf.contains(pos[:, 0], pos[:, 1])
        grid.skipped_pings += int(np.sum(~inside))
        pos, heading, theta = pos[inside], heading[inside], theta[inside]

        # chunk the batch so the profile arrays stay within memory bounds
        step = cfg.step
        d_max = hf.max_depth()
        if len(pos) == 0:
            continue
        worst = 2.0 * (np.tan(np.radians(theta.max()) / 2.0) * d_max / step + 2)
        chunk = max(16, int(4.0e6 / max(worst, 1.0)))
        for k in range(0, len(pos), chunk):
            sl = slice(k, k + chunk)
            hx, hy, _ = ping_batch(hf, pos[sl], heading[sl], theta[sl], cfg)
            grid.add_hits(hx, hy)
    return grid


@dataclass(frozen=True)
class Report:
    """Coverage metrics for one planner run."""

    planner: str
    scenario: str
    eval_resolution: float
    coverage_pct: float
    path_length_m: float
    angle_switch_count: int
    redundancy: float
    covered_cells: int
    mask_cells: int
    skipped_pings: int
    config_hash: str = ""
    wall_time_s: float = 0.0

    def to_json(self, include_timing: bool = False) -> str:
        """Deterministic JSON; wall time is excluded unless asked for."""
        payload = {
            "planner": self.planner,
            "scenario": self.scenario,
            "eval_resolution": self.eval_resolution,
            "coverage_pct": self.coverage_pct,
            "path_length_m": self.path_length_m,
            "angle_switch_count": self.angle_switch_count,
            "redundancy": self.redundancy,
            "covered_cells": self.covered_cells,
            "mask_cells": self.mask_cells,
            "skipped_pings": self.skipped_pings,
            "config_hash": self.config_hash,
        }
        if include_timing:
            payload["wall_time_s"] = self.wall_time_s
        return json.dumps(payload, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        data = json.loads(text)
        data.setdefault("wall_time_s", 0.0)
        return cls(**data)


def evaluate(grid: CoverageGrid, paths: Sequence[CoveragePath],
             scenario: str = "", config_hash: str = "",
             wall_time_s: float = 0.0) -> Report:
    """Coverage percentage, path length, switch count, redundancy."""
    mask_cells = int(grid.roi_mask.sum())
    if mask_cells == 0:
        raise SimulationError("ROI mask is empty at this evaluation resolution")
    covered = (grid.hit_count >= 1) & grid.roi_mask
    n_cov = int(covered.sum())
    redundancy = float(grid.hit_count[covered].sum() / n_cov) if n_cov else 0.0
    length = float(sum(p.length() for p in paths))
    switches = int(sum(len(p.angle_switches) for p in paths))
    planner = paths[0].planner if paths else "none"
    return Report(planner, scenario, grid.resolution,
                  100.0 * n_cov / mask_cells, length, switches, redundancy,
                  n_cov, mask_cells, grid.skipped_pings, config_hash, wall_time_s)


def empty_report(scenario: str, eval_resolution: float, mask_cells: int) -> Report:
    """Report for a run with no paths at all (0% coverage)."""
    return Report("none", scenario, eval_resolution, 0.0, 0.0, 0, 0.0,
                  0, mask_cells, 0)


# ---------------------------------------------------------------------------
# Comparison tables
# ---------------------------------------------------------------------------

_PLANNER_ORDER = {"bf": 0, "mdbf": 1, "nuc": 2, "mdnuc": 3}


def compare(reports: Sequence[Report]) -> list[dict[str, object]]:
    """Group reports into (scenario, resolution) rows with planner columns.

    Each row flags the best coverage; ties are all flagged.  Rows are
    ordered by (scenario, resolution), planners in fixed column order.
    """
    if not reports:
        raise ValueError("no reports to compare")
    groups: dict[tuple[str, float], dict[str, float]] = {}
    for r in reports:
        key = (r.scenario, r.eval_resolution)
        groups.setdefault(key, {})[r.planner] = round(r.coverage_pct, 2)
    rows = []
    for (scenario, res) in sorted(groups):
        cov = groups[(scenario, res)]
        best = max(cov.values())
        rows.append({
            "scenario": scenario,
            "resolution": res,
            "coverage": dict(sorted(cov.items(),
                                    key=lambda kv: _PLANNER_ORDER.get(kv[0], 99))),
            "best": sorted(p for p, v in cov.items() if v == best),
        })
    return rows


def comparison_csv(rows: list[dict[str, object]]) -> str:
    planners = sorted({p for row in rows for p in row["coverage"]},
                      key=lambda p: _PLANNER_ORDER.get(p, 99))
    lines = ["scenario,resolution," + ",".join(planners)]
    for row in rows:
        vals = [f"{row['coverage'][p]:.2f}" if p in row["coverage"] else ""
                for p in planners]
        lines.append(f"{row['scenario']},{row['resolution']:g}," + ",".join(vals))
    return "\n".join(lines) + "\n"


def comparison_text(rows: list[dict[str, object]]) -> str:
    planners = sorted({p for row in rows for p in row["coverage"]},
                      key=lambda p: _PLANNER_ORDER.get(p, 99))
    header = ["scenario", "resolution"] + planners
    table = [header]
    for row in rows:
        cells = [str(row["scenario"]), f"{row['resolution']:g} m"]
        for p in planners:
            if p in row["coverage"]:
                v = f"{row['coverage'][p]:.2f}"
                cells.append(f"*{v}*" if p in row["best"] else v)
            else:
                cells.append("-")
        table.append(cells)
    widths = [max(len(r[c]) for r in table) for c in range(len(header))]
    lines = []
    for i, r in enumerate(table):
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Grid exports
# ---------------------------------------------------------------------------

def save_pgm(grid: CoverageGrid, stream: IO[str]) -> None:
    """ASCII PGM (P2), hit counts clamped to 255, north row first."""
    stream.write("P2\n")
    stream.write(f"{grid.nx} {grid.ny}\n255\n")
    clamped = np.minimum(grid.hit_count, 255)
    for iy in range(grid.ny - 1, -1, -1):
        stream.write(" ".join(str(int(v)) for v in clamped[iy]) + "\n")


def grid_to_rle_json(grid: CoverageGrid) -> str:
    """Run-length encoding of the hit counts, south row first."""
    rows = []
    for iy in range(grid.ny):
        row = grid.hit_count[iy]
        runs = []
        start = 0
        for k in range(1, len(row) + 1):
            if k == len(row) or row[k] != row[start]:
                runs.append([int(k - start), int(row[start])])
                start = k
        rows.append(runs)
    payload = {
        "origin": list(grid.origin),
        "resolution": grid.resolution,
        "nx": grid.nx,
        "ny": grid.ny,
        "rows": rows,
    }
    return json.dumps(payload, sort_keys=True)
