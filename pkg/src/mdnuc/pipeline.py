"""End-to-end scenario orchestration shared by the CLI and the test harness.

plan_scenario turns a RunConfig into terrain, mesh, partition, and path(s);
survey_scenario simulates the sounding run and evaluates coverage.  Artifact
writers produce the on-disk outputs with deterministic bytes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig
from .coverage import CoverageGrid, Report, evaluate, save_pgm, simulate
from .errors import SimulationError
from .mesh import TriMesh, build_dual, save_off
from .partition import Partition, partition_mesh
from .planner import (CoveragePath, path_to_geojson, plan_bf, plan_mdbf, plan_mdnuc,
                      plan_nuc, save_path_csv)
from .terrain import Heightfield, RoiPolygon, save_esri_ascii


@dataclass
class PlanResult:
    cfg: RunConfig
    hf: Heightfield
    roi: RoiPolygon
    mesh: TriMesh
    partition: Partition | None
    paths: list[CoveragePath]
    summary: dict


def plan_scenario(cfg: RunConfig) -> PlanResult:
    roi = cfg.roi_polygon()
    hf = cfg.terrain.build(roi)
    w = cfg.sonar.footprint
    from .mesh import remesh

    mesh = remesh(hf, roi, w, cfg.shrink)
    dual = build_dual(mesh)
    chash = cfg.config_hash()
    partition: Partition | None = None

    if cfg.planner == "nuc":
        paths = [plan_nuc(mesh, dual, cfg.sonar, mesh.mean_depth(),
                          config_hash=chash)]
    elif cfg.planner == "mdnuc":
        partition = partition_mesh(mesh, cfg.ranges(), cfg.gate_slope)
        paths = [plan_mdnuc(mesh, dual, partition, cfg.sonar, config_hash=chash)]
    elif cfg.planner == "bf":
        paths = [plan_bf(roi, w, cfg.bf_heading, cfg.sonar, mesh.mean_depth(),
                         cfg.sweep_connectors, config_hash=chash)]
    elif cfg.planner == "mdbf":
        partition = partition_mesh(mesh, cfg.ranges(), cfg.gate_slope)
        paths = plan_mdbf(partition, mesh, w, cfg.sonar, cfg.bf_heading,
                          cfg.sweep_connectors, config_hash=chash)
    else:
        raise ValueError(f"unknown planner {cfg.planner!r}")

    summary = {
        "scenario": cfg.scenario,
        "planner": cfg.planner,
        "config_hash": chash,
        "footprint_m": w,
        "faces": mesh.n_faces,
        "dropped_boundary_faces": mesh.n_dropped,
        "vertices": mesh.n_vertices,
        "edges": mesh.n_edges,
        "mesh_mean_depth_m": round(mesh.mean_depth(), 6),
        "regions": partition.n_regions if partition else 1,
        "gates": ({f"{a}-{b}": g for (a, b), g in sorted(partition.gates.items())}
                  if partition else {}),
        "blocked_edges": len(partition.blocked) if partition else 0,
        "region_theta_deg": (
            [round(float(t), 4) for t in _region_thetas(cfg, partition)]
            if partition else [round(float(paths[0].theta_deg[0]), 4)]),
        "path_length_m": round(sum(p.length() for p in paths), 6),
        "n_paths": len(paths),
        "angle_switches": sum(len(p.angle_switches) for p in paths),
    }
    return PlanResult(cfg, hf, roi, mesh, partition, paths, summary)


def _region_thetas(cfg: RunConfig, partition: Partition) -> list[float]:
    from .sonar import opening_angle

    return [opening_angle(cfg.sonar.footprint, d, cfg.sonar.theta_max)
            for d in partition.region_mean_depths]


def survey_scenario(cfg: RunConfig, plan: PlanResult | None = None,
                    paths: list[CoveragePath] | None = None
                    ) -> tuple[CoverageGrid, Report]:
    if plan is None:
        plan = plan_scenario(cfg)
    use_paths = paths if paths is not None else plan.paths
    if not use_paths:
        raise SimulationError("no paths to survey")
    t0 = time.perf_counter()
    grid = simulate(plan.hf, plan.roi, use_paths, cfg.sonar, cfg.eval_resolution,
                    cfg.ping_spacing, cfg.noise_std, cfg.seed)
    report = evaluate(grid, use_paths, cfg.scenario, cfg.config_hash(),
                      wall_time_s=time.perf_counter() - t0)
    return grid, report


# ---------------------------------------------------------------------------
# Artifact writers
# ---------------------------------------------------------------------------

def write_terrain_artifacts(cfg: RunConfig, outdir: Path) -> list[Path]:
    roi = cfg.roi_polygon()
    hf = cfg.terrain.build(roi)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"{cfg.scenario}.asc"
    with open(path, "w", encoding="utf-8") as fh:
        save_esri_ascii(hf, fh)
    return [path]


def write_plan_artifacts(result: PlanResult, outdir: Path,
                         geojson: bool = False) -> list[Path]:
    import json

    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    multi = len(result.paths) > 1
    for i, p in enumerate(result.paths):
        stem = f"{result.cfg.planner}_path_{i}" if multi else f"{result.cfg.planner}_path"
        csv_path = outdir / f"{stem}.csv"
        with open(csv_path, "w", encoding="utf-8") as fh:
            save_path_csv(p, fh)
        written.append(csv_path)
        if geojson:
            gj = outdir / f"{stem}.geojson"
            gj.write_text(path_to_geojson(p) + "\n", encoding="utf-8")
            written.append(gj)
    if result.partition is not None:
        pj = outdir / "partition.json"
        pj.write_text(result.partition.to_json() + "\n", encoding="utf-8")
        written.append(pj)
    off = outdir / "mesh.off"
    with open(off, "w", encoding="utf-8") as fh:
        save_off(result.mesh, fh)
    written.append(off)
    summary = outdir / "plan_summary.json"
    summary.write_text(json.dumps(result.summary, sort_keys=True, indent=2) + "\n",
                       encoding="utf-8")
    written.append(summary)
    return written


def write_survey_artifacts(cfg: RunConfig, grid: CoverageGrid, report: Report,
                           outdir: Path) -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    pgm = outdir / f"{cfg.planner}_coverage.pgm"
    with open(pgm, "w", encoding="utf-8") as fh:
        save_pgm(grid, fh)
    rj = outdir / f"{cfg.planner}_report.json"
    rj.write_text(report.to_json() + "\n", encoding="utf-8")
    return [pgm, rj]
