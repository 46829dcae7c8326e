"""Run configuration: schema, strict parsing, canonical form, presets.

A run config is a single JSON document describing terrain, ROI, depth
ranges, sonar, planner choice, and evaluation settings.  Unknown keys are
rejected; every field has a documented default; the canonical rendering
(defaults materialized, keys sorted) is what gets hashed into path and
report provenance.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, TerrainError
from .sonar import SonarConfig
from .terrain import (DepthRange, Heightfield, RoiPolygon, gen_channel, gen_saddle,
                      gen_shaft, load_grid, validate_ranges)


def gen_flat(extent: tuple[float, float], depth: float, cell_size: float,
             origin: tuple[float, float] = (0.0, 0.0)) -> Heightfield:
    """Constant-depth plane (test scenes and the flat preset)."""
    if depth <= 0:
        raise TerrainError("depth must be > 0")
    nx = int(round(extent[0] / cell_size)) + 1
    ny = int(round(extent[1] / cell_size)) + 1
    return Heightfield(origin, cell_size, np.full((ny, nx), float(depth)))


_GENERATORS = {
    "shaft": (gen_shaft, ("plain_depth", "pit_depth", "pit_center", "pit_radius",
                          "wall_smoothing")),
    "saddle": (gen_saddle, ("base_depth", "amplitude")),
    "channel": (gen_channel, ("shallow_depth", "deep_depth", "channel_axis",
                              "channel_width")),
    "flat": (gen_flat, ("depth",)),
}


@dataclass(frozen=True)
class TerrainSpec:
    """Either a parametric generator or a grid file."""

    generator: str | None = None
    params: dict | None = None
    origin: tuple[float, float] = (0.0, 0.0)
    extent: tuple[float, float] = (100.0, 100.0)
    cell_size: float = 1.0
    file: str | None = None
    format: str | None = None
    value_sign: str = "depth"

    def build(self, roi: RoiPolygon | None = None) -> Heightfield:
        if self.file is not None:
            path = Path(self.file)
            if not path.exists():
                raise TerrainError(f"terrain file not found: {self.file}")
            with open(path, encoding="utf-8") as fh:
                return load_grid(fh, self.format or "esri-ascii",
                                 self.value_sign, roi)
        if self.generator not in _GENERATORS:
            raise ConfigError(
                f"unknown terrain generator {self.generator!r}; "
                f"choose from {sorted(_GENERATORS)}")
        fn, keys = _GENERATORS[self.generator]
        params = dict(self.params or {})
        unknown = set(params) - set(keys)
        if unknown:
            raise ConfigError(
                f"unknown {self.generator} parameter(s): {sorted(unknown)}")
        kwargs = {k: (tuple(v) if isinstance(v, list) else v)
                  for k, v in params.items()}
        return fn(tuple(self.extent), cell_size=self.cell_size,
                  origin=tuple(self.origin), **kwargs)


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "scene"
    terrain: TerrainSpec = TerrainSpec()
    roi: tuple[tuple[float, float], ...] = ()
    depth_ranges: tuple[tuple[float, float], ...] = ()
    sonar: SonarConfig = SonarConfig()
    shrink: float = 0.05
    gate_slope: str = "face-gradient"
    planner: str = "mdnuc"
    bf_heading: str = "auto"
    sweep_connectors: bool = True
    eval_resolution: float = 0.1
    ping_spacing: float | None = None
    noise_std: float = 0.0
    seed: int = 0
    output_dir: str = "out"

    def roi_polygon(self) -> RoiPolygon:
        if len(self.roi) < 3:
            raise ConfigError("config must define an 'roi' polygon (>= 3 vertices)")
        return RoiPolygon(np.asarray(self.roi, dtype=float))

    def ranges(self) -> list[DepthRange]:
        if not self.depth_ranges:
            raise ConfigError("config must define 'depth_ranges'")
        return validate_ranges([DepthRange(lo, hi) for lo, hi in self.depth_ranges])

    def to_canonical_dict(self) -> dict:
        t: dict[str, object]
        if self.terrain.file is not None:
            t = {"file": self.terrain.file,
                 "format": self.terrain.format or "esri-ascii",
                 "value_sign": self.terrain.value_sign}
        else:
            t = {"generator": self.terrain.generator,
                 "origin": list(self.terrain.origin),
                 "extent": list(self.terrain.extent),
                 "cell_size": self.terrain.cell_size,
                 "params": dict(sorted((self.terrain.params or {}).items()))}
        return {
            "scenario": self.scenario,
            "terrain": t,
            "roi": [list(v) for v in self.roi],
            "depth_ranges": [list(r) for r in self.depth_ranges],
            "sonar": {
                "n_beams": self.sonar.n_beams,
                "resolution": self.sonar.resolution,
                "theta_max": self.sonar.theta_max,
                "max_range": self.sonar.max_range,
                "beam_spacing": self.sonar.beam_spacing,
                "march_step": self.sonar.march_step,
                "bisect_tol": self.sonar.bisect_tol,
            },
            "mesh": {"shrink": self.shrink},
            "partition": {"gate_slope": self.gate_slope},
            "planner": self.planner,
            "bf": {"heading": self.bf_heading,
                   "sweep_connectors": self.sweep_connectors},
            "evaluation": {
                "resolution": self.eval_resolution,
                "ping_spacing": self.ping_spacing,
                "noise_std": self.noise_std,
                "seed": self.seed,
            },
            "output_dir": self.output_dir,
        }

    def to_canonical_json(self) -> str:
        return json.dumps(self.to_canonical_dict(), sort_keys=True, indent=2) + "\n"

    def config_hash(self) -> str:
        """Provenance hash over everything except the output directory."""
        payload = self.to_canonical_dict()
        payload.pop("output_dir")
        digest = hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()
        return digest[:12]

    def with_resolution(self, resolution: float) -> "RunConfig":
        """Set the survey resolution: sonar sounding spacing + eval grid."""
        return replace(self,
                       sonar=replace(self.sonar, resolution=resolution),
                       eval_resolution=resolution)


def _expect_keys(d: dict, allowed: set[str], context: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {context}: {sorted(unknown)}")


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    _expect_keys(data, {"scenario", "terrain", "roi", "depth_ranges", "sonar",
                        "mesh", "partition", "planner", "bf", "evaluation",
                        "output_dir"}, "config")
    try:
        terrain_d = data.get("terrain", {})
        if "file" in terrain_d:
            _expect_keys(terrain_d, {"file", "format", "value_sign"}, "terrain")
            terrain = TerrainSpec(file=terrain_d["file"],
                                  format=terrain_d.get("format", "esri-ascii"),
                                  value_sign=terrain_d.get("value_sign", "depth"))
        else:
            _expect_keys(terrain_d, {"generator", "origin", "extent", "cell_size",
                                     "params"}, "terrain")
            terrain = TerrainSpec(
                generator=terrain_d.get("generator"),
                params=dict(terrain_d.get("params", {})),
                origin=tuple(terrain_d.get("origin", (0.0, 0.0))),
                extent=tuple(terrain_d.get("extent", (100.0, 100.0))),
                cell_size=float(terrain_d.get("cell_size", 1.0)))
        sonar_d = dict(data.get("sonar", {}))
        _expect_keys(sonar_d, {"n_beams", "resolution", "theta_max", "max_range",
                               "beam_spacing", "march_step", "bisect_tol"}, "sonar")
        sonar = SonarConfig(**sonar_d)
        mesh_d = dict(data.get("mesh", {}))
        _expect_keys(mesh_d, {"shrink"}, "mesh")
        part_d = dict(data.get("partition", {}))
        _expect_keys(part_d, {"gate_slope"}, "partition")
        bf_d = dict(data.get("bf", {}))
        _expect_keys(bf_d, {"heading", "sweep_connectors"}, "bf")
        ev_d = dict(data.get("evaluation", {}))
        _expect_keys(ev_d, {"resolution", "ping_spacing", "noise_std", "seed"},
                     "evaluation")
        planner = data.get("planner", "mdnuc")
        if planner not in ("bf", "mdbf", "nuc", "mdnuc"):
            raise ConfigError(f"unknown planner {planner!r}")
        gate_slope = part_d.get("gate_slope", "face-gradient")
        if gate_slope not in ("face-gradient", "edge-endpoints"):
            raise ConfigError(f"unknown gate_slope {gate_slope!r}")
        cfg = RunConfig(
            scenario=str(data.get("scenario", "scene")),
            terrain=terrain,
            roi=tuple(tuple(float(c) for c in v) for v in data.get("roi", ())),
            depth_ranges=tuple(tuple(float(c) for c in r)
                               for r in data.get("depth_ranges", ())),
            sonar=sonar,
            shrink=float(mesh_d.get("shrink", 0.05)),
            gate_slope=gate_slope,
            planner=planner,
            bf_heading=str(bf_d.get("heading", "auto")),
            sweep_connectors=bool(bf_d.get("sweep_connectors", True)),
            eval_resolution=float(ev_d.get("resolution", 0.1)),
            ping_spacing=(None if ev_d.get("ping_spacing") is None
                          else float(ev_d["ping_spacing"])),
            noise_std=float(ev_d.get("noise_std", 0.0)),
            seed=int(ev_d.get("seed", 0)),
            output_dir=str(data.get("output_dir", "out")),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc
    return cfg


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(data)


# ---------------------------------------------------------------------------
# Shipped presets (also serialized under experiments/)
# ---------------------------------------------------------------------------

# lattice sides at the two survey resolutions (shrink 0.05, 256 beams):
# 10 cm -> s = 2*25.6*0.95/sqrt(2) = 34.3937 m; 25 cm -> 85.9842 m.
# ROI sides are chosen a hair under integer multiples of both so the kept
# face set tiles the ROI exactly at either resolution.
_S10_X6 = 206.36     # ~ 6 lattice cells at 10 cm
_CH_X = 515.90       # ~ 6 cells at 25 cm / 15 cells at 10 cm
_CH_Y = 171.96       # ~ 2 cells at 25 cm / 5 cells at 10 cm


def _square(side: float) -> tuple[tuple[float, float], ...]:
    return ((0.0, 0.0), (side, 0.0), (side, side), (0.0, side))


def _rect(w: float, h: float) -> tuple[tuple[float, float], ...]:
    return ((0.0, 0.0), (w, 0.0), (w, h), (0.0, h))


def preset_configs() -> dict[str, RunConfig]:
    shaft = RunConfig(
        scenario="shaft",
        terrain=TerrainSpec(generator="shaft", origin=(-32.0, -32.0),
                            extent=(272.0, 272.0), cell_size=0.5,
                            params={"plain_depth": 4.0, "pit_depth": 22.0,
                                    "pit_center": [103.18, 103.18],
                                    "pit_radius": 52.0, "wall_smoothing": 10.0}),
        roi=_square(_S10_X6),
        depth_ranges=((3.0, 9.0), (9.0, 23.0)),
        output_dir="out/shaft",
    )
    saddle = RunConfig(
        scenario="saddle",
        terrain=TerrainSpec(generator="saddle", origin=(-32.0, -32.0),
                            extent=(272.0, 272.0), cell_size=0.5,
                            params={"base_depth": 16.0, "amplitude": 12.0}),
        roi=_square(_S10_X6),
        depth_ranges=((4.0, 12.0), (12.0, 16.0), (16.0, 20.0), (20.0, 28.0)),
        output_dir="out/saddle",
    )
    channel = RunConfig(
        scenario="channel",
        terrain=TerrainSpec(generator="channel", origin=(-45.0, -45.0),
                            extent=(606.0, 262.0), cell_size=0.5,
                            params={"shallow_depth": 3.26, "deep_depth": 25.96,
                                    "channel_axis": "y", "channel_width": 172.0}),
        roi=_rect(_CH_X, _CH_Y),
        depth_ranges=((3.0, 15.0), (15.0, 26.0)),
        output_dir="out/channel",
    )
    flat = RunConfig(
        scenario="flat",
        terrain=TerrainSpec(generator="flat", origin=(-18.0, -18.0),
                            extent=(140.0, 140.0), cell_size=0.5,
                            params={"depth": 20.0}),
        roi=_square(102.4),
        depth_ranges=((19.0, 21.0),),
        sonar=SonarConfig(beam_spacing="equidistant"),
        planner="bf",
        output_dir="out/flat",
    )
    shaft_noise = replace(shaft, scenario="shaft_noise", noise_std=1.1, seed=7,
                          output_dir="out/shaft_noise")
    return {"shaft": shaft, "saddle": saddle, "channel": channel, "flat": flat,
            "shaft_noise": shaft_noise}
