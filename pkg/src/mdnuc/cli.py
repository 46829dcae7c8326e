"""Command-line workflow: gen, plan, survey, compare.

Exit codes: 0 success, 2 config error, 3 terrain generation error,
4 unreachable region (gating disconnected the mesh), 5 simulation error.
The output directory resolves as: --out flag, then the MDNUC_OUT
environment variable, then the config's output_dir.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .config import RunConfig, load_config, preset_configs
from .coverage import Report, compare, comparison_csv, comparison_text
from .errors import (ConfigError, MdnucError, SimulationError, TerrainError,
                     UnreachableRegionError)
from .pipeline import (plan_scenario, survey_scenario, write_plan_artifacts,
                       write_survey_artifacts, write_terrain_artifacts)
from .planner import load_path_csv

EXIT_CONFIG = 2
EXIT_TERRAIN = 3
EXIT_UNREACHABLE = 4
EXIT_SIMULATION = 5


def _resolve_config(args: argparse.Namespace, config_path: str | None = None) -> RunConfig:
    if config_path is None:
        config_path = getattr(args, "config", None)
    preset = getattr(args, "preset", None)
    if preset:
        presets = preset_configs()
        if preset not in presets:
            raise ConfigError(
                f"unknown preset {preset!r}; available presets: "
                f"{', '.join(sorted(presets))}")
        cfg = presets[preset]
    elif config_path:
        cfg = load_config(config_path)
    else:
        raise ConfigError("either --config or --preset is required")
    if getattr(args, "planner", None):
        cfg = replace(cfg, planner=args.planner)
    if getattr(args, "resolution", None):
        cfg = cfg.with_resolution(args.resolution)
    if getattr(args, "cell_size", None):
        cfg = replace(cfg, terrain=replace(cfg.terrain, cell_size=args.cell_size))
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    out = getattr(args, "out", None) or os.environ.get("MDNUC_OUT")
    if out:
        cfg = replace(cfg, output_dir=out)
    return cfg


def _outdir(cfg: RunConfig) -> Path:
    return Path(cfg.output_dir)


def cmd_gen(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    files = write_terrain_artifacts(cfg, _outdir(cfg))
    hf = cfg.terrain.build()
    print(f"{cfg.scenario}: wrote {files[0]} ({hf.nx}x{hf.ny} nodes, "
          f"cell {hf.cell_size:g} m, depths {hf.min_depth():.2f}-"
          f"{hf.max_depth():.2f} m)")
    return 0


def _plan_one(cfg: RunConfig, geojson: bool) -> int:
    result = plan_scenario(cfg)
    files = write_plan_artifacts(result, _outdir(cfg), geojson)
    s = result.summary
    print(f"{cfg.scenario}/{cfg.planner}: {s['faces']} faces, "
          f"{s['regions']} region(s), {len(s['gates'])} gate(s), "
          f"path {s['path_length_m']:.1f} m -> {len(files)} file(s) in "
          f"{_outdir(cfg)}")
    return 0


def cmd_plan(args: argparse.Namespace) -> int:
    configs = args.config or [None]
    jobs = max(1, args.jobs)
    cfgs = [_resolve_config(args, c) for c in configs]
    if jobs == 1 or len(cfgs) == 1:
        for cfg in cfgs:
            _plan_one(cfg, args.geojson)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(lambda c: _plan_one(c, args.geojson), cfgs))
    return 0


def _survey_one(cfg: RunConfig, path_csvs: list[str]) -> int:
    paths = None
    if path_csvs:
        paths = []
        for f in path_csvs:
            p = Path(f)
            if not p.exists():
                raise SimulationError(f"path file not found: {f}")
            with open(p, encoding="utf-8") as fh:
                paths.append(load_path_csv(fh, planner=cfg.planner,
                                           config_hash=cfg.config_hash()))
        plan = None
    else:
        plan = plan_scenario(cfg)
    grid, report = survey_scenario(cfg, plan, paths)
    files = write_survey_artifacts(cfg, grid, report, _outdir(cfg))
    print(f"{cfg.scenario}/{cfg.planner}: coverage {report.coverage_pct:.2f}% "
          f"({report.covered_cells}/{report.mask_cells} cells, "
          f"{report.skipped_pings} skipped pings, {report.wall_time_s:.1f} s) "
          f"-> {', '.join(str(f) for f in files)}")
    return 0


def cmd_survey(args: argparse.Namespace) -> int:
    configs = args.config or [None]
    jobs = max(1, args.jobs)
    cfgs = [_resolve_config(args, c) for c in configs]
    if jobs == 1 or len(cfgs) == 1:
        for cfg in cfgs:
            _survey_one(cfg, args.path_csv)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(lambda c: _survey_one(c, args.path_csv), cfgs))
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    report_files: list[Path] = [Path(f) for f in args.reports]
    if args.reports_dir:
        report_files += sorted(Path(args.reports_dir).glob("**/*report*.json"))
    if not report_files:
        raise ConfigError("no reports given (pass report JSON files or --reports-dir)")
    reports = []
    for f in report_files:
        if not f.exists():
            raise ConfigError(f"report file not found: {f}")
        reports.append(Report.from_json(f.read_text(encoding="utf-8")))
    rows = compare(reports)
    text = comparison_text(rows)
    print(text, end="")
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "comparison.csv").write_text(comparison_csv(rows), encoding="utf-8")
        (outdir / "comparison.txt").write_text(text, encoding="utf-8")
        print(f"wrote {outdir / 'comparison.csv'} and {outdir / 'comparison.txt'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdnuc",
        description="Depth-adaptive coverage planning and multibeam survey "
                    "simulation for USV bathymetry.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, multi_config: bool = False) -> None:
        if multi_config:
            p.add_argument("--config", action="append", metavar="FILE",
                           help="run config JSON (repeatable)")
        else:
            p.add_argument("--config", metavar="FILE", help="run config JSON")
        p.add_argument("--preset", metavar="NAME",
                       help="built-in preset (shaft, saddle, channel, flat, "
                            "shaft_noise)")
        p.add_argument("--out", metavar="DIR",
                       help="output directory (overrides MDNUC_OUT and config; "
                            "default: config output_dir)")

    p_gen = sub.add_parser("gen", help="generate terrain and write it to disk")
    add_common(p_gen)
    p_gen.add_argument("--cell-size", type=float, metavar="M",
                       help="terrain grid spacing override (default: config)")
    p_gen.set_defaults(func=cmd_gen)

    p_plan = sub.add_parser("plan", help="remesh, partition, and plan a path")
    add_common(p_plan, multi_config=True)
    p_plan.add_argument("--planner", choices=("bf", "mdbf", "nuc", "mdnuc"),
                        help="planner override (default: config planner)")
    p_plan.add_argument("--resolution", type=float, metavar="M",
                        help="survey resolution override: sets sonar sounding "
                             "spacing and eval grid (default: config)")
    p_plan.add_argument("--geojson", action="store_true",
                        help="also write GeoJSON path exports (default: off)")
    p_plan.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="parallel scenario runs (default: 1)")
    p_plan.set_defaults(func=cmd_plan)

    p_survey = sub.add_parser("survey", help="simulate the sounding run and "
                                             "evaluate coverage")
    add_common(p_survey, multi_config=True)
    p_survey.add_argument("--planner", choices=("bf", "mdbf", "nuc", "mdnuc"),
                          help="planner override (default: config planner)")
    p_survey.add_argument("--resolution", type=float, metavar="M",
                          help="survey resolution override (default: config)")
    p_survey.add_argument("--path-csv", action="append", default=[], metavar="FILE",
                          help="survey these exported path CSVs instead of "
                               "planning inline (repeatable; default: plan inline)")
    p_survey.add_argument("--seed", type=int, metavar="N",
                          help="noise seed override (default: config seed)")
    p_survey.add_argument("--jobs", type=int, default=1, metavar="N",
                          help="parallel scenario runs (default: 1)")
    p_survey.set_defaults(func=cmd_survey)

    p_cmp = sub.add_parser("compare", help="tabulate planner coverage reports")
    p_cmp.add_argument("reports", nargs="*", metavar="REPORT.json",
                       help="report JSON files")
    p_cmp.add_argument("--reports-dir", metavar="DIR",
                       help="scan a directory tree for *report*.json files")
    p_cmp.add_argument("--out", metavar="DIR",
                       help="write comparison.csv / comparison.txt here "
                            "(default: print only)")
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnreachableRegionError as exc:
        print(f"unreachable region: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    except TerrainError as exc:
        print(f"terrain error: {exc}", file=sys.stderr)
        return EXIT_TERRAIN
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except MdnucError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
