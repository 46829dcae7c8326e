"""Depth-adaptive coverage path planning for USV bathymetric surveys.

Plans a single continuous sounding path over a footprint-sized triangle
mesh of the survey region, partitions the seafloor into depth bands with
gated crossings, adapts the echo sounder aperture per band, and evaluates
the result against back-and-forth baselines on a simulated coverage grid.
"""

from .config import RunConfig, config_from_dict, load_config, preset_configs
from .coverage import CoverageGrid, Report, compare, evaluate, simulate
from .errors import (ConfigError, DomainError, FormatError, MdnucError, MeshError,
                     PartitionError, SimulationError, TerrainError,
                     UnreachableRegionError)
from .mesh import (DualGraph, FaceQuads, TriMesh, build_dual, footprint_target,
                   mesh_from_arrays, remesh, subdivide_quads)
from .partition import Partition, assign_regions, find_shared_edges, partition_mesh, \
    region_mean_depth, select_gates
from .planner import (CoveragePath, SkeletonTree, build_skeleton, circumnavigate,
                      plan_bf, plan_mdbf, plan_mdnuc, plan_nuc, resample)
from .sonar import Ping, SonarConfig, cast_ray, footprint_width, opening_angle, ping
from .terrain import (DepthRange, Heightfield, RoiPolygon, depth_at, gen_channel,
                      gen_saddle, gen_shaft, load_grid)

__version__ = "0.1.0"

__all__ = [
    "CoverageGrid", "CoveragePath", "DepthRange", "DualGraph", "FaceQuads",
    "Heightfield", "Partition", "Ping", "Report", "RoiPolygon", "RunConfig",
    "SkeletonTree", "SonarConfig", "TriMesh",
    "assign_regions", "build_dual", "build_skeleton", "cast_ray", "circumnavigate",
    "compare", "config_from_dict", "depth_at", "evaluate", "find_shared_edges",
    "footprint_target", "footprint_width", "gen_channel", "gen_saddle", "gen_shaft",
    "load_config", "load_grid", "mesh_from_arrays", "opening_angle",
    "partition_mesh", "ping", "plan_bf", "plan_mdbf", "plan_mdnuc", "plan_nuc",
    "preset_configs", "region_mean_depth", "remesh", "resample", "select_gates",
    "simulate", "subdivide_quads",
    "ConfigError", "DomainError", "FormatError", "MdnucError", "MeshError",
    "PartitionError", "SimulationError", "TerrainError", "UnreachableRegionError",
]
