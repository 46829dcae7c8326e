"""Exception types shared across the package.

The CLI maps these onto process exit codes; library users can catch the
base classes.
"""

from __future__ import annotations


class MdnucError(Exception):
    """Base class for all package errors."""


class ConfigError(MdnucError):
    """Invalid or unparseable run configuration (CLI exit code 2)."""


class TerrainError(MdnucError):
    """Invalid terrain parameters or malformed terrain input (exit code 3)."""


class FormatError(TerrainError):
    """Malformed terrain file. Carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(MdnucError):
    """Query outside the heightfield extent or into no-data cells."""


class MeshError(MdnucError):
    """Remeshing failed ("ROI under-resolved" or "fragmented ROI")."""


class PartitionError(MdnucError):
    """Depth-range labeling failed (face depth outside all ranges)."""


class UnreachableRegionError(MdnucError):
    """Blocked-edge filtering disconnected the face graph (exit code 4).

    Names one unreachable face and, when known, the region missing a gate.
    """

    def __init__(self, face: int, region: int | None = None):
        self.face = face
        self.region = region
        detail = f"face {face} is unreachable"
        if region is not None:
            detail += f" (region {region} has no usable gate)"
        super().__init__(detail)


class SimulationError(MdnucError):
    """Survey simulation could not run (exit code 5)."""
