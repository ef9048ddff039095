"""Exception hierarchy shared by every stage of the pipeline."""


class MobilityMapError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(MobilityMapError, ValueError):
    """A parameter is outside its valid domain."""


class InputError(MobilityMapError):
    """A file could not be read or parsed."""


class InsufficientDataError(MobilityMapError):
    """Too few points for the requested operation."""


class DegenerateNeighborhoodError(MobilityMapError):
    """All points of a neighborhood coincide."""


class NoPlaneFoundError(MobilityMapError):
    """RANSAC could not find a plane with at least three inliers."""


class TriangulationError(MobilityMapError):
    """Delaunay triangulation is undefined (fewer than 3 distinct or all collinear points)."""


class HyperparameterError(MobilityMapError):
    """The GPR covariance matrix could not be factorized."""


class BehindCameraError(MobilityMapError):
    """A point with non-positive depth was projected."""


class StageError(MobilityMapError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")
