"""Per-segment slope and roughness."""

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud
from .delaunay import delaunay_2d
from .errors import (DegenerateNeighborhoodError, InsufficientDataError, NoPlaneFoundError,
                     ParameterError, TriangulationError)
from .plane import PlaneModel, ransac_plane
from .validation import check_vector3

MIN_TRIANGLE_AREA = 1e-14

# triangles with a projected edge longer than this multiple of the median edge
# are hull slivers or gap bridges and are left out of both areas
MAX_EDGE_FACTOR = 4.0


def slope_degrees(n_i, n_f):
    """Angle between two plane normals in degrees, folded into ``[0, 90]``."""
    a = check_vector3(n_i, "n_i")
    b = check_vector3(n_f, "n_f")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ParameterError("normals must be non-zero")
    cos = float(np.clip(a @ b / (na * nb), -1.0, 1.0))
    theta = float(np.degrees(np.arccos(cos)))
    return 180.0 - theta if theta > 90.0 else theta


@dataclass(frozen=True)
class TriMesh:
    """Triangle mesh: (n, 3) vertices and (m, 3) vertex-index triples."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        t = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ParameterError(f"vertices must have shape (n, 3), got {v.shape}")
        if len(t) and (t.min() < 0 or t.max() >= len(v)):
            raise ParameterError("triangle references a missing vertex")
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            raise ParameterError("triangle vertices must be distinct")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)

    def triangle_areas(self):
        v1, v2, v3 = (self.vertices[self.triangles[:, j]] for j in range(3))
        return 0.5 * np.linalg.norm(np.cross(v2 - v1, v3 - v2), axis=1)


def mesh_area(mesh):
    """Total area: half the cross-product magnitude of consecutive edges, summed."""
    return float(mesh.triangle_areas().sum())


def plane_basis(normal):
    """Two orthonormal in-plane axes ``(u, v)`` completing ``normal`` to a right-handed frame."""
    n = check_vector3(normal, "normal")
    n = n / np.linalg.norm(n)
    helper = np.eye(3)[int(np.argmin(np.abs(n)))]
    u = np.cross(n, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(n, u)


def _segment_points(cloud, segment):
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    if segment is None:
        return pts
    indices = getattr(segment, "indices", segment)
    return pts[np.asarray(indices, dtype=np.int64)]


def _edge_lengths(uv, tri):
    edges = np.sort(np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1)
    edges = np.unique(edges, axis=0)
    return np.linalg.norm(uv[edges[:, 0]] - uv[edges[:, 1]], axis=1)


def _longest_edge(uv, tri):
    a, b, c = (uv[tri[:, j]] for j in range(3))
    return np.max([np.linalg.norm(b - a, axis=1), np.linalg.norm(c - b, axis=1),
                   np.linalg.norm(a - c, axis=1)], axis=0)


def roughness(cloud, segment, plane):
    """Ratio of the segment's surface area to the area of its projection on ``plane``.

    The projection is triangulated in an in-plane 2D frame and the same
    connectivity is used for both areas, so a planar segment gives exactly 1.
    Triangles with an edge longer than ``MAX_EDGE_FACTOR`` times the median
    edge are dropped from both sums: on a curved segment the long thin
    triangles along the hull would otherwise add area the surface does not
    have.  Small rounding below 1 is clamped.

    Raises
    ------
    TriangulationError
        The projected points are collinear or too few.
    """
    pts = _segment_points(cloud, segment)
    if len(pts) < 3:
        raise TriangulationError(f"need at least 3 points, got {len(pts)}")
    normal = plane.normal if isinstance(plane, PlaneModel) else np.asarray(plane, float)[:3]
    u, v = plane_basis(normal)
    origin = pts.mean(axis=0)
    rel = pts - origin
    uv = np.column_stack([rel @ u, rel @ v])
    tri = delaunay_2d(uv)
    flat = np.column_stack([uv, np.zeros(len(uv))])
    projected = TriMesh(flat, tri)
    keep = projected.triangle_areas() > MIN_TRIANGLE_AREA
    if not np.any(keep):
        raise TriangulationError("projection has no triangle of positive area")
    keep &= _longest_edge(uv, tri) <= MAX_EDGE_FACTOR * np.median(_edge_lengths(uv, tri))
    tri = tri[keep]
    a3 = mesh_area(TriMesh(pts, tri))
    a2 = mesh_area(TriMesh(flat, tri))
    return max(a3 / a2, 1.0)


def segment_plane(cloud, segment=None, cfg=None, seed=0, viewpoint=(0.0, 0.0, 0.0)):
    """RANSAC plane of a segment, refined by least squares and facing ``viewpoint``."""
    pts = _segment_points(cloud, segment)
    return ransac_plane(pts, cfg, seed, viewpoint)


@dataclass(frozen=True)
class SurfaceProperties:
    """Slope (degrees) and roughness of one segment.

    ``defined`` is False when the plane or triangulation could not be built;
    slope and roughness are then NaN and ``reason`` says why.
    """

    slope: float
    roughness: float
    plane: PlaneModel = None
    defined: bool = True
    reason: str = ""

    @classmethod
    def undefined(cls, reason):
        return cls(float("nan"), float("nan"), None, False, reason)


def segment_properties(cloud, segment, ground_normal, cfg=None, seed=0,
                       viewpoint=(0.0, 0.0, 0.0)):
    """Slope against ``ground_normal`` and roughness of one segment.

    Degenerate input yields ``SurfaceProperties.undefined`` rather than raising.
    """
    try:
        plane = segment_plane(cloud, segment, cfg, seed, viewpoint)
        slope = slope_degrees(plane.normal, ground_normal)
        rough = roughness(cloud, segment, plane)
    except (NoPlaneFoundError, TriangulationError, InsufficientDataError,
            DegenerateNeighborhoodError) as exc:
        return SurfaceProperties.undefined(f"{type(exc).__name__}: {exc}")
    return SurfaceProperties(slope, rough, plane)
