"""Surface normals from local covariance analysis, and RGB-N color coding."""

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud, SpatialIndex
from .errors import DegenerateNeighborhoodError, InsufficientDataError, ParameterError
from .validation import check_count, check_vector3

# lambda1 / lambda2 below this ratio means the neighbourhood is (near) collinear
DEGENERATE_RATIO = 1e-10

# channel spans below this are rounding noise and count as zero
MIN_CHANNEL_SPAN = 1e-9


@dataclass(frozen=True)
class LocalPlaneFit:
    """Least-squares plane of a neighbourhood.

    ``eigenvalues`` are ascending; ``normal`` is the unit eigenvector of the
    smallest one.  ``degenerate`` flags a rank-deficient (collinear) spread.
    """

    centroid: np.ndarray
    covariance: np.ndarray
    eigenvalues: np.ndarray
    normal: np.ndarray
    degenerate: bool = False


def _is_degenerate(eigenvalues):
    # eigenvalues ascending along the last axis
    top = eigenvalues[..., 2]
    return eigenvalues[..., 1] <= DEGENERATE_RATIO * np.maximum(top, np.finfo(float).tiny)


def local_plane_fit(points, neighbor_indices=None):
    """Fit a plane to a neighbourhood through its covariance matrix.

    Parameters
    ----------
    points : PointCloud or array of shape (n, 3)
    neighbor_indices : sequence of int, optional
        Rows of ``points`` forming the neighbourhood; all rows when omitted.
    """
    pts = points.points if isinstance(points, PointCloud) else np.asarray(points, dtype=float)
    if neighbor_indices is not None:
        pts = pts[np.asarray(neighbor_indices, dtype=np.int64)]
    if len(pts) < 3:
        raise InsufficientDataError(f"a plane fit needs at least 3 points, got {len(pts)}")
    centroid = pts.mean(axis=0)
    diff = pts - centroid
    cov = diff.T @ diff / len(pts)
    if not np.any(cov):
        raise DegenerateNeighborhoodError("all neighbourhood points coincide")
    evals, evecs = np.linalg.eigh(cov)
    return LocalPlaneFit(centroid, cov, evals, evecs[:, 0], bool(_is_degenerate(evals)))


def orient_normal(normal, point, viewpoint=(0.0, 0.0, 0.0)):
    """Flip ``normal`` so that it faces ``viewpoint`` from ``point``.

    Returns ``(normal, ambiguous)``; when the normal is perpendicular to the
    viewing ray it is returned unchanged with ``ambiguous=True``.
    """
    normal = np.asarray(normal, dtype=float)
    dot = float(normal @ (np.asarray(viewpoint, dtype=float) - np.asarray(point, dtype=float)))
    if dot > 0:
        return normal.copy(), False
    if dot < 0:
        return -normal, False
    return normal.copy(), True


@dataclass(frozen=True)
class OrientedNormalField:
    """Per-point unit normals parallel to a cloud, oriented toward ``viewpoint``.

    ``degenerate`` marks points whose neighbourhood was collinear or coincident;
    ``ambiguous`` marks normals perpendicular to the viewing ray.
    """

    normals: np.ndarray
    viewpoint: np.ndarray
    degenerate: np.ndarray
    ambiguous: np.ndarray

    def __len__(self):
        return len(self.normals)

    @property
    def valid(self):
        return ~self.degenerate

    def select(self, indices):
        indices = np.asarray(indices)
        return OrientedNormalField(self.normals[indices], self.viewpoint,
                                   self.degenerate[indices], self.ambiguous[indices])


def estimate_normals(cloud, index=None, k=30, viewpoint=(0.0, 0.0, 0.0)):
    """Estimate an oriented normal for every point from its ``k``-point neighbourhood.

    The neighbourhood of a point is the point itself plus its ``k - 1`` nearest
    neighbours.
    """
    k = check_count(k, "k", minimum=3)
    viewpoint = check_vector3(viewpoint, "viewpoint")
    n = len(cloud)
    if n < k:
        raise InsufficientDataError(f"normal estimation with k={k} needs {k} points, got {n}")
    index = index if index is not None else SpatialIndex(cloud)
    _, nbrs = index.knn_all(k, exclude_self=False)
    pts = cloud.points
    hood = pts[nbrs]
    centroid = hood.mean(axis=1)
    diff = hood - centroid[:, None, :]
    cov = np.einsum("nki,nkj->nij", diff, diff) / k
    evals, evecs = np.linalg.eigh(cov)
    normals = np.ascontiguousarray(evecs[:, :, 0])
    degenerate = _is_degenerate(evals) | ~np.any(cov.reshape(n, -1), axis=1)
    # renormalise so unit length holds to rounding
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    dots = np.einsum("ni,ni->n", normals, viewpoint - pts)
    normals[dots < 0] *= -1.0
    ambiguous = dots == 0
    return OrientedNormalField(normals, viewpoint, degenerate, ambiguous)


def rgbn_encode(field):
    """Map normal components linearly onto 8-bit RGB.

    Each channel spans the min..max of its component over the non-degenerate
    normals; a zero-span channel (below ``MIN_CHANNEL_SPAN``) maps to 0 and
    degenerate points are black.
    """
    if len(field) == 0:
        raise ParameterError("cannot color-code an empty normal field")
    valid = field.valid
    if not np.any(valid):
        raise DegenerateNeighborhoodError("every normal in the field is degenerate")
    n = field.normals
    lo = n[valid].min(axis=0)
    hi = n[valid].max(axis=0)
    span = hi - lo
    scale = np.divide(255.0, span, out=np.zeros(3), where=span > MIN_CHANNEL_SPAN)
    values = (n - lo) * scale
    colors = np.floor(np.clip(values, 0.0, 255.0) + 0.5).astype(np.uint8)
    colors[~valid] = 0
    return colors
