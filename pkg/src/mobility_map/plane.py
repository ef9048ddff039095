"""RANSAC plane extraction and ground removal."""

import math
from dataclasses import dataclass, field

import numpy as np

from .cloud import PointCloud
from .errors import DegenerateNeighborhoodError, InsufficientDataError, NoPlaneFoundError
from .normals import local_plane_fit
from .validation import check_count, check_positive, check_unit_interval, check_vector3

# triangle area below which a sampled triple counts as collinear (m^2)
COLLINEAR_AREA = 1e-10


@dataclass(frozen=True)
class PlaneModel:
    """Plane ``a*x + b*y + c*z + d = 0`` with unit ``(a, b, c)`` and its inlier indices."""

    coefficients: np.ndarray
    inliers: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def normal(self):
        return self.coefficients[:3]

    @property
    def offset(self):
        return float(self.coefficients[3])

    def signed_distance(self, points):
        return np.asarray(points, dtype=float) @ self.normal + self.offset

    def project(self, points):
        points = np.asarray(points, dtype=float)
        return points - np.outer(self.signed_distance(points), self.normal)


@dataclass(frozen=True)
class RansacConfig:
    """RANSAC parameters.

    probability : desired chance that at least one sample is outlier-free
    outlier_ratio : expected fraction of outliers
    sample_size : points per hypothesis (3 for a plane)
    distance_threshold : inlier band half-width in meters
    max_iterations : hard cap on the derived iteration count
    """

    probability: float = 0.99
    outlier_ratio: float = 0.5
    sample_size: int = 3
    distance_threshold: float = 0.01
    max_iterations: int = 10000

    def __post_init__(self):
        check_unit_interval(self.probability, "probability")
        check_unit_interval(self.outlier_ratio, "outlier_ratio", closed_low=True)
        check_count(self.sample_size, "sample_size")
        check_positive(self.distance_threshold, "distance_threshold")
        check_count(self.max_iterations, "max_iterations")

    @property
    def iterations(self):
        return min(ransac_iterations(self.probability, self.outlier_ratio, self.sample_size),
                   self.max_iterations)


def ransac_iterations(p, epsilon, gamma):
    """Number of RANSAC trials needed to draw one all-inlier sample with probability ``p``.

    ``epsilon`` is the outlier fraction and ``gamma`` the sample size.
    """
    p = check_unit_interval(p, "p")
    epsilon = check_unit_interval(epsilon, "epsilon", closed_low=True)
    gamma = check_count(gamma, "gamma")
    good = (1.0 - epsilon) ** gamma
    if good >= 1.0:
        return 1
    return max(1, math.ceil(math.log(1.0 - p) / math.log(1.0 - good)))


def _plane_through(p0, p1, p2):
    normal = np.cross(p1 - p0, p2 - p0)
    norm = np.linalg.norm(normal)
    return normal, norm


@dataclass(frozen=True)
class _Hypothesis:
    coefficients: np.ndarray
    inliers: np.ndarray
    residual: float


def _search(points, cfg, rng):
    n = len(points)
    if n < 3:
        raise NoPlaneFoundError(f"need at least 3 points, got {n}")
    threshold = cfg.distance_threshold
    best = None
    # re-rolls for collinear triples are bounded so an all-collinear cloud terminates
    max_draws = cfg.iterations * 100
    draws = 0
    trials = 0
    while trials < cfg.iterations:
        if draws >= max_draws:
            break
        draws += 1
        i, j, k = rng.choice(n, 3, replace=False)
        normal, norm = _plane_through(points[i], points[j], points[k])
        if 0.5 * norm < COLLINEAR_AREA:
            continue
        trials += 1
        normal = normal / norm
        d = -float(normal @ points[i])
        dist = np.abs(points @ normal + d)
        mask = dist <= threshold
        count = int(np.count_nonzero(mask))
        if count < 3:
            continue
        residual = float(dist[mask].sum())
        if best is None or count > len(best.inliers) or (
                count == len(best.inliers) and residual < best.residual):
            best = _Hypothesis(np.append(normal, d), np.flatnonzero(mask), residual)
    if best is None:
        raise NoPlaneFoundError("no plane hypothesis gathered 3 or more inliers")
    return best


def _orient(normal, d, anchor, viewpoint):
    if normal @ (viewpoint - anchor) < 0:
        return -normal, -d
    return normal, d


def ransac_plane(points, cfg=None, seed=0, viewpoint=(0.0, 0.0, 0.0)):
    """Fit the plane with the largest consensus set, refined by least squares.

    Parameters
    ----------
    points : PointCloud or array of shape (n, 3)
    cfg : RansacConfig, optional
    seed : int
        Seed for the sampling RNG; equal seeds give bit-identical results.
    viewpoint : 3-vector
        The returned normal faces this point.
    """
    cfg = cfg or RansacConfig()
    viewpoint = check_vector3(viewpoint, "viewpoint")
    pts = points.points if isinstance(points, PointCloud) else np.asarray(points, dtype=float)
    best = _search(pts, cfg, np.random.default_rng(seed))
    try:
        fit = local_plane_fit(pts, best.inliers)
    except (InsufficientDataError, DegenerateNeighborhoodError) as exc:
        raise NoPlaneFoundError(str(exc)) from exc
    normal = fit.normal / np.linalg.norm(fit.normal)
    d = -float(normal @ fit.centroid)
    normal, d = _orient(normal, d, fit.centroid, viewpoint)
    inliers = np.flatnonzero(np.abs(pts @ normal + d) <= cfg.distance_threshold)
    if len(inliers) < 3:
        raise NoPlaneFoundError("refined plane keeps fewer than 3 inliers")
    return PlaneModel(np.append(normal, d), inliers)


@dataclass(frozen=True)
class GroundSplit:
    """Result of ground removal.

    ``ground`` indexes the input cloud; ``rest`` is the remaining cloud and
    ``rest_indices`` maps each of its points back to the input cloud.
    """

    plane: PlaneModel
    ground: np.ndarray
    rest: PointCloud
    rest_indices: np.ndarray
    rest_normals: object = None

    @property
    def ground_normal(self):
        return self.plane.normal


def remove_ground(cloud, field=None, cfg=None, seed=0, viewpoint=None):
    """Split off the largest plane of ``cloud`` as the ground.

    ``field`` (an :class:`~mobility_map.normals.OrientedNormalField`) supplies
    the viewpoint and is re-indexed to follow the remaining points.
    """
    if viewpoint is None:
        viewpoint = field.viewpoint if field is not None else np.zeros(3)
    plane = ransac_plane(cloud, cfg, seed, viewpoint)
    mask = np.ones(len(cloud), dtype=bool)
    mask[plane.inliers] = False
    rest_idx = np.flatnonzero(mask)
    rest_normals = field.select(rest_idx) if field is not None else None
    return GroundSplit(plane, plane.inliers, cloud.select(rest_idx), rest_idx, rest_normals)
