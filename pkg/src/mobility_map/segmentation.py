"""Region growing on RGB-N colors measured in YCrCb."""

from dataclasses import dataclass

import numba
import numpy as np

from .cloud import PointCloud, SpatialIndex
from .errors import ParameterError
from .validation import check_count, check_positive

_YCRCB = np.array([0.299, 0.587, 0.114])


def rgb_to_ycrcb(rgb):
    """BT.601 full-range RGB to YCrCb, clamped to ``[0, 255]`` per channel.

    Accepts a single triple or an (n, 3) array.
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.shape[-1] != 3:
        raise ParameterError(f"expected RGB triples, got shape {rgb.shape}")
    if np.any(rgb < 0) or np.any(rgb > 255):
        raise ParameterError("RGB channels must lie in [0, 255]")
    y = rgb @ _YCRCB
    cr = (rgb[..., 0] - y) * 0.713 + 128.0
    cb = (rgb[..., 2] - y) * 0.564 + 128.0
    return np.clip(np.stack([y, cr, cb], axis=-1), 0.0, 255.0)


def color_distance(a, b):
    """Euclidean distance between YCrCb colors (broadcasts over leading axes)."""
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return np.sqrt((diff * diff).sum(axis=-1))


@dataclass(frozen=True)
class GrowConfig:
    """Region-growing parameters.

    color_threshold : admission bound on the YCrCb distance (strict)
    radius : neighbourhood radius in meters
    min_size : segments with fewer points are flagged undersized
    seed : seed for the random seed-point order
    """

    color_threshold: float = 6.0
    radius: float = 0.025
    min_size: int = 30
    seed: int = 0

    def __post_init__(self):
        check_positive(self.color_threshold, "color_threshold")
        check_positive(self.radius, "radius")
        check_count(self.min_size, "min_size")


@dataclass(frozen=True)
class Segment:
    """Sorted point indices of one region.  ``undersized`` marks regions below the minimum size."""

    id: int
    indices: np.ndarray
    undersized: bool = False

    def __len__(self):
        return len(self.indices)


def neighbor_csr(index, radius):
    """Fixed-radius neighbour lists as CSR ``(offsets, flat)``; each list is sorted and includes self."""
    lists = index.tree.query_ball_point(index.points, radius, return_sorted=True)
    lengths = np.fromiter((len(nb) for nb in lists), dtype=np.int64, count=len(lists))
    offsets = np.zeros(len(lists) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    flat = np.fromiter((j for nb in lists for j in nb), dtype=np.int64, count=int(offsets[-1]))
    return offsets, flat


@numba.njit(cache=True)
def _grow(order, available, offsets, flat, colors, threshold, labels):
    n = len(available)
    queue = np.empty(n, dtype=np.int64)
    nseg = 0
    limit = threshold * threshold
    for seed in order:
        if not available[seed]:
            continue
        available[seed] = False
        labels[seed] = nseg
        head = 0
        tail = 1
        queue[0] = seed
        while head < tail:
            p = queue[head]
            head += 1
            for t in range(offsets[p], offsets[p + 1]):
                q = flat[t]
                if not available[q]:
                    continue
                d2 = 0.0
                for c in range(3):
                    diff = colors[q, c] - colors[p, c]
                    d2 += diff * diff
                if d2 < limit:
                    available[q] = False
                    labels[q] = nseg
                    queue[tail] = q
                    tail += 1
        nseg += 1
    return nseg


def region_grow(cloud, index=None, cfg=None, exclude=None):
    """Partition ``cloud`` into regions of similar color.

    Seeds are drawn at random from the points still available; a region grows
    breadth-first through radius neighbours whose YCrCb distance to the point
    being expanded is below the threshold.

    Parameters
    ----------
    cloud : PointCloud
        Must carry (RGB-N) colors.
    index : SpatialIndex, optional
    cfg : GrowConfig, optional
    exclude : bool array, optional
        Points never placed in any segment (e.g. degenerate normals).

    Returns
    -------
    segments : list of Segment
        Ordered by id, which follows seed order.
    """
    cfg = cfg or GrowConfig()
    if not isinstance(cloud, PointCloud) or not cloud.has_colors:
        raise ParameterError("region growing needs a colored PointCloud")
    n = len(cloud)
    if n == 0:
        return []
    index = index if index is not None else SpatialIndex(cloud)
    available = np.ones(n, dtype=bool)
    if exclude is not None:
        exclude = np.asarray(exclude, dtype=bool)
        if exclude.shape != (n,):
            raise ParameterError(f"exclude must have shape ({n},), got {exclude.shape}")
        available &= ~exclude
    offsets, flat = neighbor_csr(index, cfg.radius)
    colors = rgb_to_ycrcb(cloud.colors)
    order = np.random.default_rng(cfg.seed).permutation(n)
    labels = np.full(n, -1, dtype=np.int64)
    nseg = _grow(order, available, offsets, flat, colors, float(cfg.color_threshold), labels)
    return segments_from_labels(labels, nseg, cfg.min_size)


def segments_from_labels(labels, count=None, min_size=1):
    """Group a label array (``-1`` = unassigned) into :class:`Segment` objects."""
    labels = np.asarray(labels, dtype=np.int64)
    if count is None:
        count = int(labels.max()) + 1 if len(labels) else 0
    assigned = np.flatnonzero(labels >= 0)
    order = assigned[np.argsort(labels[assigned], kind="stable")]
    bounds = np.searchsorted(labels[order], np.arange(count + 1))
    return [Segment(s, order[bounds[s]:bounds[s + 1]], bool(bounds[s + 1] - bounds[s] < min_size))
            for s in range(count)]


def segment_labels(segments, n):
    """Inverse of :func:`segments_from_labels`: per-point segment id, ``-1`` if unassigned."""
    labels = np.full(n, -1, dtype=np.int64)
    for seg in segments:
        labels[seg.indices] = seg.id
    return labels
