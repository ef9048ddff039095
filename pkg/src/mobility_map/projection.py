"""Pinhole projection of scored points and the red-to-green overlay."""

from dataclasses import dataclass

import numpy as np

from .errors import BehindCameraError, ParameterError
from .validation import check_count, check_positive

SPLAT = 1  # half-width of the square painted around each projected point


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels, with the depth-to-color sensor offsets ``o_x, o_y``."""

    f_x: float = 570.3
    f_y: float = 570.3
    c_x: float = 320.0
    c_y: float = 240.0
    o_x: float = 0.0
    o_y: float = 0.0
    width: int = 640
    height: int = 480

    def __post_init__(self):
        check_positive(self.f_x, "f_x")
        check_positive(self.f_y, "f_y")
        check_count(self.width, "width")
        check_count(self.height, "height")
        for name in ("c_x", "c_y", "o_x", "o_y"):
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")


def _round_half_up(values):
    return np.floor(values + 0.5).astype(np.int64)


def project_continuous(points, cam):
    """Sub-pixel image coordinates ``(x, y)`` of points with ``Z > 0``, shape (n, 2)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    z = pts[:, 2]
    if np.any(z <= 0):
        raise BehindCameraError("points with Z <= 0 cannot be projected")
    x = cam.c_x + cam.f_x * pts[:, 0] / z - cam.o_x
    y = cam.c_y + cam.f_y * pts[:, 1] / z - cam.o_y
    return np.column_stack([x, y])


def project_point(point, cam=None):
    """Pixel ``(x, y)`` of one point, or ``None`` when it falls outside the image.

    Raises
    ------
    BehindCameraError
        ``Z <= 0``.
    """
    cam = cam or CameraIntrinsics()
    px = _round_half_up(project_continuous(point, cam))[0]
    if 0 <= px[0] < cam.width and 0 <= px[1] < cam.height:
        return int(px[0]), int(px[1])
    return None


def project_points(points, cam=None):
    """Rounded pixels of many points.

    Returns ``(pixels, visible)``; points behind the camera or outside the
    image are marked not visible instead of raising.
    """
    cam = cam or CameraIntrinsics()
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    pixels = np.zeros((len(pts), 2), dtype=np.int64)
    front = pts[:, 2] > 0
    if np.any(front):
        pixels[front] = _round_half_up(project_continuous(pts[front], cam))
    visible = (front & (pixels[:, 0] >= 0) & (pixels[:, 0] < cam.width)
               & (pixels[:, 1] >= 0) & (pixels[:, 1] < cam.height))
    return pixels, visible


def score_color(score):
    """Red (0) to green (1) color of mobility scores as uint8 RGB."""
    m = np.clip(np.asarray(score, dtype=float), 0.0, 1.0)
    rgb = np.stack([_round_half_up(255.0 * (1.0 - m)), _round_half_up(255.0 * m),
                    np.zeros_like(m, dtype=np.int64)], axis=-1)
    return rgb.astype(np.uint8)


def render_overlay(image, points, scores, cam=None):
    """Paint scored points onto a copy of ``image``.

    Each visible point colors a 3x3 block; where blocks overlap the point with
    the smaller depth wins, independent of input order (ties go to the lower
    point index).

    Parameters
    ----------
    image : uint8 array of shape (height, width, 3)
    points : array of shape (n, 3), sensor frame
    scores : array of shape (n,)
    cam : CameraIntrinsics
    """
    cam = cam or CameraIntrinsics()
    image = np.asarray(image)
    if image.shape != (cam.height, cam.width, 3):
        raise ParameterError(
            f"image shape {image.shape} does not match camera {cam.height}x{cam.width}x3")
    out = np.array(image, dtype=np.uint8, copy=True)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    scores = np.asarray(scores, dtype=float)
    if len(scores) != len(pts):
        raise ParameterError("scores must be parallel to points")
    pixels, visible = project_points(pts, cam)
    idx = np.flatnonzero(visible)
    if len(idx) == 0:
        return out
    offsets = np.arange(-SPLAT, SPLAT + 1)
    dx, dy = (a.ravel() for a in np.meshgrid(offsets, offsets))
    px = (pixels[idx, 0][:, None] + dx).ravel()
    py = (pixels[idx, 1][:, None] + dy).ravel()
    owner = np.repeat(idx, len(dx))
    inside = (px >= 0) & (px < cam.width) & (py >= 0) & (py < cam.height)
    px, py, owner = px[inside], py[inside], owner[inside]
    flat = py * cam.width + px
    order = np.lexsort((owner, pts[owner, 2], flat))
    flat, owner = flat[order], owner[order]
    first = np.ones(len(flat), dtype=bool)
    first[1:] = flat[1:] != flat[:-1]
    flat, owner = flat[first], owner[first]
    out.reshape(-1, 3)[flat] = score_color(scores[owner])
    return out


def blank_image(cam=None):
    cam = cam or CameraIntrinsics()
    return np.zeros((cam.height, cam.width, 3), dtype=np.uint8)
