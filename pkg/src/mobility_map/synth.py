"""Synthetic indoor scenes with per-point ground-truth labels.

Primitives are described in a z-up world frame (x right, y forward) and the
generated cloud is expressed in the sensor frame (X right, Y down, Z forward)
of a camera placed by :class:`CameraPose`.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .cloud import PointCloud
from .errors import ParameterError
from .validation import check_count, check_positive

FLOOR_GRAY = 128


@dataclass(frozen=True)
class CameraPose:
    """Camera at ``position`` looking along world +y, tilted down by ``pitch`` degrees."""

    position: tuple = (0.0, 0.0, 0.8)
    pitch: float = 35.0

    @property
    def rotation(self):
        """World-to-sensor rotation; rows are the sensor axes in world coordinates."""
        p = np.radians(self.pitch)
        right = np.array([1.0, 0.0, 0.0])
        forward = np.array([0.0, np.cos(p), -np.sin(p)])
        down = np.cross(forward, right)
        return np.vstack([right, down, forward])

    def to_sensor(self, points):
        return (np.asarray(points, dtype=float) - np.asarray(self.position)) @ self.rotation.T

    def direction_to_sensor(self, vectors):
        return np.asarray(vectors, dtype=float) @ self.rotation.T


@dataclass(frozen=True)
class Surface:
    """One sampled piece of a primitive: a rectangle ``origin + s*u + t*v`` (s, t in [0, 1)),
    optionally displaced along its normal by ``height(s, t)``."""

    name: str
    origin: np.ndarray
    u: np.ndarray
    v: np.ndarray
    slope: float
    roughness: float = 1.0
    height: object = None
    footprint_holes: tuple = ()

    @property
    def normal(self):
        n = np.cross(self.u, self.v)
        return n / np.linalg.norm(n)

    @property
    def area(self):
        return float(np.linalg.norm(np.cross(self.u, self.v)))

    def _open(self, pts):
        keep = np.ones(len(pts), dtype=bool)
        for inside in self.footprint_holes:
            keep &= ~inside(pts[:, :2])
        return keep

    @property
    def open_area(self):
        """Area left after cutting the footprint holes (estimated on a 256x256 lattice)."""
        if not self.footprint_holes:
            return self.area
        g = (np.arange(256) + 0.5) / 256
        s, t = (a.ravel() for a in np.meshgrid(g, g))
        pts = self.origin + np.outer(s, self.u) + np.outer(t, self.v)
        return self.area * float(self._open(pts).mean())

    def sample(self, rng, count, noise):
        """Exactly ``count`` uniform samples outside the holes, with normal-direction noise."""
        pts_out, nrm_out = [], []
        have = 0
        while have < count:
            m = count - have
            s = rng.random(m)
            t = rng.random(m)
            pts = self.origin + np.outer(s, self.u) + np.outer(t, self.v)
            normals = np.tile(self.normal, (m, 1))
            if self.height is not None:
                pts, normals = self.height(pts, s, t)
            keep = self._open(pts)
            pts, normals = pts[keep], normals[keep]
            pts_out.append(pts)
            nrm_out.append(normals)
            have += len(pts)
        pts = np.vstack(pts_out) if pts_out else np.zeros((0, 3))
        normals = np.vstack(nrm_out) if nrm_out else np.zeros((0, 3))
        if noise > 0:
            pts = pts + normals * rng.normal(0.0, noise, len(pts))[:, None]
        return pts, normals


def _v(*xs):
    return np.array(xs, dtype=float)


def _rect_footprint(center, half, yaw=0.0):
    """Membership test for a (rotated) rectangle in the xy plane."""
    c, s = np.cos(np.radians(yaw)), np.sin(np.radians(yaw))
    center = np.asarray(center, dtype=float)
    half = np.asarray(half, dtype=float)

    def inside(xy):
        d = xy - center
        local = np.column_stack([d[:, 0] * c + d[:, 1] * s, -d[:, 0] * s + d[:, 1] * c])
        return np.all(np.abs(local) <= half, axis=1)

    return inside


@dataclass(frozen=True)
class Floor:
    """Horizontal rectangle at ``z`` spanning ``x_range`` by ``y_range``."""

    x_range: tuple = (-1.0, 1.0)
    y_range: tuple = (0.0, 2.0)
    z: float = 0.0

    def surfaces(self, holes=()):
        (x0, x1), (y0, y1) = self.x_range, self.y_range
        return [Surface("floor", _v(x0, y0, self.z), _v(x1 - x0, 0, 0), _v(0, y1 - y0, 0), 0.0,
                        footprint_holes=tuple(holes))]


@dataclass(frozen=True)
class Ramp:
    """Plane rising along +y at ``angle`` degrees from the edge at ``(x, y)``."""

    angle: float = 30.0
    width: float = 0.6
    length: float = 0.6
    x: float = -0.3
    y: float = 0.8
    z: float = 0.0

    def surfaces(self):
        a = np.radians(self.angle)
        return [Surface("ramp", _v(self.x, self.y, self.z), _v(self.width, 0, 0),
                        _v(0, self.length * np.cos(a), self.length * np.sin(a)), float(self.angle))]

    def footprint(self):
        half = _v(self.width, self.length * np.cos(np.radians(self.angle))) / 2
        return _rect_footprint(_v(self.x, self.y) + half, half)


@dataclass(frozen=True)
class Wall:
    """Vertical rectangle from ``start`` to ``end`` (xy), ``height`` tall, facing right of start->end."""

    start: tuple = (-1.0, 2.0)
    end: tuple = (1.0, 2.0)
    height: float = 1.0
    z: float = 0.0

    def surfaces(self):
        s, e = _v(*self.start), _v(*self.end)
        # u along the wall, v up; u x v points to the right of start->end
        return [Surface("wall", _v(s[0], s[1], self.z), _v(e[0] - s[0], e[1] - s[1], 0),
                        _v(0, 0, self.height), 90.0)]


@dataclass(frozen=True)
class Box:
    """Box standing on ``z``, centred at ``center`` (xy), rotated by ``yaw`` degrees about z."""

    center: tuple = (0.0, 1.0)
    size: tuple = (0.4, 0.4, 0.3)
    yaw: float = 45.0
    z: float = 0.0

    def surfaces(self):
        sx, sy, sz = self.size
        c, s = np.cos(np.radians(self.yaw)), np.sin(np.radians(self.yaw))
        ex = _v(c, s, 0) * sx
        ey = _v(-s, c, 0) * sy
        up = _v(0, 0, sz)
        base = _v(self.center[0], self.center[1], self.z) - ex / 2 - ey / 2
        return [
            Surface("box_top", base + up, ex, ey, 0.0),
            Surface("box_-y", base, ex, up, 90.0),
            Surface("box_+x", base + ex, ey, up, 90.0),
            Surface("box_+y", base + ex + ey, -ex, up, 90.0),
            Surface("box_-x", base + ey, -ey, up, 90.0),
        ]

    def footprint(self):
        return _rect_footprint(self.center, _v(*self.size[:2]) / 2, self.yaw)


@dataclass(frozen=True)
class Step:
    """Riser facing -y at ``y`` plus the tread behind it, ``height`` above ``z``."""

    height: float = 0.15
    width: float = 0.8
    depth: float = 0.4
    x: float = -0.4
    y: float = 1.2
    z: float = 0.0

    def surfaces(self):
        o = _v(self.x, self.y, self.z)
        return [
            Surface("step_riser", o, _v(self.width, 0, 0), _v(0, 0, self.height), 90.0),
            Surface("step_tread", o + _v(0, 0, self.height), _v(self.width, 0, 0),
                    _v(0, self.depth, 0), 0.0),
        ]

    def footprint(self):
        half = _v(self.width, self.depth) / 2
        return _rect_footprint(_v(self.x, self.y) + half, half)


def corrugation_roughness(amplitude, period, x0=0.0, length=None):
    """Mean arclength factor of ``z = amplitude * sin(2*pi*x/period)`` over ``[x0, x0 + length]``."""
    length = period if length is None else length
    k = 2.0 * np.pi / period
    value, _ = quad(lambda x: np.sqrt(1.0 + (amplitude * k * np.cos(k * x)) ** 2),
                    x0, x0 + length, limit=200)
    return value / length


@dataclass(frozen=True)
class Corrugation:
    """Sheet ``z = z0 + amplitude * sin(2*pi*(x - x_range[0]) / period)`` over a rectangle."""

    amplitude: float = 0.02
    period: float = 0.2
    x_range: tuple = (-0.4, 0.4)
    y_range: tuple = (0.8, 1.4)
    z: float = 0.0

    def surfaces(self):
        (x0, x1), (y0, y1) = self.x_range, self.y_range
        k = 2.0 * np.pi / self.period
        amp = self.amplitude

        def height(pts, s, t):
            phase = k * (pts[:, 0] - x0)
            pts = pts.copy()
            pts[:, 2] += amp * np.sin(phase)
            normals = np.column_stack([-amp * k * np.cos(phase), np.zeros(len(pts)),
                                       np.ones(len(pts))])
            normals /= np.linalg.norm(normals, axis=1, keepdims=True)
            return pts, normals

        rough = corrugation_roughness(amp, self.period, 0.0, x1 - x0)
        return [Surface("corrugation", _v(x0, y0, self.z), _v(x1 - x0, 0, 0),
                        _v(0, y1 - y0, 0), 0.0, rough, height)]

    def footprint(self):
        (x0, x1), (y0, y1) = self.x_range, self.y_range
        return _rect_footprint(((x0 + x1) / 2, (y0 + y1) / 2), ((x1 - x0) / 2, (y1 - y0) / 2))


@dataclass(frozen=True)
class SurfaceTruth:
    """Ground truth of one labelled surface, in the sensor frame."""

    label: int
    name: str
    normal: np.ndarray
    plane: np.ndarray
    slope: float
    roughness: float
    area: float


@dataclass(frozen=True)
class SceneSpec:
    """Scene description.

    Parameters
    ----------
    primitives : sequence
        Floor, Ramp, Wall, Box, Step or Corrugation instances.
    density : float
        Points per square meter of (projected) surface.
    noise : float
        Standard deviation of the displacement along the surface normal (m).
    outliers : int
        Points drawn uniformly in the padded scene bounds, labelled -1.
    seed : int
    camera : CameraPose
    n_points : int, optional
        Exact total point count (outliers included); overrides ``density``.
    cull_hidden : bool
        Drop box faces whose outward normal points away from the camera.
    """

    primitives: tuple = ()
    density: float = 10000.0
    noise: float = 0.0
    outliers: int = 0
    seed: int = 0
    camera: CameraPose = field(default_factory=CameraPose)
    n_points: int = None
    cull_hidden: bool = True

    def __post_init__(self):
        check_positive(self.density, "density")
        if not np.isfinite(self.noise) or self.noise < 0:
            raise ParameterError(f"noise must be >= 0, got {self.noise}")
        check_count(self.outliers, "outliers", minimum=0)
        if self.n_points is not None:
            check_count(self.n_points, "n_points", minimum=self.outliers)


@dataclass(frozen=True)
class LabeledCloud:
    """Sensor-frame cloud with per-point surface labels and true normals."""

    cloud: PointCloud
    labels: np.ndarray
    normals: np.ndarray
    surfaces: list
    camera: CameraPose

    def surface(self, name):
        return next(s for s in self.surfaces if s.name == name)

    def mask(self, *names):
        ids = [s.label for s in self.surfaces if s.name in names or s.name.split("_")[0] in names]
        return np.isin(self.labels, ids)


def _collect(spec):
    holes = [p.footprint() for p in spec.primitives if hasattr(p, "footprint")]
    cam = np.asarray(spec.camera.position, dtype=float)
    out = []
    for prim in spec.primitives:
        surfaces = prim.surfaces(holes) if isinstance(prim, Floor) else prim.surfaces()
        for surf in surfaces:
            center = surf.origin + 0.5 * (surf.u + surf.v)
            if spec.cull_hidden and isinstance(prim, Box) and surf.normal @ (cam - center) <= 0:
                continue
            out.append(surf)
    return out


def _allocate(areas, total):
    """Split ``total`` in proportion to ``areas`` (largest remainder, ties to the first)."""
    share = np.asarray(areas) / np.sum(areas) * total
    counts = np.floor(share).astype(np.int64)
    rest = total - counts.sum()
    order = np.argsort(-(share - counts), kind="stable")
    counts[order[:rest]] += 1
    return counts


def generate(spec):
    """Sample ``spec`` into a :class:`LabeledCloud`; identical specs give identical clouds."""
    rng = np.random.default_rng(spec.seed)
    surfaces = _collect(spec)
    cam = spec.camera
    if not surfaces:
        return LabeledCloud(PointCloud.empty(), np.zeros(0, dtype=np.int64), np.zeros((0, 3)),
                            [], cam)
    areas = np.array([s.open_area for s in surfaces])
    if spec.n_points is not None:
        counts = _allocate(areas, spec.n_points - spec.outliers)
    else:
        counts = np.floor(areas * spec.density + 0.5).astype(np.int64)
    pts, nrm, lab, truth = [], [], [], []
    for label, (surf, count) in enumerate(zip(surfaces, counts)):
        p, n = surf.sample(rng, int(count), spec.noise)
        pts.append(p)
        nrm.append(n)
        lab.append(np.full(len(p), label, dtype=np.int64))
        normal = cam.direction_to_sensor(surf.normal)
        origin = cam.to_sensor(surf.origin)
        truth.append(SurfaceTruth(label, surf.name, normal, np.append(normal, -normal @ origin),
                                  surf.slope, surf.roughness, surf.area))
    pts = np.vstack(pts)
    nrm = np.vstack(nrm)
    lab = np.concatenate(lab)
    if spec.outliers:
        lo = pts.min(axis=0) - 0.2
        hi = pts.max(axis=0) + 0.2
        pts = np.vstack([pts, lo + rng.random((spec.outliers, 3)) * (hi - lo)])
        nrm = np.vstack([nrm, np.zeros((spec.outliers, 3))])
        lab = np.concatenate([lab, np.full(spec.outliers, -1, dtype=np.int64)])
    sensor = cam.to_sensor(pts)
    colors = np.full((len(sensor), 3), FLOOR_GRAY, dtype=np.uint8)
    return LabeledCloud(PointCloud(sensor, colors), lab, cam.direction_to_sensor(nrm), truth, cam)


PRESETS = {}


def preset(name):
    """Named scene spec; see :data:`PRESETS`."""
    try:
        return PRESETS[name]()
    except KeyError:
        raise ParameterError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def _register(fn):
    PRESETS[fn.__name__.replace("_scene", "")] = fn
    return fn


@_register
def floor_box_scene(seed=0):
    """Floor with a cabinet-sized box seen corner-on; about 70% floor and 30% box points.

    The box is taller than the camera, so only its two front faces are visible.
    """
    return SceneSpec((Floor((-0.87, 0.87), (0.5, 2.25)), Box((0.0, 1.4), (0.5, 0.5, 1.2), 45.0)),
                     density=8000.0, noise=0.001, seed=seed)


@_register
def box_scene(seed=0):
    """Floor with a low box seen corner-on (top and two side faces visible)."""
    return SceneSpec((Floor((-0.8, 0.8), (0.5, 2.0)), Box((0.0, 1.2), (0.4, 0.4, 0.3), 45.0)),
                     density=10000.0, noise=0.001, seed=seed)


@_register
def floor_ramp_scene(seed=0):
    return SceneSpec((Floor((-1.0, 1.0), (0.4, 2.0)), Ramp(15.0, 0.5, 0.5, -0.25, 0.9)),
                     density=10000.0, noise=0.001, seed=seed)


@_register
def corridor_scene(seed=0):
    """Corridor between two walls, with a box and a ramp on the floor."""
    return SceneSpec((Floor((-0.9, 0.9), (0.3, 2.2)), Wall((0.9, 2.2), (0.9, 0.3), 1.2),
                      Wall((-0.9, 0.3), (-0.9, 2.2), 1.2), Box((0.45, 1.2), (0.3, 0.3, 0.25), 30.0),
                      Ramp(15.0, 0.5, 0.5, -0.6, 0.9)),
                     density=10000.0, noise=0.001, seed=seed)


@_register
def bench_scene(seed=0):
    """A 640x480-sized frame: 307200 points, most of them beyond the 2 m range limit."""
    return SceneSpec((Floor((-2.2, 2.2), (0.3, 10.0)), Wall((2.2, 10.0), (2.2, 0.3), 2.2),
                      Wall((-2.2, 0.3), (-2.2, 10.0), 2.2), Wall((-2.2, 10.0), (2.2, 10.0), 2.2),
                      Box((0.4, 1.2), (0.3, 0.3, 0.25), 30.0), Ramp(15.0, 0.4, 0.5, -0.6, 0.9)),
                     noise=0.002, outliers=300, seed=seed, n_points=307200)
