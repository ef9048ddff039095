"""The staged mobility-map pipeline and its report."""

import time
from dataclasses import dataclass, field

import numpy as np

from .cloud import SpatialIndex, denoise_statistical, range_filter, voxel_downsample
from .config import PipelineConfig
from .errors import MobilityMapError, ParameterError, StageError
from .mobility import MobilityMap, MobilityRegressor, score_segments
from .normals import estimate_normals, rgbn_encode
from .plane import remove_ground
from .projection import blank_image, render_overlay, score_color
from .segmentation import region_grow
from .surface import SurfaceProperties, segment_properties

SCHEMA = 1

STAGES = (
    "Denoise",
    "Data reduction",
    "Normal estimation",
    "RGB-N coding",
    "Ground removal",
    "Color segmentation",
    "Surface properties estimation",
    "Mobility mapping",
)


@dataclass
class PipelineResult:
    """Everything the pipeline produced.

    ``cloud`` is the reduced, RGB-N colored cloud that normals, ground removal
    and scoring refer to; ``labels`` gives each of its points a map id (0 for
    ground, ``segment.id + 1`` for regions, -1 for excluded points).
    """

    config: PipelineConfig
    input_size: int
    cloud: object = None
    normals: object = None
    ground: object = None
    segments: list = field(default_factory=list)
    properties: list = field(default_factory=list)
    map: MobilityMap = None
    points: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def labels(self):
        return self.map.labels

    def point_scores(self):
        return self.map.point_scores()

    def report(self, include_timings=False):
        """JSON-ready summary; timings are left out unless asked for so reports are reproducible."""
        stages = []
        for name in STAGES:
            row = {"name": name, "points": int(self.points.get(name, 0))}
            if include_timings:
                row["time_ms"] = round(self.timings.get(name, 0.0) * 1000.0, 3)
            stages.append(row)
        segments = []
        planes = {0: self.ground.plane.coefficients}
        for seg, prop in zip(self.segments, self.properties):
            planes[seg.id + 1] = None if prop.plane is None else prop.plane.coefficients
        for entry in self.map.entries:
            plane = planes.get(entry.segment_id)
            segments.append({
                "id": entry.segment_id,
                "points": entry.n_points,
                "status": entry.status,
                "plane": None if plane is None else [float(c) for c in plane],
                "slope": _finite_or_none(entry.slope),
                "roughness": _finite_or_none(entry.roughness),
                "score": float(entry.score),
            })
        report = {
            "schema": SCHEMA,
            "input_points": self.input_size,
            "config": self.config.as_dict(),
            "stages": stages,
            "ground_plane": [float(c) for c in self.ground.plane.coefficients],
            "segments": segments,
        }
        if include_timings:
            report["total_ms"] = round(sum(self.timings.values()) * 1000.0, 3)
        return report

    def overlay(self, image=None):
        cam = self.config.camera
        image = blank_image(cam) if image is None else image
        return render_overlay(image, self.cloud.points, self.point_scores(), cam)

    def score_colors(self):
        return score_color(self.point_scores())


def _finite_or_none(value):
    value = float(value)
    return value if np.isfinite(value) else None


class _Stages:
    """Runs named stages, recording wall time and input size, and tagging failures."""

    def __init__(self, result):
        self.result = result

    def run(self, name, size, fn, *args, **kwargs):
        self.result.points[name] = int(size)
        start = time.perf_counter()
        try:
            out = fn(*args, **kwargs)
        except ParameterError:
            raise
        except MobilityMapError as exc:
            raise StageError(name, exc) from exc
        self.result.timings[name] = time.perf_counter() - start
        return out


def _reduce(cloud, cfg):
    return range_filter(voxel_downsample(cloud, cfg.voxel_edge), cfg.max_depth)


def _properties(rest, segments, ground_normal, cfg, viewpoint):
    props = []
    for seg in segments:
        if seg.undersized:
            props.append(SurfaceProperties.undefined("undersized"))
        else:
            props.append(segment_properties(rest, seg, ground_normal, cfg.ransac, cfg.seed,
                                            viewpoint))
    return props


def _mobility(segments, props, cfg, split, n):
    model = MobilityRegressor(cfg.sigma_f, cfg.length_scale, cfg.sigma_n).fit()
    entries = score_segments(segments, props, model, ground_size=len(split.ground))
    labels = np.full(n, -1, dtype=np.int64)
    labels[split.ground] = 0
    for seg in segments:
        labels[split.rest_indices[seg.indices]] = seg.id + 1
    return MobilityMap(entries, labels)


def run_pipeline(cloud, cfg=None):
    """Run every stage on ``cloud`` (sensor frame) and return a :class:`PipelineResult`.

    Raises
    ------
    StageError
        A stage failed; ``.stage`` names it.
    ParameterError
        Invalid configuration.
    """
    cfg = cfg or PipelineConfig()
    result = PipelineResult(cfg, len(cloud))
    stages = _Stages(result)
    viewpoint = np.zeros(3)

    denoised, _ = stages.run("Denoise", len(cloud), denoise_statistical, cloud,
                             cfg.denoise_k, cfg.denoise_alpha)
    reduced = stages.run("Data reduction", len(denoised), _reduce, denoised, cfg)
    index = SpatialIndex(reduced)
    normals = stages.run("Normal estimation", len(reduced), estimate_normals, reduced, index,
                         cfg.normal_k, viewpoint)
    colors = stages.run("RGB-N coding", len(reduced), rgbn_encode, normals)
    coded = reduced.with_colors(colors)
    split = stages.run("Ground removal", len(coded), remove_ground, coded, normals, cfg.ransac,
                       cfg.seed)
    rest = split.rest
    segments = stages.run("Color segmentation", len(rest), region_grow, rest, None, cfg.grow,
                          split.rest_normals.degenerate)
    props = stages.run("Surface properties estimation", len(rest), _properties, rest, segments,
                       split.ground_normal, cfg, viewpoint)
    mobility_map = stages.run("Mobility mapping", len(rest), _mobility, segments, props, cfg,
                              split, len(coded))
    result.cloud = coded
    result.normals = normals
    result.ground = split
    result.segments = segments
    result.properties = props
    result.map = mobility_map
    return result
