"""Pipeline configuration: one flat record of every tunable, loadable from key=value text."""

import dataclasses
from dataclasses import dataclass

from .errors import ParameterError
from .plane import RansacConfig
from .projection import CameraIntrinsics
from .segmentation import GrowConfig
from .validation import check_count, check_positive


@dataclass(frozen=True)
class PipelineConfig:
    """All pipeline parameters; domains are checked on construction."""

    voxel_edge: float = 0.01
    max_depth: float = 2.0
    denoise_k: int = 30
    denoise_alpha: float = 1.0
    normal_k: int = 30
    ransac_probability: float = 0.99
    ransac_outlier_ratio: float = 0.5
    ransac_threshold: float = 0.01
    ransac_max_iterations: int = 10000
    color_threshold: float = 6.0
    grow_radius: float = 0.025
    min_segment_size: int = 30
    sigma_f: float = 1.0
    length_scale: float = 0.1
    sigma_n: float = 0.01
    f_x: float = 570.3
    f_y: float = 570.3
    c_x: float = 320.0
    c_y: float = 240.0
    o_x: float = 0.0
    o_y: float = 0.0
    width: int = 640
    height: int = 480
    seed: int = 0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.type is int and (isinstance(value, bool) or not isinstance(value, int)):
                raise ParameterError(f"{f.name} must be an integer, got {value!r}")
            if f.type is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
                raise ParameterError(f"{f.name} must be a number, got {value!r}")
        check_positive(self.voxel_edge, "voxel_edge")
        check_positive(self.max_depth, "max_depth")
        check_count(self.denoise_k, "denoise_k")
        check_positive(self.denoise_alpha, "denoise_alpha")
        check_count(self.normal_k, "normal_k", minimum=3)
        check_positive(self.sigma_f, "sigma_f")
        check_positive(self.length_scale, "length_scale")
        if not self.sigma_n >= 0:
            raise ParameterError(f"sigma_n must be >= 0, got {self.sigma_n}")
        check_count(self.seed, "seed", minimum=0)
        # sub-configs carry their own checks
        self.ransac
        self.grow
        self.camera

    @property
    def ransac(self):
        return RansacConfig(self.ransac_probability, self.ransac_outlier_ratio, 3,
                            self.ransac_threshold, self.ransac_max_iterations)

    @property
    def grow(self):
        return GrowConfig(self.color_threshold, self.grow_radius, self.min_segment_size, self.seed)

    @property
    def camera(self):
        return CameraIntrinsics(self.f_x, self.f_y, self.c_x, self.c_y, self.o_x, self.o_y,
                                self.width, self.height)

    def as_dict(self):
        return dataclasses.asdict(self)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @classmethod
    def field_names(cls):
        return [f.name for f in dataclasses.fields(cls)]


def _convert(name, text):
    kind = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}[name]
    try:
        return int(text) if kind is int else float(text)
    except ValueError:
        raise ParameterError(f"{name}: cannot parse {text!r} as {kind.__name__}") from None


def parse_overrides(pairs):
    """Typed values from ``key=value`` strings; dashes in keys are read as underscores."""
    known = set(PipelineConfig.field_names())
    values = {}
    for raw in pairs:
        if "=" not in raw:
            raise ParameterError(f"expected key=value, got {raw!r}")
        key, text = (part.strip() for part in raw.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ParameterError(f"unknown config key {key!r}")
        values[key] = _convert(key, text)
    return values


def parse_config_text(text):
    """Parse key=value lines; blank lines and ``#`` comments are ignored."""
    lines = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    return parse_overrides(lines)


def load_config(path=None, overrides=None):
    """Defaults, updated by the file at ``path``, updated by ``overrides`` (flags win)."""
    values = {}
    if path is not None:
        with open(path) as fh:
            values.update(parse_config_text(fh.read()))
    values.update(overrides or {})
    return PipelineConfig(**values)


def format_config(cfg):
    return "".join(f"{k}={v!r}\n" for k, v in cfg.as_dict().items())
