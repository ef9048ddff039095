"""Mobility maps for legged robots from indoor point clouds.

The pipeline denoises and reduces a sensor-frame cloud, estimates normals,
color-codes them, removes the ground plane, grows color-consistent regions,
measures each region's slope and roughness and scores it with a Gaussian
process trained on an empirical mobility table.
"""

from .cloud import (DenoiseStats, PointCloud, SpatialIndex, denoise_statistical, range_filter,
                    voxel_downsample)
from .config import PipelineConfig, load_config
from .delaunay import delaunay_2d
from .errors import (BehindCameraError, DegenerateNeighborhoodError, HyperparameterError,
                     InputError, InsufficientDataError, MobilityMapError, NoPlaneFoundError,
                     ParameterError, StageError, TriangulationError)
from .estimators import (MobilityMapper, NormalEstimator, RangeFilter, StatisticalOutlierRemoval,
                         VoxelGridDownsampler)
from .mobility import (MobilityMap, MobilityRegressor, gpr_fit, gpr_predict, mobility_grid,
                       rule_lookup, score_segments, se_kernel)
from .normals import OrientedNormalField, estimate_normals, local_plane_fit, rgbn_encode
from .pipeline import STAGES, PipelineResult, run_pipeline
from .plane import PlaneModel, RansacConfig, ransac_iterations, ransac_plane, remove_ground
from .projection import CameraIntrinsics, project_point, project_points, render_overlay, score_color
from .segmentation import GrowConfig, Segment, color_distance, region_grow, rgb_to_ycrcb
from .surface import (SurfaceProperties, TriMesh, mesh_area, roughness, segment_plane,
                      segment_properties, slope_degrees)
from .synth import LabeledCloud, SceneSpec, generate

__version__ = "0.1.0"

__all__ = [
    "BehindCameraError", "CameraIntrinsics", "DegenerateNeighborhoodError", "DenoiseStats",
    "GrowConfig", "HyperparameterError", "InputError", "InsufficientDataError", "LabeledCloud",
    "MobilityMap", "MobilityMapError", "MobilityMapper", "MobilityRegressor", "NoPlaneFoundError",
    "NormalEstimator", "OrientedNormalField", "ParameterError", "PipelineConfig", "PipelineResult",
    "PlaneModel", "PointCloud", "RangeFilter", "RansacConfig", "STAGES", "SceneSpec", "Segment",
    "SpatialIndex", "StageError", "StatisticalOutlierRemoval", "SurfaceProperties",
    "TriMesh", "TriangulationError", "VoxelGridDownsampler", "color_distance",
    "delaunay_2d", "denoise_statistical", "estimate_normals", "generate", "gpr_fit",
    "gpr_predict", "load_config", "local_plane_fit", "mesh_area", "mobility_grid",
    "project_point", "project_points", "ransac_iterations", "ransac_plane", "range_filter",
    "region_grow", "remove_ground", "render_overlay", "rgb_to_ycrcb", "rgbn_encode", "roughness",
    "rule_lookup", "run_pipeline", "score_color", "score_segments", "se_kernel", "segment_plane",
    "segment_properties", "slope_degrees", "voxel_downsample",
]
