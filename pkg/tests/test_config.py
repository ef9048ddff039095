import pytest

from mobility_map.config import (PipelineConfig, format_config, load_config, parse_config_text,
                                 parse_overrides)
from mobility_map.errors import ParameterError


def test_defaults():
    cfg = PipelineConfig()
    assert cfg.voxel_edge == 0.01
    assert cfg.max_depth == 2.0
    assert cfg.ransac.iterations == 35
    assert cfg.camera.c_x == 320.0


def test_text_round_trip():
    cfg = PipelineConfig(voxel_edge=0.02, seed=7, color_threshold=4.5)
    assert load_config(overrides=parse_config_text(format_config(cfg))) == cfg


def test_comments_and_dashes():
    values = parse_config_text("# header\n\nmax-depth = 3   # meters\nnormal_k=12\n")
    assert values == {"max_depth": 3.0, "normal_k": 12}
    assert isinstance(values["max_depth"], float)


def test_flags_win_over_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("voxel_edge=0.02\nseed=3\n")
    cfg = load_config(path, {"seed": 5})
    assert cfg.voxel_edge == 0.02
    assert cfg.seed == 5


@pytest.mark.parametrize("pairs", [["nope=1"], ["voxel_edge"], ["normal_k=2.5"], ["seed=x"]])
def test_bad_overrides(pairs):
    with pytest.raises(ParameterError):
        parse_overrides(pairs)


@pytest.mark.parametrize("kw", [{"voxel_edge": 0}, {"normal_k": 2}, {"sigma_n": -1e-3},
                                {"ransac_probability": 1.0}, {"min_segment_size": 0},
                                {"f_x": -1.0}, {"seed": 1.5}, {"normal_k": True}])
def test_domains(kw):
    with pytest.raises(ParameterError):
        PipelineConfig(**kw)


def test_replace_is_checked():
    with pytest.raises(ParameterError):
        PipelineConfig().replace(max_depth=-1.0)
