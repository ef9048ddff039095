import json

import numpy as np
import pytest

from mobility_map.cloud import PointCloud
from mobility_map.config import PipelineConfig
from mobility_map.errors import StageError
from mobility_map.pipeline import STAGES, run_pipeline
from mobility_map.synth import generate, preset
from oracles import segment_purity, truth_labels


@pytest.fixture(scope="module")
def floor_ramp():
    scene = generate(preset("floor_ramp"))
    return scene, run_pipeline(scene.cloud)


@pytest.fixture(scope="module")
def corridor():
    scene = generate(preset("corridor"))
    return scene, run_pipeline(scene.cloud)


def _main_entries(result):
    return [e for e in result.map.entries if e.status in ("ground", "scored")]


class TestFloorRamp:
    def test_two_entries(self, floor_ramp):
        _, result = floor_ramp
        entries = _main_entries(result)
        assert [e.status for e in entries] == ["ground", "scored"]
        assert entries[0].segment_id == 0 and entries[0].score == 1.0

    def test_ramp_entry(self, floor_ramp):
        scene, result = floor_ramp
        ramp = _main_entries(result)[1]
        assert ramp.slope == pytest.approx(15.0, abs=0.5)
        assert ramp.roughness == pytest.approx(1.0, abs=0.05)
        assert ramp.score == pytest.approx(0.75, abs=0.05)
        truth = truth_labels(scene, result.cloud.points)
        members = np.flatnonzero(result.labels == ramp.segment_id)
        assert segment_purity(truth, members) >= 0.95
        assert np.bincount(truth[members]).argmax() == scene.surface("ramp").label

    def test_ground_is_floor(self, floor_ramp):
        scene, result = floor_ramp
        truth = truth_labels(scene, result.cloud.points)
        assert segment_purity(truth, result.ground.ground) >= 0.99

    def test_point_scores(self, floor_ramp):
        _, result = floor_ramp
        scores = result.point_scores()
        assert np.all(scores[result.ground.ground] == 1.0)
        assert np.all(scores[result.labels == -1] == 0.0)
        assert scores.min() >= 0 and scores.max() <= 1


def test_corridor_walls_are_obstacles(corridor):
    scene, result = corridor
    truth = truth_labels(scene, result.cloud.points)
    walls = {s.label for s in scene.surfaces if s.name == "wall"}
    boxes = {s.label for s in scene.surfaces if s.name.startswith("box")}
    seen_walls, seen_boxes = set(), set()
    for e in _main_entries(result)[1:]:
        members = np.flatnonzero(result.labels == e.segment_id)
        label = np.bincount(truth[members]).argmax()
        if label in walls:
            assert e.score == pytest.approx(0.0, abs=0.05)
            seen_walls.add(label)
        if label in boxes:
            seen_boxes.add(label)
    assert seen_walls == walls
    assert len(seen_boxes) >= 2


class TestStages:
    def test_order_and_counts(self, corridor):
        scene, result = corridor
        report = result.report()
        assert [s["name"] for s in report["stages"]] == list(STAGES)
        counts = [s["points"] for s in report["stages"]]
        assert counts[0] == len(scene.cloud)
        assert all(a >= b for a, b in zip(counts, counts[1:]))
        assert counts[2] == len(result.cloud)
        assert counts[5] == len(result.ground.rest)

    def test_timings_recorded_but_not_reported(self, corridor):
        _, result = corridor
        assert set(result.timings) == set(STAGES)
        report = result.report()
        assert "total_ms" not in report
        assert all("time_ms" not in s for s in report["stages"])
        assert "total_ms" in result.report(include_timings=True)

    def test_report_is_json(self, corridor):
        _, result = corridor
        report = json.loads(json.dumps(result.report()))
        assert report["segments"][0]["status"] == "ground"
        assert len(report["segments"]) == len(result.map.entries)
        assert report["config"] == PipelineConfig().as_dict()

    def test_deterministic(self):
        scene = generate(preset("box"))
        a = json.dumps(run_pipeline(scene.cloud).report(), sort_keys=True)
        b = json.dumps(run_pipeline(scene.cloud).report(), sort_keys=True)
        assert a == b

    def test_failure_names_the_stage(self):
        pts = np.random.default_rng(0).uniform(-0.5, 0.5, (200, 3)) * [1, 1, 0] + [0, 0, 5]
        # every point lies beyond the range limit, so the normal stage has nothing to work on
        with pytest.raises(StageError) as info:
            run_pipeline(PointCloud(pts))
        assert info.value.stage == "Normal estimation"

    def test_overlay(self, floor_ramp):
        _, result = floor_ramp
        image = result.overlay()
        assert image.shape == (480, 640, 3)
        assert (image == [0, 255, 0]).all(axis=2).sum() > 1000
