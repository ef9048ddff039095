import numpy as np
import pytest

from mobility_map.errors import BehindCameraError, ParameterError
from mobility_map.projection import (CameraIntrinsics, blank_image, project_continuous,
                                     project_point, project_points, render_overlay, score_color)


class TestProjectPoint:
    def test_optical_axis(self):
        assert project_point([0, 0, 1]) == (320, 240)

    def test_hand_evaluation(self):
        cam = CameraIntrinsics(f_x=570.0)
        assert project_point([0.5, 0, 1], cam) == (605, 240)

    def test_sensor_offset(self):
        cam = CameraIntrinsics(o_x=10.0, o_y=-4.0)
        assert project_point([0, 0, 2], cam) == (310, 244)

    def test_behind_camera(self):
        with pytest.raises(BehindCameraError):
            project_point([0, 0, -1])
        with pytest.raises(BehindCameraError):
            project_point([0, 0, 0])

    def test_outside_the_frame(self):
        assert project_point([10, 0, 1]) is None

    def test_round_half_up(self):
        cam = CameraIntrinsics(f_x=1.0, f_y=1.0, c_x=10.0, c_y=10.0)
        assert project_point([0.5, -0.5, 1.0], cam) == (11, 10)

    def test_depth_homogeneity(self, rng):
        cam = CameraIntrinsics()
        pts = rng.uniform([-2, -2, 0.1], [2, 2, 5], (10000, 3))
        t = rng.uniform(0.01, 100, (10000, 1))
        a = project_continuous(pts, cam)
        b = project_continuous(pts * t, cam)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-9)

    def test_batch_visibility(self):
        pts = np.array([[0, 0, 1], [0, 0, -1], [100, 0, 1]], dtype=float)
        pixels, visible = project_points(pts)
        assert list(visible) == [True, False, False]
        assert tuple(pixels[0]) == (320, 240)

    @pytest.mark.parametrize("kw", [{"f_x": 0}, {"width": 0}, {"c_x": np.inf}])
    def test_bad_intrinsics(self, kw):
        with pytest.raises(ParameterError):
            CameraIntrinsics(**kw)


class TestColors:
    def test_endpoints(self):
        assert tuple(score_color(1.0)) == (0, 255, 0)
        assert tuple(score_color(0.0)) == (255, 0, 0)

    def test_midpoint(self):
        assert tuple(score_color(0.5)) == (128, 128, 0)

    def test_clipped(self):
        np.testing.assert_array_equal(score_color([-1.0, 2.0]), [[255, 0, 0], [0, 255, 0]])


class TestOverlay:
    def test_single_point_paints_a_block(self):
        out = render_overlay(blank_image(), [[0, 0, 1]], [1.0])
        painted = np.argwhere(out.any(axis=2))
        assert len(painted) == 9
        assert tuple(painted.min(axis=0)) == (239, 319)
        assert tuple(out[240, 320]) == (0, 255, 0)

    def test_nearer_point_wins_regardless_of_order(self):
        pts = np.array([[0, 0, 2.0], [0, 0, 1.0]])
        scores = np.array([1.0, 0.0])
        a = render_overlay(blank_image(), pts, scores)
        b = render_overlay(blank_image(), pts[::-1], scores[::-1])
        np.testing.assert_array_equal(a, b)
        assert tuple(a[240, 320]) == (255, 0, 0)

    def test_background_is_kept(self):
        img = np.full((480, 640, 3), 7, dtype=np.uint8)
        out = render_overlay(img, [[0, 0, 1]], [0.0])
        assert tuple(out[0, 0]) == (7, 7, 7)
        assert img[240, 320, 0] == 7

    def test_invisible_points_are_ignored(self):
        out = render_overlay(blank_image(), [[0, 0, -1], [50, 0, 1]], [1.0, 1.0])
        assert not out.any()

    def test_shape_mismatch(self):
        with pytest.raises(ParameterError):
            render_overlay(np.zeros((10, 10, 3), np.uint8), [[0, 0, 1]], [1.0])
        with pytest.raises(ParameterError):
            render_overlay(blank_image(), [[0, 0, 1]], [1.0, 0.0])
