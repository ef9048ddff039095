import numpy as np
import pytest

from mobility_map import io
from mobility_map.cloud import PointCloud
from mobility_map.errors import InputError


@pytest.fixture
def colored(rng):
    pts = rng.normal(size=(200, 3))
    colors = rng.integers(0, 256, size=(200, 3))
    return PointCloud(pts, colors)


@pytest.mark.parametrize("suffix", [".pcd", ".ply"])
def test_round_trip_is_exact(tmp_path, colored, suffix):
    path = tmp_path / f"cloud{suffix}"
    io.write_cloud(path, colored)
    back = io.read_cloud(path)
    np.testing.assert_array_equal(back.points, colored.points)
    np.testing.assert_array_equal(back.colors, colored.colors)


@pytest.mark.parametrize("suffix", [".pcd", ".ply"])
def test_round_trip_without_colors(tmp_path, rng, suffix):
    cloud = PointCloud(rng.random((10, 3)))
    path = tmp_path / f"c{suffix}"
    io.write_cloud(path, cloud)
    back = io.read_cloud(path)
    assert back.colors is None
    np.testing.assert_array_equal(back.points, cloud.points)


def test_rgb_packing_round_trip(rng):
    colors = rng.integers(0, 256, size=(1000, 3)).astype(np.uint8)
    np.testing.assert_array_equal(io.unpack_rgb(io.pack_rgb(colors)), colors)


def test_pcd_drops_nan_rows(tmp_path):
    path = tmp_path / "nan.pcd"
    path.write_text("VERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n"
                    "WIDTH 3\nHEIGHT 1\nPOINTS 3\nDATA ascii\n0 0 1\nnan nan nan\n1 2 3\n")
    np.testing.assert_array_equal(io.read_cloud(path).points, [[0, 0, 1], [1, 2, 3]])


def test_ply_scalars_and_faces(tmp_path, rng):
    cloud = PointCloud(rng.random((4, 3)))
    path = tmp_path / "m.ply"
    io.write_ply(path, cloud, faces=[[0, 1, 2], [0, 2, 3]],
                 scalars={"segment": np.array([0, 1, 1, -1]), "score": np.array([0.5, 1, 0, 0.25])})
    props = io.read_ply_vertices(path)
    np.testing.assert_array_equal(props["segment"], [0, 1, 1, -1])
    np.testing.assert_array_equal(props["score"], [0.5, 1, 0, 0.25])
    np.testing.assert_array_equal(io.read_ply(path).points, cloud.points)


def test_ppm_round_trip(tmp_path, rng):
    img = rng.integers(0, 256, size=(7, 5, 3)).astype(np.uint8)
    path = tmp_path / "a.ppm"
    io.write_ppm(path, img)
    np.testing.assert_array_equal(io.read_ppm(path), img)
    np.testing.assert_array_equal(io.read_image(path), img)


def test_ascii_ppm(tmp_path):
    path = tmp_path / "a.ppm"
    path.write_text("P3\n# comment\n2 1\n255\n255 0 0  0 255 0\n")
    np.testing.assert_array_equal(io.read_ppm(path), [[[255, 0, 0], [0, 255, 0]]])


def test_labels_round_trip(tmp_path):
    labels = np.array([0, 3, -1, 2])
    path = tmp_path / "l.csv"
    io.write_labels_csv(path, labels)
    np.testing.assert_array_equal(io.read_labels_csv(path), labels)


@pytest.mark.parametrize("name,text", [
    ("bad.pcd", "hello\n"),
    ("bad.ply", "not a ply\n"),
    ("trunc.ply", "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\n"
                  "property float y\nproperty float z\nend_header\n0 0 0\n"),
    ("rows.pcd", "FIELDS x y z\nPOINTS 1\nDATA ascii\n0 zero 0\n"),
    ("cloud.xyz", "0 0 0\n"),
])
def test_malformed_files(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    with pytest.raises(InputError):
        io.read_cloud(path)


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        io.read_cloud(tmp_path / "nope.pcd")
