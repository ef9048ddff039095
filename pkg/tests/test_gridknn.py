import numpy as np
import pytest

from mobility_map import _gridknn
from oracles import brute_knn


K_MAX = 30


def _clouds(rng):
    yield "uniform", rng.random((2000, 3))
    yield "plane", np.column_stack([rng.random((2000, 2)), np.zeros(2000)])
    # two dense clusters far apart plus a few isolated points
    a = rng.normal(0, 0.01, (1000, 3))
    b = rng.normal(5, 0.01, (1000, 3))
    yield "clustered", np.vstack([a, b, rng.uniform(-10, 10, (20, 3))])
    g = np.arange(12) * 0.25
    X, Y, Z = np.meshgrid(g, g, g)
    yield "lattice", np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    pts = rng.random((1000, 3))
    yield "duplicates", np.vstack([pts, pts[:300]])


@pytest.fixture(scope="module")
def cases():
    # the oracle at K_MAX serves every smaller k as a prefix
    out = []
    for name, pts in _clouds(np.random.default_rng(7)):
        ref = {ex: brute_knn(pts, pts, K_MAX, exclude_self=ex) for ex in (True, False)}
        out.append((name, pts, ref))
    return out


@pytest.mark.parametrize("k", [1, 8, K_MAX])
def test_all_knn_is_exact(cases, k):
    for name, pts, ref in cases:
        for exclude in (True, False):
            d, i, mean = _gridknn.all_knn(pts, k, exclude_self=exclude)
            want_d, want_i = ref[exclude][0][:, :k], ref[exclude][1][:, :k]
            np.testing.assert_allclose(d, want_d, rtol=1e-12, atol=1e-15, err_msg=name)
            # rows are ordered by (distance, index) exactly like the oracle
            np.testing.assert_array_equal(i, want_i, err_msg=name)
            np.testing.assert_allclose(mean, want_d.mean(axis=1), rtol=1e-12, atol=1e-15)


def test_tie_order_matches_brute_force():
    g = np.arange(8) * 0.5
    X, Y = np.meshgrid(g, g)
    pts = np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])
    _, i, _ = _gridknn.all_knn(pts, 6, exclude_self=True)
    _, want = brute_knn(pts, pts, 6, exclude_self=True)
    np.testing.assert_array_equal(i, want)


def test_mean_only_matches(rng):
    pts = rng.random((2000, 3))
    _, _, full = _gridknn.all_knn(pts, 12)
    _, _, fast = _gridknn.all_knn(pts, 12, want_neighbors=False)
    np.testing.assert_allclose(fast, full, rtol=1e-14)


def test_exact_rows(rng):
    pts = rng.random((400, 3))
    rows = rng.choice(400, 30, replace=False)
    for exclude in (True, False):
        d, i = _gridknn.exact_knn_rows(pts, rows, 5, exclude)
        want_d, want_i = brute_knn(pts, pts, 5, exclude_self=exclude)
        np.testing.assert_array_equal(i, want_i[rows])
        np.testing.assert_allclose(d, want_d[rows], rtol=1e-12)
