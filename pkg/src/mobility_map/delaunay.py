"""Incremental Bowyer-Watson Delaunay triangulation in the plane.

Points are inserted in Morton order; each is located by a walk over the
neighbour table and its conflict cavity grown edge-wise from there.

Hull edges are closed by *ghost* triangles sharing a vertex at infinity, so
no finite super-triangle is needed and thin hull triangles are never lost.
A ghost triangle ``(a, b, inf)`` "contains" a point strictly left of ``a->b``
or strictly inside the segment ``ab``.  Coordinates are normalised to the unit
box before the predicates run, which makes the tolerances scale-free.
"""

import numpy as np
from numba import njit
from scipy.spatial import cKDTree

from .errors import TriangulationError

EPS = 1e-12
DUPLICATE_TOL = 1e-9


def merge_duplicates(points, tol=DUPLICATE_TOL):
    """Representative index of every point; points within ``tol`` share the lowest index."""
    n = len(points)
    rep = np.arange(n)
    if n < 2:
        return rep
    pairs = cKDTree(points).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return rep

    def find(i):
        while rep[i] != i:
            rep[i] = rep[rep[i]]
            i = rep[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            rep[max(ri, rj)] = min(ri, rj)
    for i in range(n):
        rep[i] = find(i)
    return rep


@njit(cache=True)
def _orient2(xy, a, b, px, py):
    return (xy[b, 0] - xy[a, 0]) * (py - xy[a, 1]) - (xy[b, 1] - xy[a, 1]) * (px - xy[a, 0])


@njit(cache=True)
def _in_conflict(xy, tri, t, g, px, py):
    """Circumcircle test for finite triangles, half-plane test for ghosts."""
    a = tri[t, 0]
    b = tri[t, 1]
    if tri[t, 2] == g:
        o = _orient2(xy, a, b, px, py)
        if o > EPS:
            return True
        if abs(o) > EPS:
            return False
        ex = xy[b, 0] - xy[a, 0]
        ey = xy[b, 1] - xy[a, 1]
        return ((px - xy[a, 0]) * ex + (py - xy[a, 1]) * ey > 0
                and (px - xy[b, 0]) * -ex + (py - xy[b, 1]) * -ey > 0)
    c = tri[t, 2]
    adx = xy[a, 0] - px
    ady = xy[a, 1] - py
    bdx = xy[b, 0] - px
    bdy = xy[b, 1] - py
    cdx = xy[c, 0] - px
    cdy = xy[c, 1] - py
    det = ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
           + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
           + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))
    return det > EPS


@njit(cache=True)
def _holds(xy, tri, t, g, px, py):
    """Finite triangle containing p (with tolerance), or ghost with p strictly outside its edge."""
    if tri[t, 2] == g:
        return _orient2(xy, tri[t, 0], tri[t, 1], px, py) > EPS
    for i in range(3):
        if _orient2(xy, tri[t, (i + 1) % 3], tri[t, (i + 2) % 3], px, py) < -EPS:
            return False
    return True


@njit(cache=True)
def _locate(xy, tri, nbr, count, g, start, px, py, salt):
    t = start
    for step in range(4 * count + 16):
        if tri[t, 2] == g:
            if _orient2(xy, tri[t, 0], tri[t, 1], px, py) > EPS:
                return t
            t = nbr[t, 2]
            continue
        # rotating the first edge keeps the walk from cycling
        off = (salt + step) % 3
        moved = False
        for j in range(3):
            i = (j + off) % 3
            if _orient2(xy, tri[t, (i + 1) % 3], tri[t, (i + 2) % 3], px, py) < -EPS:
                t = nbr[t, i]
                moved = True
                break
        if not moved:
            return t
    for t in range(count):
        if _holds(xy, tri, t, g, px, py):
            return t
    return -1


@njit(cache=True)
def _triangulate(xy, order, tri, nbr, count):
    g = len(xy)
    mark = np.full(len(tri), -1, dtype=np.int64)
    stack = np.empty(len(tri), dtype=np.int64)
    cavity = np.empty(len(tri), dtype=np.int64)
    bu = np.empty(len(tri), dtype=np.int64)
    bv = np.empty(len(tri), dtype=np.int64)
    bo = np.empty(len(tri), dtype=np.int64)
    by_start = np.empty(g + 1, dtype=np.int64)
    by_end = np.empty(g + 1, dtype=np.int64)
    last = 0
    for vid in order:
        px = xy[vid, 0]
        py = xy[vid, 1]
        t0 = _locate(xy, tri, nbr, count, g, last, px, py, vid)
        if t0 < 0:
            continue
        # edge-connected conflict region around the containing triangle
        n_cav = 0
        n_b = 0
        mark[t0] = vid
        stack[0] = t0
        top = 1
        while top > 0:
            top -= 1
            t = stack[top]
            cavity[n_cav] = t
            n_cav += 1
            for i in range(3):
                o = nbr[t, i]
                u = tri[t, (i + 1) % 3]
                v = tri[t, (i + 2) % 3]
                if mark[o] == vid:
                    continue
                if _in_conflict(xy, tri, o, g, px, py):
                    mark[o] = vid
                    stack[top] = o
                    top += 1
                else:
                    bu[n_b] = u
                    bv[n_b] = v
                    bo[n_b] = o
                    n_b += 1
        # an edge first seen as boundary may have joined the cavity later
        k = 0
        for e in range(n_b):
            if mark[bo[e]] != vid:
                bu[k] = bu[e]
                bv[k] = bv[e]
                bo[k] = bo[e]
                k += 1
        n_b = k
        if n_b < 3 or count + n_b - n_cav > len(tri):
            continue
        # new fan (u, v, vid) per boundary edge, reusing cavity slots
        for e in range(n_b):
            if e < n_cav:
                s = cavity[e]
            else:
                s = count
                count += 1
            u = bu[e]
            v = bv[e]
            tri[s, 0] = u
            tri[s, 1] = v
            tri[s, 2] = vid
            nbr[s, 2] = bo[e]
            o = bo[e]
            for j in range(3):
                if tri[o, j] != u and tri[o, j] != v:
                    nbr[o, j] = s
            by_start[u] = s
            by_end[v] = s
            mark[s] = -1
        for e in range(n_b):
            s = by_start[bu[e]]
            nbr[s, 0] = by_start[bv[e]]
            nbr[s, 1] = by_end[bu[e]]
        # ghosts keep the vertex at infinity last
        for e in range(n_b):
            s = by_start[bu[e]]
            if tri[s, 0] == g:
                r = 1
            elif tri[s, 1] == g:
                r = 2
            else:
                r = 0
            if r:
                a0, a1, a2 = tri[s, 0], tri[s, 1], tri[s, 2]
                n0, n1, n2 = nbr[s, 0], nbr[s, 1], nbr[s, 2]
                va = (a0, a1, a2)
                na = (n0, n1, n2)
                for i in range(3):
                    tri[s, i] = va[(i + r) % 3]
                    nbr[s, i] = na[(i + r) % 3]
            last = s
    return count


def _link(tri):
    """Neighbour table of a small triangle set by brute force."""
    nbr = np.full(tri.shape, -1, dtype=np.int64)
    for t, (a, b, c) in enumerate(tri):
        verts = (a, b, c)
        for i in range(3):
            edge = {verts[(i + 1) % 3], verts[(i + 2) % 3]}
            for s, other in enumerate(tri):
                if s != t and edge <= set(other):
                    nbr[t, i] = s
    return nbr


def _morton_order(xy):
    q = np.clip(((xy - xy.min(axis=0)) / max(np.ptp(xy, axis=0).max(), 1e-300)
                 * 65535).astype(np.uint64), 0, 65535)
    key = np.zeros(len(xy), dtype=np.uint64)
    for bit in range(16):
        one = np.uint64(1)
        key |= ((q[:, 0] >> np.uint64(bit)) & one) << np.uint64(2 * bit)
        key |= ((q[:, 1] >> np.uint64(bit)) & one) << np.uint64(2 * bit + 1)
    return np.argsort(key, kind="stable")


def _orient(xy, a, b, c):
    return ((xy[b, 0] - xy[a, 0]) * (xy[c, 1] - xy[a, 1])
            - (xy[b, 1] - xy[a, 1]) * (xy[c, 0] - xy[a, 0]))


def delaunay_2d(points):
    """Delaunay triangulation of 2D points.

    Points closer than 1e-9 are merged first; triangles refer to the lowest
    original index of each merged group and are counter-clockwise.

    Returns
    -------
    ndarray of shape (m, 3), dtype int64

    Raises
    ------
    TriangulationError
        Fewer than three distinct points, or all points collinear.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    rep = merge_duplicates(pts)
    uniq = np.flatnonzero(rep == np.arange(len(pts)))
    if len(uniq) < 3:
        raise TriangulationError(f"need 3 distinct points, got {len(uniq)}")
    xy = pts[uniq]
    center = (xy.max(axis=0) + xy.min(axis=0)) / 2.0
    scale = float(np.ptp(xy, axis=0).max())
    xy = (xy - center) / scale

    m = len(xy)
    i0 = 0
    i1 = int(np.argmax(((xy - xy[i0]) ** 2).sum(axis=1)))
    areas = np.abs((xy[i1, 0] - xy[i0, 0]) * (xy[:, 1] - xy[i0, 1])
                   - (xy[i1, 1] - xy[i0, 1]) * (xy[:, 0] - xy[i0, 0]))
    i2 = int(np.argmax(areas))
    if areas[i2] <= EPS:
        raise TriangulationError("all points are collinear")
    if _orient(xy, i0, i1, i2) < 0:
        i1, i2 = i2, i1

    g = m
    tri = np.zeros((2 * m + 8, 3), dtype=np.int64)
    tri[:4] = [(i0, i1, i2), (i1, i0, g), (i2, i1, g), (i0, i2, g)]
    nbr = np.zeros_like(tri)
    nbr[:4] = _link(tri[:4])
    order = _morton_order(xy)
    order = order[(order != i0) & (order != i1) & (order != i2)]
    count = _triangulate(xy, order, tri, nbr, 4)
    tri = tri[:count]
    tri = tri[tri[:, 2] != g]
    area2 = (_orient(xy, tri[:, 0], tri[:, 1], tri[:, 2]))
    tri = tri[area2 > 2e-14]
    return uniq[tri]


def circumcircle_violations(points, triangles, tol=1e-9):
    """Brute-force check: ``(triangle, point)`` pairs where the point lies strictly
    inside the triangle's circumcircle by more than ``tol`` (relative to the radius)."""
    pts = np.asarray(points, dtype=float)
    bad = []
    for t, (a, b, c) in enumerate(np.asarray(triangles)):
        # work relative to the first vertex so large offsets cost no precision
        B, C = pts[b] - pts[a], pts[c] - pts[a]
        d = 2.0 * (B[0] * C[1] - B[1] * C[0])
        center = np.array([(C[1] * (B @ B) - B[1] * (C @ C)) / d,
                           (B[0] * (C @ C) - C[0] * (B @ B)) / d])
        r = np.linalg.norm(center)
        dist = np.linalg.norm(pts - pts[a] - center, axis=1)
        inside = np.flatnonzero(dist < r * (1.0 - tol))
        bad.extend((t, int(i)) for i in inside if i not in (a, b, c))
    return bad
