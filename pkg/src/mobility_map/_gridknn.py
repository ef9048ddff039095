"""Exact all-points k-nearest-neighbour search on a uniform hash grid.

Queries are answered cell by cell: the 27 cells around a query cell form a
candidate block whose coverage radius is known, so a query is *resolved* once
its k-th candidate lies strictly inside that radius.  Unresolved queries are
retried on wider blocks (reach 2 and 4 cells) and any still left are
answered by a full scan.  Ties are broken by the lower point index, so the
result equals a brute-force scan.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _less(da, ia, db, ib):
    return da < db or (da == db and ia < ib)


@njit(cache=True)
def _select(bd, bi, m, k, ordered):
    # nth_element on (distance, index) keys; optionally sort the k head entries
    lo = 0
    hi = m - 1
    target = k - 1
    while hi > lo:
        mid = (lo + hi) // 2
        pd = bd[mid]
        pi = bi[mid]
        i = lo
        j = hi
        while i <= j:
            while _less(bd[i], bi[i], pd, pi):
                i += 1
            while _less(pd, pi, bd[j], bi[j]):
                j -= 1
            if i <= j:
                bd[i], bd[j] = bd[j], bd[i]
                bi[i], bi[j] = bi[j], bi[i]
                i += 1
                j -= 1
        if target <= j:
            hi = j
        elif target >= i:
            lo = i
        else:
            break
    if not ordered:
        return
    for a in range(1, k):
        d = bd[a]
        x = bi[a]
        b = a
        while b > 0 and _less(d, x, bd[b - 1], bi[b - 1]):
            bd[b] = bd[b - 1]
            bi[b] = bi[b - 1]
            b -= 1
        bd[b] = d
        bi[b] = x


@njit(cache=True)
def _select_values(bd, m, k):
    # nth_element on distances alone; the k smallest values do not depend on tie order
    lo = 0
    hi = m - 1
    target = k - 1
    while hi > lo:
        a = bd[lo]
        b = bd[(lo + hi) // 2]
        c = bd[hi]
        if a > b:
            a, b = b, a
        if b > c:
            b = c
        pivot = a if a > b else b
        i = lo
        j = hi
        while i <= j:
            while bd[i] < pivot:
                i += 1
            while pivot < bd[j]:
                j -= 1
            if i <= j:
                bd[i], bd[j] = bd[j], bd[i]
                i += 1
                j -= 1
        if target <= j:
            hi = j
        elif target >= i:
            lo = i
        else:
            break


@njit(cache=True)
def _emit(bd, bi, k, q, want_neighbors, out_d, out_i, out_mean):
    total = 0.0
    for u in range(k):
        r = np.sqrt(bd[u])
        total += r
        if want_neighbors:
            out_d[q, u] = r
            out_i[q, u] = bi[u]
    out_mean[q] = total / k


@njit(cache=True)
def _knn_pass(pts, orig, cells, ukeys, starts, ends, lo, h, dims, active, k, reach,
              exclude_self, want_neighbors, out_d, out_i, out_mean):
    n = pts.shape[0]
    resolved = np.zeros(n, np.bool_)
    ny = dims[1]
    nz = dims[2]
    cap = 256
    cand = np.empty(cap, np.int64)
    cx_ = np.empty(cap)
    cy_ = np.empty(cap)
    cz_ = np.empty(cap)
    dist = np.empty(cap)
    bd = np.empty(cap)
    bi = np.empty(cap, np.int64)
    for c in range(ukeys.shape[0]):
        any_active = False
        for t in range(starts[c], ends[c]):
            if active[t]:
                any_active = True
                break
        if not any_active:
            continue
        cx = cells[starts[c], 0]
        cy = cells[starts[c], 1]
        cz = cells[starts[c], 2]
        nc = 0
        for ix in range(cx - reach, cx + reach + 1):
            if ix < 0 or ix >= dims[0]:
                continue
            for iy in range(cy - reach, cy + reach + 1):
                if iy < 0 or iy >= ny:
                    continue
                for iz in range(cz - reach, cz + reach + 1):
                    if iz < 0 or iz >= nz:
                        continue
                    key = (ix * ny + iy) * nz + iz
                    s = np.searchsorted(ukeys, key)
                    if s >= ukeys.shape[0] or ukeys[s] != key:
                        continue
                    cnt = ends[s] - starts[s]
                    if nc + cnt > cap:
                        while nc + cnt > cap:
                            cap *= 2
                        grown = np.empty(cap, np.int64)
                        grown[:nc] = cand[:nc]
                        cand = grown
                        cx_ = np.empty(cap)
                        cy_ = np.empty(cap)
                        cz_ = np.empty(cap)
                        dist = np.empty(cap)
                        bd = np.empty(cap)
                        bi = np.empty(cap, np.int64)
                    for t in range(starts[s], ends[s]):
                        cand[nc] = t
                        nc += 1
        for u in range(nc):
            cx_[u] = pts[cand[u], 0]
            cy_[u] = pts[cand[u], 1]
            cz_[u] = pts[cand[u], 2]
        for q in range(starts[c], ends[c]):
            if not active[q]:
                continue
            px = pts[q, 0]
            py = pts[q, 1]
            pz = pts[q, 2]
            fx = (px - lo[0]) / h - cx
            fy = (py - lo[1]) / h - cy
            fz = (pz - lo[2]) / h - cz
            margin = min(fx, 1.0 - fx, fy, 1.0 - fy, fz, 1.0 - fz)
            if margin < 0.0:
                margin = 0.0
            cover = (reach + margin) * h
            cover2 = cover * cover
            for u in range(nc):
                dx = cx_[u] - px
                dy = cy_[u] - py
                dz = cz_[u] - pz
                dist[u] = dx * dx + dy * dy + dz * dz
            # branchless compaction of the candidates inside the coverage radius
            m = 0
            for u in range(nc):
                j = cand[u]
                bd[m] = dist[u]
                bi[m] = j
                m += (dist[u] < cover2) & ((not exclude_self) | (j != q))
            if want_neighbors:
                for u in range(m):
                    bi[u] = orig[bi[u]]
            if m < k:
                continue
            if want_neighbors:
                _select(bd, bi, m, k, True)
            else:
                _select_values(bd, m, k)
            _emit(bd, bi, k, q, want_neighbors, out_d, out_i, out_mean)
            resolved[q] = True
    return resolved


_REACHES = (1, 2, 4)


@njit(cache=True)
def _sift_down(hd, hi, k):
    # max-heap on (distance, index) keys rooted at 0
    p = 0
    while True:
        c = 2 * p + 1
        if c >= k:
            return
        if c + 1 < k and _less(hd[c], hi[c], hd[c + 1], hi[c + 1]):
            c += 1
        if _less(hd[p], hi[p], hd[c], hi[c]):
            hd[p], hd[c] = hd[c], hd[p]
            hi[p], hi[c] = hi[c], hi[p]
            p = c
        else:
            return


@njit(cache=True)
def _brute_rows(points, queries, k, exclude_self, out_d, out_i):
    # exact scan with a bounded max-heap; rows come out sorted by (distance, index)
    n = points.shape[0]
    hd = np.empty(k)
    hi = np.empty(k, np.int64)
    for row in range(queries.shape[0]):
        q = queries[row]
        px = points[q, 0]
        py = points[q, 1]
        pz = points[q, 2]
        for u in range(k):
            hd[u] = np.inf
            hi[u] = n
        for j in range(n):
            dx = points[j, 0] - px
            dy = points[j, 1] - py
            dz = points[j, 2] - pz
            d = dx * dx + dy * dy + dz * dz
            if _less(d, j, hd[0], hi[0]) and not (exclude_self and j == q):
                hd[0] = d
                hi[0] = j
                _sift_down(hd, hi, k)
        for end in range(k - 1, 0, -1):
            hd[0], hd[end] = hd[end], hd[0]
            hi[0], hi[end] = hi[end], hi[0]
            _sift_down(hd, hi, end)
        for u in range(k):
            out_d[row, u] = np.sqrt(hd[u])
            out_i[row, u] = hi[u]


def exact_knn_rows(points, queries, k, exclude_self):
    """Exact (distance, index)-ordered neighbours of selected rows by a full scan."""
    queries = np.asarray(queries, dtype=np.int64)
    d_out = np.empty((len(queries), k))
    i_out = np.empty((len(queries), k), np.int64)
    if len(queries):
        _brute_rows(np.ascontiguousarray(points, dtype=np.float64), queries, k,
                    exclude_self, d_out, i_out)
    return d_out, i_out


def _cell_edge_guess(points, k):
    extent = np.ptp(points, axis=0)
    span = float(extent.max())
    if span <= 0.0:
        return 1.0
    h = span / 128.0
    # occupancy from a subsample; cells at this edge hold many points, so few are missed
    stride = max(1, len(points) // 50000)
    sample = points[::stride]
    keys = _cell_keys(sample, points.min(axis=0), h)[0]
    per_cell = len(points) / len(np.unique(keys))
    # surface-density estimate: k neighbours fall within ~h when h^2 * rho ~ k / pi
    return h * float(np.sqrt(0.4 * k / max(per_cell, 1e-12)))


def _cell_keys(points, lo, h):
    cells = np.floor((points - lo) / h).astype(np.int64)
    dims = cells.max(axis=0) + 1 if len(cells) else np.ones(3, np.int64)
    keys = (cells[:, 0] * dims[1] + cells[:, 1]) * dims[2] + cells[:, 2]
    return keys, cells, dims


def all_knn(points, k, *, exclude_self=True, want_neighbors=True):
    """k nearest neighbours of every point of ``points`` among ``points``.

    Returns ``(distances, indices, mean_distance)``; the first two are ``None``
    when ``want_neighbors`` is false.  Rows are sorted by (distance, index).
    Queries the grid cannot settle (isolated points) fall back to a full scan.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    n = len(points)
    need = k + 1 if exclude_self else k
    if n < need:
        raise ValueError(f"need at least {need} points for k={k}, got {n}")
    lo = points.min(axis=0)
    span = float(np.ptp(points, axis=0).max())
    # keep the grid dimensions within int64 key range
    h = max(_cell_edge_guess(points, k), max(span, 1e-300) / 2.0 ** 20)

    shape = (n, k) if want_neighbors else (1, k)
    out_d = np.empty(shape)
    out_i = np.empty(shape, np.int64)
    out_mean = np.empty(n)
    keys, cells, dims = _cell_keys(points, lo, h)
    order = np.argsort(keys, kind="stable")
    ukeys, starts = np.unique(keys[order], return_index=True)
    ends = np.append(starts[1:], n)
    sorted_pts = points[order]
    sorted_cells = cells[order]
    sub_d = np.empty(shape)
    sub_i = np.empty(shape, np.int64)
    sub_mean = np.empty(n)
    active = np.ones(n, np.bool_)
    for reach in _REACHES:
        resolved = _knn_pass(sorted_pts, order, sorted_cells, ukeys, starts, ends, lo, h, dims,
                             active, k, reach, exclude_self, want_neighbors,
                             sub_d, sub_i, sub_mean)
        done = order[resolved]
        out_mean[done] = sub_mean[resolved]
        if want_neighbors:
            out_d[done] = sub_d[resolved]
            out_i[done] = sub_i[resolved]
        active &= ~resolved
        if not active.any():
            break
    remaining = np.sort(order[active])
    if len(remaining):
        d, i = exact_knn_rows(points, remaining, k, exclude_self)
        out_mean[remaining] = d.mean(axis=1)
        if want_neighbors:
            out_d[remaining] = d
            out_i[remaining] = i
    if not want_neighbors:
        return None, None, out_mean
    return out_d, out_i, out_mean
