"""
Compiled pairwise kernels.

Every double sum is computed row by row: row ``i`` accumulates its terms in
increasing ``j`` order, so a row's value does not depend on how rows are
distributed over workers. Rows are then combined with a fixed pairwise tree.
All kernels release the GIL so a thread pool can drive them.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

ROW_BLOCK = 64

_jit = njit(cache=True, nogil=True, fastmath=False)


@_jit
def tree_sum(x):
    """Pairwise sum with a fixed tree shape determined only by ``len(x)``."""
    n = x.shape[0]
    if n == 0:
        return 0.0
    buf = x.copy()
    while n > 1:
        half = n // 2
        for k in range(half):
            buf[k] = buf[2 * k] + buf[2 * k + 1]
        if n % 2 == 1:
            buf[half] = buf[n - 1]
            n = half + 1
        else:
            n = half
    return buf[0]


@_jit
def _shares_vertex(i, j, n, closed):
    d = abs(i - j)
    if d <= 1:
        return True
    if closed and d == n - 1:
        return True
    return False


@_jit
def _arc_between(si, sj, L, closed):
    d = abs(si - sj)
    if closed and L - d < d:
        d = L - d
    return d


@_jit
def gauss_rows(mid, tan, seglen, smid, L, closed, near_cut, i0, i1, out):
    """Per-row Gauss integrand sums.

    out[i, 0] = sum |<t_i, t_j, m_i - m_j>| / |m_i - m_j|^3 * l_i l_j
    out[i, 1] = signed version
    out[i, 2] = abs part over pairs with arc <= near_cut
    out[i, 3] = abs part over the remaining pairs
    Pairs sharing a vertex are skipped.
    """
    n = mid.shape[0]
    for i in range(i0, i1):
        a = 0.0
        s = 0.0
        near = 0.0
        far = 0.0
        tx0 = tan[i, 0]
        tx1 = tan[i, 1]
        tx2 = tan[i, 2]
        for j in range(n):
            if _shares_vertex(i, j, n, closed):
                continue
            d0 = mid[i, 0] - mid[j, 0]
            d1 = mid[i, 1] - mid[j, 1]
            d2 = mid[i, 2] - mid[j, 2]
            c0 = tx1 * tan[j, 2] - tx2 * tan[j, 1]
            c1 = tx2 * tan[j, 0] - tx0 * tan[j, 2]
            c2 = tx0 * tan[j, 1] - tx1 * tan[j, 0]
            r2 = d0 * d0 + d1 * d1 + d2 * d2
            r = math.sqrt(r2)
            val = (c0 * d0 + c1 * d1 + c2 * d2) / (r2 * r) * seglen[i] * seglen[j]
            av = abs(val)
            a += av
            s += val
            if _arc_between(smid[i], smid[j], L, closed) <= near_cut:
                near += av
            else:
                far += av
        out[i, 0] = a
        out[i, 1] = s
        out[i, 2] = near
        out[i, 3] = far


@_jit
def mobius_rows(mid, seglen, smid, L, closed, i0, i1, out):
    """Per-row sums of (1/|x-y|^2 - 1/arc^2) l_i l_j over non-adjacent pairs."""
    n = mid.shape[0]
    for i in range(i0, i1):
        acc = 0.0
        for j in range(n):
            if _shares_vertex(i, j, n, closed):
                continue
            d0 = mid[i, 0] - mid[j, 0]
            d1 = mid[i, 1] - mid[j, 1]
            d2 = mid[i, 2] - mid[j, 2]
            r2 = d0 * d0 + d1 * d1 + d2 * d2
            arc = _arc_between(smid[i], smid[j], L, closed)
            acc += (1.0 / r2 - 1.0 / (arc * arc)) * seglen[i] * seglen[j]
        out[i, 0] = acc


def run_rows(kernel, n_rows, n_cols, args, workers=None):
    """Drive ``kernel(*args, i0, i1, out)`` over fixed row blocks."""
    out = np.zeros((n_rows, n_cols))
    blocks = [(i, min(i + ROW_BLOCK, n_rows)) for i in range(0, n_rows, ROW_BLOCK)]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(blocks) == 1:
        for i0, i1 in blocks:
            kernel(*args, i0, i1, out)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: kernel(*args, b[0], b[1], out), blocks))
    return out


# -- segment geometry --------------------------------------------------------

@_jit
def seg_seg(V, a, b):
    """Closest points between segments a and b of the polygon ``V``.

    Segment k runs from V[k] to V[k+1] (wrapping). Returns (distance, s, t)
    with points V[a] + s (V[a+1]-V[a]) and V[b] + t (V[b+1]-V[b]).
    """
    nv = V.shape[0]
    a1 = (a + 1) % nv
    b1 = (b + 1) % nv
    u0 = V[a1, 0] - V[a, 0]
    u1 = V[a1, 1] - V[a, 1]
    u2 = V[a1, 2] - V[a, 2]
    v0 = V[b1, 0] - V[b, 0]
    v1 = V[b1, 1] - V[b, 1]
    v2 = V[b1, 2] - V[b, 2]
    r0 = V[a, 0] - V[b, 0]
    r1 = V[a, 1] - V[b, 1]
    r2 = V[a, 2] - V[b, 2]
    aa = u0 * u0 + u1 * u1 + u2 * u2
    e = v0 * v0 + v1 * v1 + v2 * v2
    f = v0 * r0 + v1 * r1 + v2 * r2
    c = u0 * r0 + u1 * r1 + u2 * r2
    bb = u0 * v0 + u1 * v1 + u2 * v2
    denom = aa * e - bb * bb
    if denom > 1e-14 * aa * e:
        s = min(max((bb * f - c * e) / denom, 0.0), 1.0)
    else:
        s = 0.0
    t = (bb * s + f) / e
    if t < 0.0:
        t = 0.0
        s = min(max(-c / aa, 0.0), 1.0)
    elif t > 1.0:
        t = 1.0
        s = min(max((bb - c) / aa, 0.0), 1.0)
    d0 = r0 + s * u0 - t * v0
    d1 = r1 + s * u1 - t * v1
    d2 = r2 + s * u2 - t * v2
    return math.sqrt(d0 * d0 + d1 * d1 + d2 * d2), s, t


@_jit
def min_nonadjacent_distance(V, closed):
    """Smallest distance between segments that share no vertex."""
    nv = V.shape[0]
    ne = nv if closed else nv - 1
    best = np.inf
    bi = -1
    bj = -1
    for i in range(ne):
        for j in range(i + 2, ne):
            if _shares_vertex(i, j, ne, closed):
                continue
            d, s, t = seg_seg(V, i, j)
            if d < best:
                best = d
                bi = i
                bj = j
    return best, bi, bj


@_jit
def circumradii(V, closed):
    """Circumradius of each consecutive vertex triple (inf when collinear)."""
    n = V.shape[0]
    m = n if closed else n - 2
    out = np.empty(m)
    for k in range(m):
        if closed:
            a = V[(k - 1) % n]
            b = V[k]
            c = V[(k + 1) % n]
        else:
            a = V[k]
            b = V[k + 1]
            c = V[k + 2]
        ab = b - a
        bc = c - b
        ca = a - c
        cr = np.cross(ab, -ca)
        area2 = math.sqrt(cr @ cr)
        la = math.sqrt(ab @ ab)
        lb = math.sqrt(bc @ bc)
        lc = math.sqrt(ca @ ca)
        if area2 <= 1e-15 * la * lc:
            out[k] = np.inf
        else:
            out[k] = la * lb * lc / (2.0 * area2)
    return out


@_jit
def _cyc_gap(i, j, n, closed):
    d = abs(i - j)
    if closed and n - d < d:
        d = n - d
    return d


@_jit
def _vdist2(V, i, j):
    d0 = V[i, 0] - V[j, 0]
    d1 = V[i, 1] - V[j, 1]
    d2 = V[i, 2] - V[j, 2]
    return d0 * d0 + d1 * d1 + d2 * d2


@_jit
def vertex_local_minima(V, closed, band):
    """Vertex pairs (i < j) whose distance is minimal among the 4 grid neighbours.

    Only pairs with index gap > band are candidates. Returns (i, j, dist) arrays.
    """
    n = V.shape[0]
    cap = 1024
    ii = np.empty(cap, np.int64)
    jj = np.empty(cap, np.int64)
    dd = np.empty(cap)
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            if _cyc_gap(i, j, n, closed) <= band:
                continue
            if not closed and (i == 0 or j == n - 1):
                continue
            d = _vdist2(V, i, j)
            im = (i - 1) % n
            ip = (i + 1) % n
            jm = (j - 1) % n
            jp = (j + 1) % n
            if d > _vdist2(V, im, j) or d > _vdist2(V, ip, j):
                continue
            if d > _vdist2(V, i, jm) or d > _vdist2(V, i, jp):
                continue
            if count == cap:
                cap *= 2
                ii2 = np.empty(cap, np.int64)
                jj2 = np.empty(cap, np.int64)
                dd2 = np.empty(cap)
                ii2[:count] = ii[:count]
                jj2[:count] = jj[:count]
                dd2[:count] = dd[:count]
                ii = ii2
                jj = jj2
                dd = dd2
            ii[count] = i
            jj[count] = j
            dd[count] = math.sqrt(d)
            count += 1
    return ii[:count], jj[:count], dd[:count]


@_jit
def refine_seeds(V, closed, ii, jj, max_steps):
    """Descend from vertex seeds to locally closest segment pairs.

    Returns the refined distance and segment indices for each seed.
    """
    nv = V.shape[0]
    ne = nv if closed else nv - 1
    m = ii.shape[0]
    dist = np.empty(m)
    sa = np.empty(m, np.int64)
    sb = np.empty(m, np.int64)
    for k in range(m):
        best = np.inf
        ba = -1
        bb = -1
        bs = 0.0
        bt = 0.0
        for da in range(-1, 1):
            for db in range(-1, 1):
                a = ii[k] + da
                b = jj[k] + db
                if closed:
                    a %= ne
                    b %= ne
                elif a < 0 or b < 0 or a >= ne or b >= ne:
                    continue
                if _shares_vertex(a, b, ne, closed) or a == b:
                    continue
                d, s, t = seg_seg(V, a, b)
                if d < best:
                    best = d
                    ba = a
                    bb = b
                    bs = s
                    bt = t
        for _ in range(max_steps):
            if ba < 0:
                break
            na = ba
            nb = bb
            if bs <= 0.0:
                na = ba - 1
            elif bs >= 1.0:
                na = ba + 1
            if bt <= 0.0:
                nb = bb - 1
            elif bt >= 1.0:
                nb = bb + 1
            if closed:
                na %= ne
                nb %= ne
            elif na < 0 or nb < 0 or na >= ne or nb >= ne:
                break
            if (na == ba and nb == bb) or _shares_vertex(na, nb, ne, closed) or na == nb:
                break
            improved = False
            for ca, cb in ((na, bb), (ba, nb), (na, nb)):
                if _shares_vertex(ca, cb, ne, closed) or ca == cb:
                    continue
                d, s, t = seg_seg(V, ca, cb)
                if d < best - 1e-15 * best:
                    best = d
                    ba = ca
                    bb = cb
                    bs = s
                    bt = t
                    improved = True
            if not improved:
                break
        dist[k] = best
        sa[k] = ba
        sb[k] = bb
    return dist, sa, sb


# -- pointwise thickness consequences ----------------------------------------

@_jit
def pair_extremes(V, cum, L, closed, R, mid, tan, seglen, smid):
    """Worst cases of the pointwise facts used on thickness-normalised curves.

    Returns
      gap_min    min chord/R over vertex pairs with arc >= pi R
      schur_min  min (chord - R sqrt(2 - 2 cos(arc/R)))/R over pairs with arc <= pi R
      near_max   max integrand * R^2 over non-adjacent segment pairs with arc <= pi R
    """
    n = V.shape[0]
    gap_min = np.inf
    schur_min = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            arc = _arc_between(cum[i], cum[j], L, closed)
            chord = math.sqrt(_vdist2(V, i, j))
            if arc >= math.pi * R:
                if chord / R < gap_min:
                    gap_min = chord / R
            else:
                th = arc / R
                lower = math.sqrt(max(2.0 - 2.0 * math.cos(th), 0.0))
                val = chord / R - lower
                if val < schur_min:
                    schur_min = val
    m = mid.shape[0]
    near_max = 0.0
    for i in range(m):
        for j in range(m):
            if _shares_vertex(i, j, m, closed):
                continue
            if _arc_between(smid[i], smid[j], L, closed) > math.pi * R:
                continue
            d0 = mid[i, 0] - mid[j, 0]
            d1 = mid[i, 1] - mid[j, 1]
            d2 = mid[i, 2] - mid[j, 2]
            c0 = tan[i, 1] * tan[j, 2] - tan[i, 2] * tan[j, 1]
            c1 = tan[i, 2] * tan[j, 0] - tan[i, 0] * tan[j, 2]
            c2 = tan[i, 0] * tan[j, 1] - tan[i, 1] * tan[j, 0]
            r2 = d0 * d0 + d1 * d1 + d2 * d2
            val = abs(c0 * d0 + c1 * d1 + c2 * d2) / (r2 * math.sqrt(r2)) * R * R
            if val > near_max:
                near_max = val
    return gap_min, schur_min, near_max


# -- projection crossings ----------------------------------------------------

@_jit
def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


@_jit
def count_crossings(P, closed, eps):
    """Transversal crossings of a planar polygon given by 2D points ``P``.

    Returns -1 when some pair of overlapping segments is degenerate
    (an orientation test falls within ``eps`` of zero).
    """
    nv = P.shape[0]
    ne = nv if closed else nv - 1
    xmin = np.empty(ne)
    xmax = np.empty(ne)
    for k in range(ne):
        x0 = P[k, 0]
        x1 = P[(k + 1) % nv, 0]
        xmin[k] = min(x0, x1)
        xmax[k] = max(x0, x1)
    order = np.argsort(xmin, kind="mergesort")
    count = 0
    for oi in range(ne):
        i = order[oi]
        ax = P[i, 0]
        ay = P[i, 1]
        bx = P[(i + 1) % nv, 0]
        by = P[(i + 1) % nv, 1]
        iymin = min(ay, by)
        iymax = max(ay, by)
        for oj in range(oi + 1, ne):
            j = order[oj]
            if xmin[j] > xmax[i]:
                break
            if _shares_vertex(i, j, ne, closed):
                continue
            cx = P[j, 0]
            cy = P[j, 1]
            dx = P[(j + 1) % nv, 0]
            dy = P[(j + 1) % nv, 1]
            if max(cy, dy) < iymin or min(cy, dy) > iymax:
                continue
            o1 = _orient(ax, ay, bx, by, cx, cy)
            o2 = _orient(ax, ay, bx, by, dx, dy)
            o3 = _orient(cx, cy, dx, dy, ax, ay)
            o4 = _orient(cx, cy, dx, dy, bx, by)
            if abs(o1) <= eps or abs(o2) <= eps or abs(o3) <= eps or abs(o4) <= eps:
                return -1
            if (o1 > 0.0) != (o2 > 0.0) and (o3 > 0.0) != (o4 > 0.0):
                count += 1
    return count
