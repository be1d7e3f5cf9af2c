"""Natural-neighbour (Sibson) interpolation weights by half-plane clipping.

Inserting a point P into the Voronoi tessellation of a set of centres gives
P a new cell. The Sibson weight of centre c is the fraction of that new cell
taken from c's old cell. Both regions are intersections of half-planes:

    new cell of P        = { z : |z - P| <= |z - c|   for all centres c }
    part stolen from c_k = new cell of P  and  { z : |z - c_k| <= |z - c| for all c }

so each area comes from clipping a bounding box with a short list of
half-planes. Only a local neighbourhood of centres is used. This
never builds a global tessellation, so cocircular lattices need no special
treatment.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_MAXV = 96


@njit(cache=True)
def _clip(px, py, n, ax, ay, d, qx, qy):
    # keep {z : ax*zx + ay*zy <= d}; returns new vertex count in (qx, qy)
    m = 0
    if n == 0:
        return 0
    sx, sy = px[n - 1], py[n - 1]
    fs = ax * sx + ay * sy - d
    for i in range(n):
        ex, ey = px[i], py[i]
        fe = ax * ex + ay * ey - d
        if fe <= 0.0:
            if fs > 0.0:
                t = fs / (fs - fe)
                qx[m] = sx + t * (ex - sx)
                qy[m] = sy + t * (ey - sy)
                m += 1
            qx[m] = ex
            qy[m] = ey
            m += 1
        elif fs <= 0.0:
            t = fs / (fs - fe)
            qx[m] = sx + t * (ex - sx)
            qy[m] = sy + t * (ey - sy)
            m += 1
        sx, sy, fs = ex, ey, fe
    return m


@njit(cache=True)
def _area(px, py, n):
    a = 0.0
    for i in range(n):
        j = (i + 1) % n
        a += px[i] * py[j] - px[j] * py[i]
    return 0.5 * a


@njit(cache=True)
def _corner_weights(cx, cy, adj, out, status):
    """Weights for corners at the origin.

    cx, cy: (M, K) centre coordinates relative to each corner; adj: (4,)
    indices of the adjacent centres among the K; out: (M, 4) weights;
    status: (M,) 0 ok, 1 unbounded new cell, 2 nothing stolen from the
    adjacent centres.
    """
    M, K = cx.shape
    ax = np.empty(_MAXV)
    ay = np.empty(_MAXV)
    bx = np.empty(_MAXV)
    by = np.empty(_MAXV)
    wx = np.empty(_MAXV)
    wy = np.empty(_MAXV)
    for m in range(M):
        R = 0.0
        for q in range(4):
            r = np.sqrt(cx[m, adj[q]] ** 2 + cy[m, adj[q]] ** 2)
            if r > R:
                R = r
        B = 8.0 * R + 1e-300
        ax[0], ay[0] = -B, -B
        ax[1], ay[1] = B, -B
        ax[2], ay[2] = B, B
        ax[3], ay[3] = -B, B
        n = 4
        for c in range(K):
            gx, gy = cx[m, c], cy[m, c]
            n = _clip(ax, ay, n, gx, gy, 0.5 * (gx * gx + gy * gy), bx, by)
            for i in range(n):
                ax[i] = bx[i]
                ay[i] = by[i]
        status[m] = 0
        for i in range(n):
            if abs(ax[i]) >= B * (1.0 - 1e-12) or abs(ay[i]) >= B * (1.0 - 1e-12):
                status[m] = 1
        total = _area(ax, ay, n)
        if status[m] != 0 or total <= 0.0:
            status[m] = 1
            for q in range(4):
                out[m, q] = 0.0
            continue
        acc = 0.0
        for q in range(4):
            k = adj[q]
            kx, ky = cx[m, k], cy[m, k]
            for i in range(n):
                wx[i] = ax[i]
                wy[i] = ay[i]
            nw = n
            for c in range(K):
                if c == k:
                    continue
                gx, gy = cx[m, c] - kx, cy[m, c] - ky
                d = 0.5 * (cx[m, c] ** 2 + cy[m, c] ** 2 - kx * kx - ky * ky)
                nw = _clip(wx, wy, nw, gx, gy, d, bx, by)
                for i in range(nw):
                    wx[i] = bx[i]
                    wy[i] = by[i]
                if nw == 0:
                    break
            a = _area(wx, wy, nw) if nw >= 3 else 0.0
            out[m, q] = a / total
            acc += out[m, q]
        if acc <= 0.0:
            status[m] = 2
        else:
            for q in range(4):
                out[m, q] /= acc


def sibson_weights(corner, centers, neighbourhood=None, adjacent=(0, 1, 2, 3)):
    """Sibson weights of one corner with respect to its four adjacent centres.

    ``corner`` is a point, ``centers`` the four adjacent centre points and
    ``neighbourhood`` optional further centres that compete for the corner's
    Voronoi cell. The four weights are renormalised to sum to one when the
    new cell also takes area from a non-adjacent centre.
    """
    pts = np.asarray(centers, dtype=float).reshape(4, 2)
    if neighbourhood is not None and len(neighbourhood):
        pts = np.vstack([pts, np.asarray(neighbourhood, dtype=float).reshape(-1, 2)])
    P = np.asarray(corner, dtype=float)
    rel = pts - P
    w, status = sibson_weights_batch(rel[None, :, 0], rel[None, :, 1], np.asarray(adjacent))
    if status[0] != 0:
        raise ValueError("corner cell is unbounded or disjoint from the adjacent centres")
    return w[0]


def sibson_weights_batch(cx, cy, adjacent):
    """Vectorised weights; coordinates are relative to each corner. Returns (weights, status)."""
    cx = np.ascontiguousarray(cx, dtype=np.float64)
    cy = np.ascontiguousarray(cy, dtype=np.float64)
    out = np.empty((cx.shape[0], 4))
    status = np.empty(cx.shape[0], dtype=np.int64)
    _corner_weights(cx, cy, np.asarray(adjacent, dtype=np.int64), out, status)
    return out, status
