"""Independent brute-force oracles used to cross-check the geometry kernel.

Deliberately written with different formulations than the library: distances
come from plane projection plus edge clamping, minimization over a segment
uses ternary search (distance to a convex set is convex along a line), and
first-touch sweeps use marching plus bisection.
"""
from __future__ import annotations

import numpy as np


def _rows_dot(u, v):
    return np.einsum("ij,ij->i", u, v)


def point_segment_distance_rows(p, a, b):
    """Rowwise distance from p[i] to segment [a[i], b[i]]."""
    e = b - a
    t = np.clip(_rows_dot(p - a, e) / _rows_dot(e, e), 0.0, 1.0)
    diff = p - (a + t[:, None] * e)
    return np.sqrt(_rows_dot(diff, diff))


def point_triangle_distance_rows(p, a, b, c):
    """Rowwise point-to-triangle distance: plane projection or nearest edge."""
    n = np.cross(b - a, c - a)
    nn = np.linalg.norm(n, axis=1)
    nhat = n / nn[:, None]
    dplane = _rows_dot(p - a, nhat)
    proj = p - dplane[:, None] * nhat
    v0 = b - a
    v1 = c - a
    v2 = proj - a
    d00 = _rows_dot(v0, v0)
    d01 = _rows_dot(v0, v1)
    d11 = _rows_dot(v1, v1)
    d20 = _rows_dot(v2, v0)
    d21 = _rows_dot(v2, v1)
    denom = d00 * d11 - d01 * d01
    vbar = (d11 * d20 - d01 * d21) / denom
    wbar = (d00 * d21 - d01 * d20) / denom
    inside = (vbar >= 0.0) & (wbar >= 0.0) & (vbar + wbar <= 1.0)
    d_edge = np.minimum(
        point_segment_distance_rows(p, a, b),
        np.minimum(point_segment_distance_rows(p, b, c),
                   point_segment_distance_rows(p, c, a)),
    )
    return np.where(inside, np.abs(dplane), d_edge)


def segment_triangle_distance_rows(p, q, a, b, c, iters: int = 100):
    """Rowwise min distance from segment [p[i], q[i]] to triangle i.

    Ternary search over the segment parameter; the objective is convex, so
    this converges to full float precision in ~100 iterations.
    """
    lo = np.zeros(len(p))
    hi = np.ones(len(p))
    d = q - p
    for _ in range(iters):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        f1 = point_triangle_distance_rows(p + m1[:, None] * d, a, b, c)
        f2 = point_triangle_distance_rows(p + m2[:, None] * d, a, b, c)
        left = f1 < f2
        hi = np.where(left, m2, hi)
        lo = np.where(left, lo, m1)
    tm = 0.5 * (lo + hi)
    return point_triangle_distance_rows(p + tm[:, None] * d, a, b, c)


def point_tris_distance_grid(points, a, b, c):
    """(N, T) distances from each of N points to each of T triangles."""
    n_pts = len(points)
    n_tri = len(a)
    p = np.repeat(points, n_tri, axis=0)
    aa = np.tile(a, (n_pts, 1))
    bb = np.tile(b, (n_pts, 1))
    cc = np.tile(c, (n_pts, 1))
    return point_triangle_distance_rows(p, aa, bb, cc).reshape(n_pts, n_tri)


def mesh_distance_at(sp, d, t, a, b, c):
    pts = np.asarray([sp + t * d])
    return float(point_tris_distance_grid(pts, a, b, c).min())


def first_touch_bisection(sp, d, radius, max_len, a, b, c,
                          n_march: int = 1024, iters: int = 80):
    """First sweep parameter where the sphere touches any triangle.

    Marches the interval then bisects the first sign change. Returns None
    when no marched sample comes within the radius (tangential touches
    narrower than the march step are not found).
    """
    ts = np.linspace(0.0, max_len, n_march + 1)
    pts = sp[None, :] + ts[:, None] * d[None, :]
    f = point_tris_distance_grid(pts, a, b, c).min(axis=1) - radius
    below = np.nonzero(f <= 0.0)[0]
    if len(below) == 0:
        return None
    i = int(below[0])
    if i == 0:
        return 0.0
    lo, hi = ts[i - 1], ts[i]
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mesh_distance_at(sp, d, mid, a, b, c) - radius <= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def random_triangle_soup(rng, n_tris: int, scale: float = 1.0):
    """Random non-degenerate triangles in a cube of the given scale."""
    tris = []
    while len(tris) < n_tris:
        t = rng.uniform(-scale, scale, size=(3, 3))
        area = 0.5 * np.linalg.norm(np.cross(t[1] - t[0], t[2] - t[0]))
        if area > 1e-4 * scale * scale:
            tris.append(t)
    arr = np.array(tris)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def soup_to_mesh(a, b, c):
    from vrgrasp.geometry import TriangleMesh

    verts = np.concatenate([a, b, c])
    n = len(a)
    idx = np.stack([np.arange(n), np.arange(n) + n, np.arange(n) + 2 * n], axis=1)
    return TriangleMesh(verts, idx)
