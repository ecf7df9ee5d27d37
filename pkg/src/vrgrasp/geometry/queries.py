"""Exact geometric queries against triangle meshes.

All queries are pure functions over immutable inputs and are deterministic:
identical inputs give bit-identical outputs. Mesh placements are rigid, so
queries transform the probe primitive into the mesh's local frame instead
of transforming vertices (distances are preserved exactly).

Closest-point and segment routines follow Ericson, "Real-Time Collision
Detection" (2004). Broad-phase is a flat per-triangle AABB filter.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Transform, as_point, as_unit
from .mesh import PlacedMesh, TriangleMesh

_PARALLEL_EPS = 1e-14
_SURFACE_EPS = 1e-12


@dataclass(frozen=True)
class Capsule:
    """Segment [a, b] inflated by `radius`."""

    a: np.ndarray
    b: np.ndarray
    radius: float

    def __post_init__(self):
        a = as_point(self.a, "capsule endpoint a")
        b = as_point(self.b, "capsule endpoint b")
        if self.radius <= 0:
            raise ValueError("capsule radius must be positive")
        if float(np.linalg.norm(b - a)) == 0.0:
            raise ValueError("capsule endpoints must be distinct")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_point(self.center, "sphere center")
        if self.radius <= 0:
            raise ValueError("sphere radius must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)


@dataclass(frozen=True)
class SphereTraceHit:
    """First contact of a swept sphere: surface point, sweep distance, triangle."""

    impact_point: np.ndarray
    hit_distance: float
    triangle_index: int


def _dot_rows(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", u, v)


def closest_points_on_triangles(p: np.ndarray, a: np.ndarray, b: np.ndarray,
                                c: np.ndarray) -> np.ndarray:
    """Closest point to `p` on each triangle (a[i], b[i], c[i]).

    Vectorized Voronoi-region walk (Ericson 5.1.5). Triangles must be
    non-degenerate.
    """
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = _dot_rows(ab, ap)
    d2 = _dot_rows(ac, ap)
    bp = p - b
    d3 = _dot_rows(ab, bp)
    d4 = _dot_rows(ac, bp)
    cp = p - c
    d5 = _dot_rows(ab, cp)
    d6 = _dot_rows(ac, cp)

    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    out = np.empty_like(a)
    done = np.zeros(len(a), dtype=bool)

    def take(mask: np.ndarray) -> np.ndarray:
        nonlocal done
        idx = np.nonzero(mask & ~done)[0]
        done = done | mask
        return idx

    i = take((d1 <= 0) & (d2 <= 0))
    out[i] = a[i]
    i = take((d3 >= 0) & (d4 <= d3))
    out[i] = b[i]
    i = take((vc <= 0) & (d1 >= 0) & (d3 <= 0))
    if len(i):
        t = (d1[i] / (d1[i] - d3[i]))[:, None]
        out[i] = a[i] + t * ab[i]
    i = take((d6 >= 0) & (d5 <= d6))
    out[i] = c[i]
    i = take((vb <= 0) & (d2 >= 0) & (d6 <= 0))
    if len(i):
        w = (d2[i] / (d2[i] - d6[i]))[:, None]
        out[i] = a[i] + w * ac[i]
    i = take((va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0))
    if len(i):
        w = ((d4[i] - d3[i]) / ((d4[i] - d3[i]) + (d5[i] - d6[i])))[:, None]
        out[i] = b[i] + w * (c[i] - b[i])
    i = np.nonzero(~done)[0]
    if len(i):
        denom = (va[i] + vb[i] + vc[i])[:, None]
        out[i] = a[i] + (vb[i][:, None] / denom) * ab[i] + (vc[i][:, None] / denom) * ac[i]
    return out


def closest_point_on_triangle(p, tri) -> np.ndarray:
    """Point of the closed triangle nearest to `p`.

    `tri` is a (3, 3) array-like of vertices. Degenerate triangles
    (area <= 1e-12) are rejected.
    """
    p = as_point(p)
    t = np.asarray(tri, dtype=np.float64)
    if t.shape != (3, 3):
        raise ValueError(f"triangle must be (3, 3), got {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError("triangle has non-finite vertices")
    area = 0.5 * np.linalg.norm(np.cross(t[1] - t[0], t[2] - t[0]))
    if area <= 1e-12:
        raise ValueError(f"degenerate triangle (area {area:g})")
    return closest_points_on_triangles(p, t[0:1], t[1:2], t[2:3])[0]


def closest_point_on_mesh(p_local: np.ndarray, mesh: TriangleMesh,
                          candidates: np.ndarray | None = None
                          ) -> tuple[float, np.ndarray, int]:
    """(distance, closest point, triangle index) in mesh-local coordinates."""
    if candidates is None:
        a, b, c = mesh.tri_a, mesh.tri_b, mesh.tri_c
        idx = None
    else:
        a = mesh.tri_a[candidates]
        b = mesh.tri_b[candidates]
        c = mesh.tri_c[candidates]
        idx = candidates
    pts = closest_points_on_triangles(p_local, a, b, c)
    d2 = _dot_rows(pts - p_local, pts - p_local)
    k = int(np.argmin(d2))
    tri = int(idx[k]) if idx is not None else k
    return float(np.sqrt(d2[k])), pts[k], tri


def _segment_segments_distance(p1: np.ndarray, q1: np.ndarray,
                               p2: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Distance from segment [p1, q1] to each segment [p2[i], q2[i]].

    Ericson 5.1.9, clamped quadratic. Both segment families must have
    positive length.
    """
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = float(np.dot(d1, d1))
    e = _dot_rows(d2, d2)
    f = _dot_rows(d2, r)
    c = r @ d1
    b = d2 @ d1
    denom = a * e - b * b
    s = np.where(denom > 0.0, np.clip((b * f - c * e) / np.where(denom > 0, denom, 1.0), 0.0, 1.0), 0.0)
    t = (b * s + f) / e
    t_cl = np.clip(t, 0.0, 1.0)
    redo = t != t_cl
    s = np.where(redo, np.clip((b * t_cl - c) / a, 0.0, 1.0), s)
    c1 = p1 + s[:, None] * d1
    c2 = p2 + t_cl[:, None] * d2
    diff = c1 - c2
    return np.sqrt(_dot_rows(diff, diff))


def _segment_intersects_triangles(p: np.ndarray, q: np.ndarray, a: np.ndarray,
                                  b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Boolean mask: does segment [p, q] cross each triangle's interior?"""
    d = q - p
    e1 = b - a
    e2 = c - a
    h = np.cross(d[None, :], e2)
    det = _dot_rows(e1, h)
    valid = np.abs(det) > _PARALLEL_EPS
    inv = np.where(valid, 1.0 / np.where(valid, det, 1.0), 0.0)
    s = p - a
    u = _dot_rows(s, h) * inv
    qv = np.cross(s, e1)
    v = (qv @ d) * inv
    t = _dot_rows(e2, qv) * inv
    return valid & (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0) & (t >= 0.0) & (t <= 1.0)


def segment_triangles_distance(p: np.ndarray, q: np.ndarray, a: np.ndarray,
                               b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Exact distance from segment [p, q] to each triangle.

    Minimum of segment-to-edge and endpoint-to-face distances, zero when
    the segment crosses the face.
    """
    d_pa = closest_points_on_triangles(p, a, b, c) - p
    d_qa = closest_points_on_triangles(q, a, b, c) - q
    dist = np.minimum(np.sqrt(_dot_rows(d_pa, d_pa)), np.sqrt(_dot_rows(d_qa, d_qa)))
    dist = np.minimum(dist, _segment_segments_distance(p, q, a, b))
    dist = np.minimum(dist, _segment_segments_distance(p, q, b, c))
    dist = np.minimum(dist, _segment_segments_distance(p, q, c, a))
    return np.where(_segment_intersects_triangles(p, q, a, b, c), 0.0, dist)


def capsule_mesh_distance(cap: Capsule, mesh: TriangleMesh,
                          tf: Transform = Transform.identity()) -> float:
    """Minimum distance from the capsule's core segment to the mesh surface.

    Exact (no broad-phase): intended for oracles and diagnostics as well as
    the overlap predicate.
    """
    inv = tf.inverse()
    p = inv.apply_point(cap.a)
    q = inv.apply_point(cap.b)
    d = segment_triangles_distance(p, q, mesh.tri_a, mesh.tri_b, mesh.tri_c)
    return float(d.min())


def capsule_overlaps_mesh(cap: Capsule, mesh: TriangleMesh,
                          tf: Transform = Transform.identity()) -> bool:
    """True iff the capsule touches the mesh surface or lies inside it.

    Surface test: segment-to-triangle distance <= radius, restricted to
    triangles whose AABB meets the capsule's AABB. Containment (watertight
    meshes only) covers capsules fully inside the volume.
    """
    inv = tf.inverse()
    p = inv.apply_point(cap.a)
    q = inv.apply_point(cap.b)
    r = cap.radius
    lo = np.minimum(p, q) - r
    hi = np.maximum(p, q) + r
    cand = mesh.candidates_aabb(lo, hi)
    if len(cand):
        d = segment_triangles_distance(p, q, mesh.tri_a[cand], mesh.tri_b[cand],
                                       mesh.tri_c[cand])
        if float(d.min()) <= r:
            return True
    if mesh.is_watertight:
        return _point_in_mesh_local(p, mesh) or _point_in_mesh_local(q, mesh)
    return False


def sphere_overlaps_mesh(s: Sphere, mesh: TriangleMesh,
                         tf: Transform = Transform.identity()) -> bool:
    """True iff the sphere touches the mesh surface or its center is inside."""
    inv = tf.inverse()
    c = inv.apply_point(s.center)
    lo = c - s.radius
    hi = c + s.radius
    cand = mesh.candidates_aabb(lo, hi)
    if len(cand):
        dist, _, _ = closest_point_on_mesh(c, mesh, cand)
        if dist <= s.radius:
            return True
    if mesh.is_watertight:
        return _point_in_mesh_local(c, mesh)
    return False


def sphere_overlap_points(s: Sphere, objects: list[PlacedMesh]
                          ) -> list[tuple[int, np.ndarray]]:
    """(object_id, placement pivot) for every object intersecting the sphere.

    The reported location is the object's placement origin, not the nearest
    surface point. Results are ordered by object_id.
    """
    out = []
    for obj in sorted(objects, key=lambda o: o.object_id):
        if sphere_overlaps_mesh(s, obj.mesh, obj.transform):
            out.append((obj.object_id, obj.pivot))
    return out


def sphere_trace(start, direction, radius: float, max_length: float,
                 mesh: TriangleMesh, tf: Transform = Transform.identity()
                 ) -> SphereTraceHit | None:
    """First contact of a sphere swept from `start` along `direction`.

    Returns None when nothing is touched within `max_length`. If the sphere
    already overlaps the mesh at the start, the hit has distance 0 and the
    impact point is the mesh point nearest to `start`.
    """
    start = as_point(start, "trace start")
    direction = as_unit(direction, "trace direction")
    if radius <= 0:
        raise ValueError("trace radius must be positive")
    if max_length <= 0:
        raise ValueError("trace max_length must be positive")

    inv = tf.inverse()
    sp = inv.apply_point(start)
    d = inv.apply_vector(direction)

    end = sp + max_length * d
    lo = np.minimum(sp, end) - radius
    hi = np.maximum(sp, end) + radius
    cand = mesh.candidates_aabb(lo, hi)
    if len(cand) == 0:
        return None

    dist0, p0, tri0 = closest_point_on_mesh(sp, mesh, cand)
    if dist0 <= radius:
        return SphereTraceHit(tf.apply_point(p0), 0.0, tri0)

    a = mesh.tri_a[cand]
    b = mesh.tri_b[cand]
    c = mesh.tri_c[cand]
    n_cand = len(cand)
    best_t = np.full(n_cand, np.inf)
    best_q = np.zeros((n_cand, 3))

    def consider(mask: np.ndarray, t: np.ndarray, q: np.ndarray) -> None:
        better = mask & (t < best_t)
        best_t[better] = t[better]
        best_q[better] = q[better]

    # Face contact: sweep against the triangle plane offset by the radius
    # on the approach side; valid only if the touch point projects inside.
    n = np.cross(b - a, c - a)
    n /= np.linalg.norm(n, axis=1)[:, None]
    s0 = _dot_rows(n, sp - a)
    nd = n @ d
    outside = np.abs(s0) > radius
    moving = np.abs(nd) > _PARALLEL_EPS
    sign = np.sign(s0)
    t_face = np.where(moving, (sign * radius - s0) / np.where(moving, nd, 1.0), np.inf)
    face_ok = outside & moving & (t_face >= 0.0) & (t_face <= max_length)
    t_safe = np.where(face_ok, t_face, 0.0)
    center = sp + t_safe[:, None] * d
    q_face = center - (sign * radius)[:, None] * n
    # Inside-triangle test via barycentric coordinates.
    v0 = b - a
    v1 = c - a
    v2 = q_face - a
    d00 = _dot_rows(v0, v0)
    d01 = _dot_rows(v0, v1)
    d11 = _dot_rows(v1, v1)
    d20 = _dot_rows(v2, v0)
    d21 = _dot_rows(v2, v1)
    denom = d00 * d11 - d01 * d01
    vbar = (d11 * d20 - d01 * d21) / denom
    wbar = (d00 * d21 - d01 * d20) / denom
    inside = (vbar >= 0.0) & (wbar >= 0.0) & (vbar + wbar <= 1.0)
    consider(face_ok & inside, t_face, q_face)

    # Edge contact: ray versus the cylinder around each edge, restricted to
    # the edge's axial span.
    for p_edge, q_edge in ((a, b), (b, c), (c, a)):
        e = q_edge - p_edge
        elen = np.sqrt(_dot_rows(e, e))
        ehat = e / elen[:, None]
        m = sp - p_edge
        md = m @ d
        me = _dot_rows(m, ehat)
        de = ehat @ d
        qa = 1.0 - de * de
        qb = md - me * de
        qc = _dot_rows(m, m) - me * me - radius * radius
        nontrivial = qa > _PARALLEL_EPS
        disc = qb * qb - qa * qc
        has_root = nontrivial & (disc >= 0.0)
        sqrt_disc = np.sqrt(np.where(has_root, disc, 0.0))
        t_edge = np.where(has_root, (-qb - sqrt_disc) / np.where(nontrivial, qa, 1.0), np.inf)
        t_safe = np.where(has_root, t_edge, 0.0)
        axial = me + t_safe * de
        edge_ok = has_root & (t_edge >= 0.0) & (t_edge <= max_length) \
            & (axial >= 0.0) & (axial <= elen)
        q_contact = p_edge + axial[:, None] * ehat
        consider(edge_ok, t_edge, q_contact)

    # Vertex contact: ray versus a sphere of the trace radius at each corner.
    for vtx in (a, b, c):
        m = sp - vtx
        qb = m @ d
        qc = _dot_rows(m, m) - radius * radius
        disc = qb * qb - qc
        has_root = disc >= 0.0
        sqrt_disc = np.sqrt(np.where(has_root, disc, 0.0))
        t_vtx = np.where(has_root, -qb - sqrt_disc, np.inf)
        vtx_ok = has_root & (t_vtx >= 0.0) & (t_vtx <= max_length)
        consider(vtx_ok, t_vtx, vtx)

    if not np.any(np.isfinite(best_t)):
        return None
    k = int(np.argmin(best_t))  # ties resolve to the lowest triangle index
    return SphereTraceHit(tf.apply_point(best_q[k]), float(best_t[k]), int(cand[k]))


# Fixed, slightly irrational ray directions for the parity test; the first
# non-degenerate one wins, so results are deterministic.
_RAY_DIRECTIONS = [
    np.array([0.5773502691896258, 0.5773502691896258, 0.5773502691896258]),
    np.array([0.2672612419124244, 0.5345224838248488, 0.8017837257372732]),
    np.array([-0.4558423058385518, 0.5698028822981898, 0.6837634587578277]),
    np.array([0.8111071056538127, -0.3244428422615251, 0.4866642633922876]),
    np.array([-0.1690308509457033, -0.5070925528371096, 0.8451542547285166]),
    np.array([0.6396021490668313, 0.4264014327112209, -0.6396021490668313]),
    np.array([-0.7427813527082074, 0.3713906763541037, -0.5570860145311556]),
    np.array([0.4082482904638631, -0.8164965809277261, -0.4082482904638631]),
]


def _ray_parity(p: np.ndarray, d: np.ndarray, mesh: TriangleMesh) -> bool | None:
    """Crossing parity of a ray from p, or None when the cast is degenerate."""
    a, b, c = mesh.tri_a, mesh.tri_b, mesh.tri_c
    e1 = b - a
    e2 = c - a
    h = np.cross(d[None, :], e2)
    det = _dot_rows(e1, h)
    parallel = np.abs(det) <= _PARALLEL_EPS
    if np.any(parallel):
        # Nearly coplanar triangles are ambiguous only if the ray runs close
        # to their plane and passes their bounding box.
        n = np.cross(e1[parallel], e2[parallel])
        n /= np.linalg.norm(n, axis=1)[:, None]
        plane_dist = np.abs(_dot_rows(n, p - a[parallel]))
        near_plane = plane_dist < 1e-9
        if np.any(near_plane):
            idx = np.nonzero(parallel)[0][near_plane]
            if np.any(_ray_hits_aabbs(p, d, mesh.tri_min[idx], mesh.tri_max[idx])):
                return None
    inv = np.where(parallel, 0.0, 1.0 / np.where(parallel, 1.0, det))
    s = p - a
    u = _dot_rows(s, h) * inv
    qv = np.cross(s, e1)
    v = (qv @ d) * inv
    t = _dot_rows(e2, qv) * inv
    crossing = ~parallel & (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0) & (t > _SURFACE_EPS)
    near = ~parallel & (t > _SURFACE_EPS) \
        & (u >= -1e-10) & (v >= -1e-10) & (u + v <= 1.0 + 1e-10) \
        & ((np.abs(u) < 1e-10) | (np.abs(v) < 1e-10) | (np.abs(1.0 - u - v) < 1e-10))
    if np.any(near):
        return None  # grazes an edge or vertex; retry with another direction
    on_surface = ~parallel & (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0) \
        & (np.abs(t) <= _SURFACE_EPS)
    if np.any(on_surface):
        return False  # on the boundary: not strictly inside
    return bool(np.count_nonzero(crossing) % 2 == 1)


def _ray_hits_aabbs(p: np.ndarray, d: np.ndarray, lo: np.ndarray,
                    hi: np.ndarray) -> np.ndarray:
    t0 = np.zeros(len(lo))
    t1 = np.full(len(lo), np.inf)
    for i in range(3):
        if abs(d[i]) > 1e-16:
            ta = (lo[:, i] - p[i]) / d[i]
            tb = (hi[:, i] - p[i]) / d[i]
            tn = np.minimum(ta, tb)
            tf = np.maximum(ta, tb)
            t0 = np.maximum(t0, tn)
            t1 = np.minimum(t1, tf)
        else:
            outside = (p[i] < lo[:, i] - 1e-12) | (p[i] > hi[:, i] + 1e-12)
            t1 = np.where(outside, -np.inf, t1)
    return t0 <= t1


def _point_in_mesh_local(p: np.ndarray, mesh: TriangleMesh) -> bool:
    for d in _RAY_DIRECTIONS:
        res = _ray_parity(p, d, mesh)
        if res is not None:
            return res
    raise ValueError("containment test degenerate along every probe direction")


def point_in_mesh(p, mesh: TriangleMesh, tf: Transform = Transform.identity()) -> bool:
    """Strict containment via ray-crossing parity. Watertight meshes only."""
    p = as_point(p)
    if not mesh.is_watertight:
        raise ValueError("containment requires a watertight mesh")
    return _point_in_mesh_local(tf.inverse().apply_point(p), mesh)
