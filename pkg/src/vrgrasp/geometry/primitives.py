"""Procedural watertight meshes: icosphere, box, cylinder.

Stand-ins for everyday graspable objects (ball, small box, can) so the
full pipeline runs without external mesh assets.
"""
from __future__ import annotations

import math

import numpy as np

from .mesh import TriangleMesh

# Golden-ratio icosahedron, circumradius 1.
_PHI = (1.0 + math.sqrt(5.0)) / 2.0
_ICO_VERTS = [
    (-1, _PHI, 0), (1, _PHI, 0), (-1, -_PHI, 0), (1, -_PHI, 0),
    (0, -1, _PHI), (0, 1, _PHI), (0, -1, -_PHI), (0, 1, -_PHI),
    (_PHI, 0, -1), (_PHI, 0, 1), (-_PHI, 0, -1), (-_PHI, 0, 1),
]
_ICO_FACES = [
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
]


def icosphere(radius: float = 1.0, subdivisions: int = 3) -> TriangleMesh:
    """Subdivided icosahedron with all vertices on a sphere of `radius`."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if subdivisions < 0:
        raise ValueError("subdivisions must be >= 0")
    verts = [np.array(v, dtype=np.float64) / np.linalg.norm(v) for v in _ICO_VERTS]
    faces = list(_ICO_FACES)
    for _ in range(subdivisions):
        midpoint_cache: dict[tuple[int, int], int] = {}

        def midpoint(i: int, j: int) -> int:
            key = (i, j) if i < j else (j, i)
            idx = midpoint_cache.get(key)
            if idx is None:
                m = verts[i] + verts[j]
                m /= np.linalg.norm(m)
                verts.append(m)
                idx = len(verts) - 1
                midpoint_cache[key] = idx
            return idx

        new_faces = []
        for a, b, c in faces:
            ab = midpoint(a, b)
            bc = midpoint(b, c)
            ca = midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    vertices = np.array(verts) * radius
    return TriangleMesh(vertices, np.array(faces), is_watertight=True)


def box(size_x: float, size_y: float, size_z: float) -> TriangleMesh:
    """Axis-aligned box centered at the origin, 12 triangles."""
    if min(size_x, size_y, size_z) <= 0:
        raise ValueError("box dimensions must be positive")
    hx, hy, hz = size_x / 2.0, size_y / 2.0, size_z / 2.0
    v = np.array([
        (-hx, -hy, -hz), (hx, -hy, -hz), (hx, hy, -hz), (-hx, hy, -hz),
        (-hx, -hy, hz), (hx, -hy, hz), (hx, hy, hz), (-hx, hy, hz),
    ])
    f = np.array([
        (0, 2, 1), (0, 3, 2),          # -z
        (4, 5, 6), (4, 6, 7),          # +z
        (0, 1, 5), (0, 5, 4),          # -y
        (3, 7, 6), (3, 6, 2),          # +y
        (0, 4, 7), (0, 7, 3),          # -x
        (1, 2, 6), (1, 6, 5),          # +x
    ])
    return TriangleMesh(v, f, is_watertight=True)


def cylinder(radius: float, height: float, segments: int = 48) -> TriangleMesh:
    """Closed cylinder along +z, centered at the origin."""
    if radius <= 0 or height <= 0:
        raise ValueError("radius and height must be positive")
    if segments < 3:
        raise ValueError("segments must be >= 3")
    hz = height / 2.0
    angles = 2.0 * math.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(angles), radius * np.sin(angles)], axis=1)
    bottom = np.column_stack([ring, np.full(segments, -hz)])
    top = np.column_stack([ring, np.full(segments, hz)])
    verts = np.vstack([bottom, top, [(0.0, 0.0, -hz)], [(0.0, 0.0, hz)]])
    cb, ct = 2 * segments, 2 * segments + 1
    faces = []
    for i in range(segments):
        j = (i + 1) % segments
        faces.append((i, j, segments + i))            # side lower
        faces.append((j, segments + j, segments + i))  # side upper
        faces.append((cb, j, i))                       # bottom cap (faces -z)
        faces.append((ct, segments + i, segments + j))  # top cap (faces +z)
    return TriangleMesh(verts, np.array(faces), is_watertight=True)
