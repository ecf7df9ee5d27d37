"""Indexed triangle meshes and placed scene objects.

Meshes are immutable after construction and precompute per-triangle data
(vertex arrays, AABBs) used by the query kernels. Degenerate triangles are
rejected at load time rather than silently skipped, so downstream queries
behave deterministically.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Transform

MIN_TRIANGLE_AREA = 1e-12  # m^2


class TriangleMesh:
    """Indexed triangle surface.

    vertices: (V, 3) float64, meters.
    triangles: (T, 3) integer vertex indices.
    is_watertight: every undirected edge shared by exactly two triangles
    (with opposite winding). Detected from the index buffer when not given;
    a True claim is verified and rejected if false.
    """

    def __init__(self, vertices, triangles, is_watertight: bool | None = None):
        v = np.asarray(vertices, dtype=np.float64)
        t = np.asarray(triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"vertices must be (V, 3), got {v.shape}")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError(f"triangles must be (T, 3), got {t.shape}")
        if len(t) == 0:
            raise ValueError("mesh has no triangles")
        if not np.all(np.isfinite(v)):
            raise ValueError("mesh vertices contain non-finite values")
        if t.min() < 0 or t.max() >= len(v):
            raise ValueError("triangle index out of range")

        a = v[t[:, 0]]
        b = v[t[:, 1]]
        c = v[t[:, 2]]
        areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
        bad = np.nonzero(areas <= MIN_TRIANGLE_AREA)[0]
        if len(bad):
            raise ValueError(
                f"degenerate triangle(s) at indices {bad[:8].tolist()} "
                f"(area <= {MIN_TRIANGLE_AREA} m^2)"
            )

        v.setflags(write=False)
        t.setflags(write=False)
        self.vertices = v
        self.triangles = t
        # Per-triangle vertex arrays and AABBs for the broad-phase filter.
        self.tri_a = np.ascontiguousarray(a)
        self.tri_b = np.ascontiguousarray(b)
        self.tri_c = np.ascontiguousarray(c)
        stacked = np.stack([a, b, c], axis=1)
        self.tri_min = stacked.min(axis=1)
        self.tri_max = stacked.max(axis=1)
        for arr in (self.tri_a, self.tri_b, self.tri_c, self.tri_min, self.tri_max):
            arr.setflags(write=False)

        closed = self._edges_closed()
        if is_watertight is None:
            self.is_watertight = closed
        elif is_watertight and not closed:
            raise ValueError("mesh declared watertight but has open or non-manifold edges")
        else:
            self.is_watertight = bool(is_watertight)

    def _edges_closed(self) -> bool:
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        # Closed orientable surface: each directed edge appears exactly once
        # and its reverse appears exactly once.
        keys = directed[:, 0] * len(self.vertices) + directed[:, 1]
        if len(np.unique(keys)) != len(keys):
            return False
        rev = directed[:, 1] * len(self.vertices) + directed[:, 0]
        return bool(np.all(np.isin(keys, rev)))

    def __len__(self) -> int:
        return len(self.triangles)

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        return self.tri_min.min(axis=0), self.tri_max.max(axis=0)

    def candidates_aabb(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Indices of triangles whose AABB intersects [lo, hi]."""
        mask = np.all(self.tri_min <= hi, axis=1) & np.all(self.tri_max >= lo, axis=1)
        return np.nonzero(mask)[0]


@dataclass
class PlacedMesh:
    """A mesh instance placed in the world.

    The transform is the object's placement pivot; it is the only mutable
    piece of scene state (a held object follows the hand by replacing it).
    """

    object_id: int
    mesh: TriangleMesh
    transform: Transform = field(default_factory=Transform.identity)

    @property
    def pivot(self) -> np.ndarray:
        return self.transform.translation
