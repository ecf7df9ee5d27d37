"""Basic 3D types: points, vectors, and rigid transforms.

Everything is float64 numpy. Points and vectors are plain (3,) arrays;
rigid transforms are quaternion + translation. All operations are pure and
deterministic: identical inputs give bit-identical outputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

QUAT_NORM_TOL = 1e-9
UNIT_TOL = 1e-9


def as_point(p, name: str = "point") -> np.ndarray:
    """Coerce to a finite (3,) float64 array. Rejects NaN/Inf."""
    a = np.asarray(p, dtype=np.float64)
    if a.shape != (3,):
        raise ValueError(f"{name} must have shape (3,), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite components: {a}")
    return a


def as_unit(v, name: str = "direction") -> np.ndarray:
    """Coerce to a (3,) unit vector (norm 1 within 1e-9)."""
    a = as_point(v, name)
    n = float(np.linalg.norm(a))
    if abs(n - 1.0) > UNIT_TOL:
        raise ValueError(f"{name} must be unit length, |v| = {n}")
    return a


def normalize(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("cannot normalize zero vector")
    return v / n


def quat_multiply(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    a = normalize(as_point(axis, "axis"))
    half = 0.5 * angle
    s = math.sin(half)
    return np.array([math.cos(half), a[0] * s, a[1] * s, a[2] * s])


def quat_slerp(q1: np.ndarray, q2: np.ndarray, u: float) -> np.ndarray:
    """Spherical interpolation along the shorter arc; exact at u=0 and u=1."""
    if u <= 0.0:
        return q1.copy()
    if u >= 1.0:
        return q2.copy()
    dot = float(np.dot(q1, q2))
    qb = q2
    if dot < 0.0:
        dot = -dot
        qb = -q2
    if dot > 1.0 - 1e-12:
        out = q1 + u * (qb - q1)
        return out / np.linalg.norm(out)
    theta = math.acos(min(1.0, dot))
    s = math.sin(theta)
    w1 = math.sin((1.0 - u) * theta) / s
    w2 = math.sin(u * theta) / s
    out = w1 * q1 + w2 * qb
    return out / np.linalg.norm(out)


@dataclass(frozen=True)
class Transform:
    """Rigid transform: unit quaternion (w, x, y, z) plus translation.

    Immutable; the underlying arrays are marked read-only so instances can
    be shared freely across threads.
    """

    rotation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        q = np.asarray(self.rotation, dtype=np.float64).copy()
        t = as_point(self.translation, "translation").copy()
        if q.shape != (4,):
            raise ValueError(f"rotation quaternion must have shape (4,), got {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("rotation quaternion has non-finite components")
        n = float(np.linalg.norm(q))
        if abs(n - 1.0) > QUAT_NORM_TOL:
            raise ValueError(f"rotation quaternion must be unit norm, |q| = {n}")
        q.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Transform":
        return Transform()

    @staticmethod
    def from_axis_angle(axis, angle: float, translation=(0.0, 0.0, 0.0)) -> "Transform":
        return Transform(quat_from_axis_angle(axis, angle), as_point(translation))

    @staticmethod
    def from_translation(translation) -> "Transform":
        return Transform(np.array([1.0, 0.0, 0.0, 0.0]), as_point(translation))

    def matrix(self) -> np.ndarray:
        return quat_to_matrix(self.rotation)

    def apply_point(self, p) -> np.ndarray:
        return self.matrix() @ np.asarray(p, dtype=np.float64) + self.translation

    def apply_points(self, pts: np.ndarray) -> np.ndarray:
        return pts @ self.matrix().T + self.translation

    def apply_vector(self, v) -> np.ndarray:
        return self.matrix() @ np.asarray(v, dtype=np.float64)

    def compose(self, other: "Transform") -> "Transform":
        """self ∘ other: apply `other` first, then `self`."""
        q = quat_multiply(self.rotation, other.rotation)
        q = q / np.linalg.norm(q)
        t = self.apply_point(other.translation)
        return Transform(q, t)

    def inverse(self) -> "Transform":
        qc = self.rotation * np.array([1.0, -1.0, -1.0, -1.0])
        t = -(quat_to_matrix(qc) @ self.translation)
        return Transform(qc, t)
