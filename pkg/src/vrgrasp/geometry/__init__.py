"""Deterministic geometric kernel: meshes, overlap tests, swept-sphere casts."""

from .core import Transform, as_point, as_unit, normalize, quat_from_axis_angle, quat_slerp
from .mesh import PlacedMesh, TriangleMesh
from .primitives import box, cylinder, icosphere
from .queries import (
    Capsule,
    Sphere,
    SphereTraceHit,
    capsule_mesh_distance,
    capsule_overlaps_mesh,
    closest_point_on_mesh,
    closest_point_on_triangle,
    point_in_mesh,
    sphere_overlap_points,
    sphere_overlaps_mesh,
    sphere_trace,
)

__all__ = [
    "Capsule",
    "PlacedMesh",
    "Sphere",
    "SphereTraceHit",
    "Transform",
    "TriangleMesh",
    "as_point",
    "as_unit",
    "box",
    "capsule_mesh_distance",
    "capsule_overlaps_mesh",
    "closest_point_on_mesh",
    "closest_point_on_triangle",
    "cylinder",
    "icosphere",
    "normalize",
    "point_in_mesh",
    "quat_from_axis_angle",
    "quat_slerp",
    "sphere_overlap_points",
    "sphere_overlaps_mesh",
    "sphere_trace",
]
