"""Articulated virtual hand: skeleton, trigger layout, kinematics, motion.

The hand is five 3-joint flexion chains rooted at a palm frame. A single
close fraction in [0, 1] drives every joint toward its flexed limit, which
is how the one-button close/open gesture of a motion controller maps onto
the skeleton. Contact sensing uses capsule volumes wrapped around the last
two phalanges of each finger plus one sphere on the palm.

Frame conventions for the default right hand: palm origin at the palm
center, +x toward the fingertips, +y toward the thumb, +z out of the palm
on the gripping side.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .geometry import Capsule, Sphere, Transform, as_point, normalize, quat_slerp
from .geometry.core import quat_from_axis_angle


class Finger(Enum):
    THUMB = "thumb"
    INDEX = "index"
    MIDDLE = "middle"
    RING = "ring"
    PINKY = "pinky"


class Segment(Enum):
    PROXIMAL = "prox"
    MIDDLE = "mid"
    DISTAL = "dist"


FINGERS = tuple(Finger)
SEGMENTS = tuple(Segment)


@dataclass(frozen=True)
class PhalanxId:
    finger: Finger
    segment: Segment

    @property
    def key(self) -> str:
        return f"{self.finger.value}_{self.segment.value}"

    @staticmethod
    def from_key(key: str) -> "PhalanxId":
        fname, sname = key.rsplit("_", 1)
        return PhalanxId(Finger(fname), Segment(sname))


ALL_PHALANGES = tuple(PhalanxId(f, s) for f in FINGERS for s in SEGMENTS)
# Only the last two phalanges of each finger carry contact triggers.
TRIGGER_PHALANGES = tuple(
    PhalanxId(f, s) for f in FINGERS for s in (Segment.MIDDLE, Segment.DISTAL))
CAPSULE_TRIGGERS_PER_FINGER = 2
N_FINGERS = 5

# Full close takes 0.5 s; frame-delta smoothing kicks in above two default
# frame steps at 90 FPS.
DEFAULT_RATE_LIMIT = math.pi          # rad/s
DEFAULT_SMOOTH_STEP = 2.0 * DEFAULT_RATE_LIMIT / 90.0


@dataclass(frozen=True)
class JointSpec:
    """One flexion joint: mount offset in the parent frame, axis, range."""

    offset: np.ndarray
    axis: np.ndarray
    theta_min: float
    theta_max: float

    def __post_init__(self):
        off = as_point(self.offset, "joint offset")
        ax = normalize(as_point(self.axis, "joint axis"))
        if not self.theta_min < self.theta_max:
            raise ValueError("joint range must satisfy theta_min < theta_max")
        off.setflags(write=False)
        ax.setflags(write=False)
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "axis", ax)


@dataclass(frozen=True)
class FingerChain:
    """Three chained joints plus the fingertip offset in the distal frame."""

    joints: tuple[JointSpec, JointSpec, JointSpec]
    tip: np.ndarray
    flesh_radius: float = 0.007

    def __post_init__(self):
        if len(self.joints) != 3:
            raise ValueError("a finger chain has exactly 3 joints")
        tip = as_point(self.tip, "finger tip offset")
        if self.flesh_radius <= 0:
            raise ValueError("flesh radius must be positive")
        tip.setflags(write=False)
        object.__setattr__(self, "tip", tip)

    def segment_vector(self, seg_index: int) -> np.ndarray:
        """Bone vector of the segment, in the segment's own frame."""
        if seg_index < 2:
            return self.joints[seg_index + 1].offset
        return self.tip

    def segment_length(self, seg_index: int) -> float:
        return float(np.linalg.norm(self.segment_vector(seg_index)))

    def palmar_normal(self, seg_index: int) -> np.ndarray:
        """Unit normal from the bone toward the gripping surface.

        Flexion sweeps the segment tip along axis x segment, so that cross
        product is the direction contact happens on.
        """
        return normalize(np.cross(self.joints[seg_index].axis,
                                  self.segment_vector(seg_index)))


@dataclass(frozen=True)
class HandSkeleton:
    fingers: dict[Finger, FingerChain]
    palm_frame: Transform = field(default_factory=Transform.identity)
    handedness: str = "right"

    def __post_init__(self):
        if set(self.fingers) != set(FINGERS):
            raise ValueError("skeleton must define all five fingers")
        if self.handedness not in ("right", "left"):
            raise ValueError("handedness must be 'right' or 'left'")

    def joint(self, finger: Finger, seg_index: int) -> JointSpec:
        return self.fingers[finger].joints[seg_index]

    def angle_index(self, finger: Finger, seg_index: int) -> int:
        return FINGERS.index(finger) * 3 + seg_index

    def longest_phalanx(self) -> float:
        return max(ch.segment_length(i)
                   for ch in self.fingers.values() for i in range(3))

    def close_fraction(self, angles: np.ndarray) -> float:
        """Largest per-joint normalized flexion; 0 = open, 1 = fully closed."""
        fracs = []
        for f in FINGERS:
            for j in range(3):
                spec = self.joint(f, j)
                span = spec.theta_max - spec.theta_min
                fracs.append((angles[self.angle_index(f, j)] - spec.theta_min) / span)
        return float(max(fracs))


@dataclass(frozen=True)
class HandPose:
    """Per-joint flexion angles (15, finger-major) plus the palm transform."""

    angles: np.ndarray
    palm: Transform = field(default_factory=Transform.identity)

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=np.float64).copy()
        if a.shape != (15,):
            raise ValueError(f"angles must have shape (15,), got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("angles contain non-finite values")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    @staticmethod
    def rest(palm: Transform | None = None) -> "HandPose":
        return HandPose(np.zeros(15), palm or Transform.identity())

    def with_palm(self, palm: Transform) -> "HandPose":
        return HandPose(self.angles, palm)


@dataclass(frozen=True)
class CloseCommand:
    """Target close fraction plus the joint rate limit."""

    fraction: float
    rate_limit: float = DEFAULT_RATE_LIMIT

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError("close fraction must be in [0, 1]")
        if self.rate_limit <= 0:
            raise ValueError("rate limit must be positive")


@dataclass(frozen=True)
class TriggerSpec:
    """Capsule trigger wrapped around one phalanx bone segment."""

    radius: float = 0.007
    length_fraction: float = 0.8

    def __post_init__(self):
        if self.radius <= 0 or not 0 < self.length_fraction <= 1:
            raise ValueError("invalid trigger dimensions")


@dataclass(frozen=True)
class TriggerLayout:
    """Ten finger capsules (middle + distal per finger) and the palm sphere.

    trace_radius and trace_start_offset shape the measurement sweep used
    when a grasp is scored; see metrics.build_trace.
    """

    triggers: dict[PhalanxId, TriggerSpec]
    palm_center: np.ndarray = field(default_factory=lambda: np.array([0.02, 0.005, 0.01]))
    palm_radius: float = 0.06
    trace_radius: float = 0.0005
    trace_start_offset: float | None = None  # dorsal offset of Sp; None = flesh radius

    def __post_init__(self):
        if set(self.triggers) != set(TRIGGER_PHALANGES):
            raise ValueError("layout must define exactly the 10 middle/distal triggers")
        pc = as_point(self.palm_center, "palm trigger center")
        if self.palm_radius <= 0 or self.trace_radius <= 0:
            raise ValueError("trigger radii must be positive")
        pc.setflags(write=False)
        object.__setattr__(self, "palm_center", pc)


@dataclass(frozen=True)
class WorldTrigger:
    """A trigger capsule placed in the world.

    surface_center is the trigger's reference point for distance
    measurement: the capsule axis midpoint pushed out by the flesh radius
    onto the palmar surface of the phalanx.
    """

    phalanx: PhalanxId
    capsule: Capsule
    surface_center: np.ndarray


def forward_kinematics(skel: HandSkeleton, pose: HandPose) -> dict[PhalanxId, Transform]:
    """World transform of every phalanx. Rejects out-of-range joint angles."""
    frames: dict[PhalanxId, Transform] = {}
    base = pose.palm.compose(skel.palm_frame)
    for f in FINGERS:
        chain = skel.fingers[f]
        frame = base
        for j, seg in enumerate(SEGMENTS):
            spec = chain.joints[j]
            theta = float(pose.angles[skel.angle_index(f, j)])
            if theta < spec.theta_min - 1e-12 or theta > spec.theta_max + 1e-12:
                raise ValueError(
                    f"{f.value} joint {j} angle {theta:.6f} outside "
                    f"[{spec.theta_min:.6f}, {spec.theta_max:.6f}]")
            local = Transform(quat_from_axis_angle(spec.axis, theta), spec.offset)
            frame = frame.compose(local)
            frames[PhalanxId(f, seg)] = frame
    return frames


def trigger_world_placement(skel: HandSkeleton, pose: HandPose, layout: TriggerLayout,
                            frames: dict[PhalanxId, Transform] | None = None
                            ) -> tuple[dict[PhalanxId, WorldTrigger], Sphere]:
    """Place every trigger rigidly on its phalanx; returns capsules + palm sphere."""
    if frames is None:
        frames = forward_kinematics(skel, pose)
    out: dict[PhalanxId, WorldTrigger] = {}
    for pid in TRIGGER_PHALANGES:
        spec = layout.triggers[pid]
        chain = skel.fingers[pid.finger]
        seg_index = SEGMENTS.index(pid.segment)
        seg_vec = chain.segment_vector(seg_index)
        frame = frames[pid]
        lo = (1.0 - spec.length_fraction) / 2.0
        hi = (1.0 + spec.length_fraction) / 2.0
        a = frame.apply_point(seg_vec * lo)
        b = frame.apply_point(seg_vec * hi)
        sc_local = seg_vec * 0.5 + chain.flesh_radius * chain.palmar_normal(seg_index)
        out[pid] = WorldTrigger(pid, Capsule(a, b, spec.radius),
                                frame.apply_point(sc_local))
    base = pose.palm.compose(skel.palm_frame)
    palm = Sphere(base.apply_point(layout.palm_center), layout.palm_radius)
    return out, palm


def _frozen_joints(blocked) -> dict[Finger, int]:
    """Highest frozen joint index per finger (inclusive), from blocked phalanges.

    Blocking a phalanx pins its world transform, which requires freezing its
    own joint and everything rootward; child joints stay free to flex.
    """
    frozen: dict[Finger, int] = {}
    for pid in blocked:
        depth = SEGMENTS.index(pid.segment)
        frozen[pid.finger] = max(frozen.get(pid.finger, -1), depth)
    return frozen


def advance_pose(skel: HandSkeleton, pose: HandPose, cmd: CloseCommand, dt: float,
                 blocked=frozenset()) -> HandPose:
    """One rate-limited step of every joint toward the commanded fraction.

    Frozen joints (from blocked phalanges) hold their angle against closing
    motion but release as soon as the command pulls them toward opening.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    frozen = _frozen_joints(blocked)
    max_step = cmd.rate_limit * dt
    angles = pose.angles.copy()
    for f in FINGERS:
        freeze_upto = frozen.get(f, -1)
        for j in range(3):
            spec = skel.joint(f, j)
            idx = skel.angle_index(f, j)
            target = spec.theta_min + cmd.fraction * (spec.theta_max - spec.theta_min)
            delta = float(np.clip(target - angles[idx], -max_step, max_step))
            if j <= freeze_upto and delta > 0.0:
                delta = 0.0
            angles[idx] = float(np.clip(angles[idx] + delta,
                                        spec.theta_min, spec.theta_max))
    return HandPose(angles, pose.palm)


def smooth_deltas(prev: HandPose, nxt: HandPose, delta_max: float) -> list[HandPose]:
    """Interpolate between poses so no joint jumps more than delta_max.

    Returns [nxt] unchanged when every per-joint delta is already within
    the limit; otherwise the minimal evenly spaced sequence ending exactly
    at nxt.
    """
    if delta_max <= 0:
        raise ValueError("delta_max must be positive")
    worst = float(np.max(np.abs(nxt.angles - prev.angles)))
    n = max(1, math.ceil(worst / delta_max - 1e-12))
    if n == 1:
        return [nxt]
    poses = []
    for i in range(1, n):
        u = i / n
        angles = prev.angles + u * (nxt.angles - prev.angles)
        q = quat_slerp(prev.palm.rotation, nxt.palm.rotation, u)
        t = prev.palm.translation + u * (nxt.palm.translation - prev.palm.translation)
        poses.append(HandPose(angles, Transform(q, t)))
    poses.append(nxt)
    return poses


# ---------------------------------------------------------------------------
# Default hand and config I/O
# ---------------------------------------------------------------------------

_FINGER_DEFAULTS = {
    # root offset, direction, (proximal, middle, distal) lengths, max flexion
    Finger.THUMB: ((0.005, 0.040, 0.000), (0.5665, 0.8240, 0.0),
                   (0.046, 0.032, 0.028), math.pi / 3),
    Finger.INDEX: ((0.040, 0.025, 0.000), (1.0, 0.0, 0.0),
                   (0.042, 0.025, 0.020), math.pi / 2),
    Finger.MIDDLE: ((0.042, 0.008, 0.000), (1.0, 0.0, 0.0),
                    (0.046, 0.028, 0.021), math.pi / 2),
    Finger.RING: ((0.040, -0.010, 0.000), (1.0, 0.0, 0.0),
                  (0.042, 0.026, 0.020), math.pi / 2),
    Finger.PINKY: ((0.036, -0.028, 0.000), (1.0, 0.0, 0.0),
                   (0.033, 0.020, 0.018), math.pi / 2),
}


def default_skeleton(handedness: str = "right") -> HandSkeleton:
    """Five flexion chains at adult-hand proportions, single axis per joint."""
    mirror = -1.0 if handedness == "left" else 1.0
    fingers = {}
    for f, (root, direction, lengths, theta_max) in _FINGER_DEFAULTS.items():
        d = normalize(np.array(direction) * np.array([1.0, mirror, 1.0]))
        r = np.array(root) * np.array([1.0, mirror, 1.0])
        axis = normalize(np.cross(d, np.array([0.0, 0.0, 1.0])))
        joints = []
        offsets = [r, d * lengths[0], d * lengths[1]]
        for off in offsets:
            joints.append(JointSpec(off, axis, 0.0, theta_max))
        fingers[f] = FingerChain(tuple(joints), d * lengths[2])
    return HandSkeleton(fingers, Transform.identity(), handedness)


def default_trigger_layout() -> TriggerLayout:
    triggers = {pid: TriggerSpec() for pid in TRIGGER_PHALANGES}
    return TriggerLayout(triggers)


@dataclass(frozen=True)
class HandConfig:
    skeleton: HandSkeleton
    layout: TriggerLayout
    rate_limit: float = DEFAULT_RATE_LIMIT
    smooth_step: float = DEFAULT_SMOOTH_STEP


def default_hand_config() -> HandConfig:
    return HandConfig(default_skeleton(), default_trigger_layout())


def hand_config_to_dict(cfg: HandConfig) -> dict:
    fingers = {}
    for f, chain in cfg.skeleton.fingers.items():
        fingers[f.value] = {
            "flesh_radius": chain.flesh_radius,
            "joints": [
                {
                    "offset": list(j.offset),
                    "axis": list(j.axis),
                    "range": [j.theta_min, j.theta_max],
                }
                for j in chain.joints
            ],
            "tip": list(chain.tip),
        }
    layout = cfg.layout
    return {
        "handedness": cfg.skeleton.handedness,
        "palm_frame": {
            "rotation_wxyz": list(cfg.skeleton.palm_frame.rotation),
            "translation": list(cfg.skeleton.palm_frame.translation),
        },
        "fingers": fingers,
        "triggers": {
            pid.key: {
                "radius": layout.triggers[pid].radius,
                "length_fraction": layout.triggers[pid].length_fraction,
            }
            for pid in TRIGGER_PHALANGES
        },
        "palm_trigger": {
            "center": list(layout.palm_center),
            "radius": layout.palm_radius,
        },
        "trace": {
            "radius": layout.trace_radius,
            "start_offset": layout.trace_start_offset,
        },
        "rate_limit": cfg.rate_limit,
        "smooth_step": cfg.smooth_step,
    }


def hand_config_from_dict(doc: dict) -> HandConfig:
    fingers = {}
    for fname, fdoc in doc["fingers"].items():
        joints = tuple(
            JointSpec(np.array(j["offset"]), np.array(j["axis"]),
                      float(j["range"][0]), float(j["range"][1]))
            for j in fdoc["joints"]
        )
        fingers[Finger(fname)] = FingerChain(
            joints, np.array(fdoc["tip"]), float(fdoc.get("flesh_radius", 0.007)))
    pf = doc.get("palm_frame", {})
    palm_frame = Transform(
        np.array(pf.get("rotation_wxyz", [1.0, 0.0, 0.0, 0.0])),
        np.array(pf.get("translation", [0.0, 0.0, 0.0])))
    skel = HandSkeleton(fingers, palm_frame, doc.get("handedness", "right"))

    trig_doc = doc.get("triggers", {})
    triggers = {}
    for pid in TRIGGER_PHALANGES:
        tdoc = trig_doc.get(pid.key, {})
        triggers[pid] = TriggerSpec(
            float(tdoc.get("radius", 0.007)),
            float(tdoc.get("length_fraction", 0.8)))
    palm_doc = doc.get("palm_trigger", {})
    trace_doc = doc.get("trace", {})
    start_offset = trace_doc.get("start_offset")
    layout = TriggerLayout(
        triggers,
        np.array(palm_doc.get("center", [0.02, 0.005, 0.01])),
        float(palm_doc.get("radius", 0.06)),
        float(trace_doc.get("radius", 0.0005)),
        None if start_offset is None else float(start_offset),
    )
    return HandConfig(skel, layout,
                      float(doc.get("rate_limit", DEFAULT_RATE_LIMIT)),
                      float(doc.get("smooth_step", DEFAULT_SMOOTH_STEP)))


def load_hand_config(path) -> HandConfig:
    with open(path, "r", encoding="utf-8") as f:
        return hand_config_from_dict(json.load(f))


def save_hand_config(cfg: HandConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(hand_config_to_dict(cfg), f, indent=2)
        f.write("\n")
