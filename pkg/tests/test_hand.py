"""Hand model tests: kinematics, trigger placement, blocking, smoothing."""
import math

import numpy as np
import pytest

from vrgrasp.geometry import Transform
from vrgrasp.hand import (
    CloseCommand,
    Finger,
    FingerChain,
    HandPose,
    HandSkeleton,
    JointSpec,
    PhalanxId,
    Segment,
    TriggerLayout,
    TriggerSpec,
    TRIGGER_PHALANGES,
    advance_pose,
    default_hand_config,
    default_skeleton,
    default_trigger_layout,
    forward_kinematics,
    hand_config_from_dict,
    hand_config_to_dict,
    smooth_deltas,
    trigger_world_placement,
)


def two_link_test_skeleton():
    """Minimal hand whose index finger is the classic planar 2-link chain."""
    fingers = {}
    for f in Finger:
        joints = (
            JointSpec((0.0, 0.0, 0.0), (0.0, 0.0, 1.0), 0.0, math.pi),
            JointSpec((1.0, 0.0, 0.0), (0.0, 0.0, 1.0), 0.0, math.pi),
            JointSpec((1.0, 0.0, 0.0), (0.0, 0.0, 1.0), 0.0, math.pi),
        )
        fingers[f] = FingerChain(joints, (1.0, 0.0, 0.0))
    return HandSkeleton(fingers)


def set_angle(pose, skel, finger, joint, theta):
    angles = pose.angles.copy()
    angles[skel.angle_index(finger, joint)] = theta
    return HandPose(angles, pose.palm)


# ---------------------------------------------------------------------------
# forward kinematics
# ---------------------------------------------------------------------------

def test_fk_identity_pose_sums_offsets():
    skel = default_skeleton()
    frames = forward_kinematics(skel, HandPose.rest())
    for f in Finger:
        chain = skel.fingers[f]
        expect = chain.joints[0].offset + chain.joints[1].offset + chain.joints[2].offset
        got = frames[PhalanxId(f, Segment.DISTAL)].translation
        np.testing.assert_allclose(got, expect, atol=1e-12)
        tip = frames[PhalanxId(f, Segment.DISTAL)].apply_point(chain.tip)
        np.testing.assert_allclose(tip, expect + chain.tip, atol=1e-12)


def test_fk_palm_translation_equivariance():
    skel = default_skeleton()
    t = np.array([0.3, -0.2, 0.9])
    rest = forward_kinematics(skel, HandPose.rest())
    moved = forward_kinematics(skel, HandPose.rest(Transform.from_translation(t)))
    for pid, frame in rest.items():
        np.testing.assert_allclose(moved[pid].translation, frame.translation + t,
                                   atol=1e-12)


def test_fk_two_link_right_angle():
    skel = two_link_test_skeleton()
    pose = set_angle(HandPose.rest(), skel, Finger.INDEX, 0, math.pi / 2)
    frames = forward_kinematics(skel, pose)
    # Rotating the proximal joint by 90 deg about +z maps the child offset x->y.
    np.testing.assert_allclose(
        frames[PhalanxId(Finger.INDEX, Segment.MIDDLE)].translation,
        (0.0, 1.0, 0.0), atol=1e-12)
    np.testing.assert_allclose(
        frames[PhalanxId(Finger.INDEX, Segment.DISTAL)].translation,
        (0.0, 2.0, 0.0), atol=1e-12)


def test_fk_rejects_out_of_range_angle():
    skel = default_skeleton()
    pose = set_angle(HandPose.rest(), skel, Finger.INDEX, 0, -0.5)
    with pytest.raises(ValueError):
        forward_kinematics(skel, pose)


def test_fk_rigidity_within_finger():
    skel = default_skeleton()
    rng = np.random.default_rng(4)
    ref = None
    for _ in range(10):
        angles = rng.uniform(0.0, math.pi / 3, 15)
        frames = forward_kinematics(skel, HandPose(angles))
        dists = []
        for f in Finger:
            o = [frames[PhalanxId(f, s)].translation for s in Segment]
            dists += [np.linalg.norm(o[0] - o[1]), np.linalg.norm(o[1] - o[2]),
                      np.linalg.norm(o[0] - o[2])]
        if ref is None:
            ref = dists
        else:
            sel = [0, 1, 3, 4, 6, 7, 9, 10, 12, 13]  # consecutive-origin pairs
            np.testing.assert_allclose([dists[i] for i in sel for _ in [0]],
                                       [ref[i] for i in sel], atol=1e-9)


# ---------------------------------------------------------------------------
# trigger placement
# ---------------------------------------------------------------------------

def test_triggers_at_rest_follow_segments():
    cfg = default_hand_config()
    trigs, palm = trigger_world_placement(cfg.skeleton, HandPose.rest(), cfg.layout)
    assert len(trigs) == 10
    idx_mid = trigs[PhalanxId(Finger.INDEX, Segment.MIDDLE)]
    chain = cfg.skeleton.fingers[Finger.INDEX]
    base = chain.joints[0].offset + chain.joints[1].offset
    seg = chain.joints[2].offset
    np.testing.assert_allclose(idx_mid.capsule.a, base + 0.1 * seg, atol=1e-12)
    np.testing.assert_allclose(idx_mid.capsule.b, base + 0.9 * seg, atol=1e-12)
    # Reference center sits half way along the bone, one flesh radius palmar.
    np.testing.assert_allclose(
        idx_mid.surface_center,
        base + 0.5 * seg + chain.flesh_radius * np.array([0, 0, 1]), atol=1e-12)
    np.testing.assert_allclose(palm.center, cfg.layout.palm_center, atol=1e-12)


def test_triggers_rotate_rigidly_with_palm():
    cfg = default_hand_config()
    rot = Transform.from_axis_angle((0, 0, 1), math.pi / 2)
    rest, palm0 = trigger_world_placement(cfg.skeleton, HandPose.rest(), cfg.layout)
    turned, palm1 = trigger_world_placement(
        cfg.skeleton, HandPose.rest(rot), cfg.layout)
    for pid in TRIGGER_PHALANGES:
        np.testing.assert_allclose(
            turned[pid].capsule.a, rot.apply_point(rest[pid].capsule.a), atol=1e-12)
        np.testing.assert_allclose(
            turned[pid].surface_center, rot.apply_point(rest[pid].surface_center),
            atol=1e-12)
    np.testing.assert_allclose(palm1.center, rot.apply_point(palm0.center), atol=1e-12)


def test_closing_proximal_moves_child_triggers_only():
    cfg = default_hand_config()
    skel = cfg.skeleton
    rest, palm0 = trigger_world_placement(skel, HandPose.rest(), cfg.layout)
    bent = set_angle(HandPose.rest(), skel, Finger.INDEX, 0, 0.4)
    moved, palm1 = trigger_world_placement(skel, bent, cfg.layout)
    for seg in (Segment.MIDDLE, Segment.DISTAL):
        pid = PhalanxId(Finger.INDEX, seg)
        assert np.linalg.norm(moved[pid].capsule.a - rest[pid].capsule.a) > 1e-4
    for f in (Finger.THUMB, Finger.MIDDLE, Finger.RING, Finger.PINKY):
        pid = PhalanxId(f, Segment.DISTAL)
        np.testing.assert_allclose(moved[pid].capsule.a, rest[pid].capsule.a, atol=1e-12)
    np.testing.assert_allclose(palm1.center, palm0.center, atol=1e-12)


def test_layout_requires_all_ten_triggers():
    triggers = {pid: TriggerSpec() for pid in TRIGGER_PHALANGES[:-1]}
    with pytest.raises(ValueError):
        TriggerLayout(triggers)


# ---------------------------------------------------------------------------
# pose advance and blocking
# ---------------------------------------------------------------------------

def test_advance_saturates_at_full_close():
    skel = default_skeleton()
    pose = advance_pose(skel, HandPose.rest(), CloseCommand(1.0), dt=10.0)
    for f in Finger:
        for j in range(3):
            spec = skel.joint(f, j)
            assert pose.angles[skel.angle_index(f, j)] == pytest.approx(spec.theta_max)


def test_advance_rate_limited():
    skel = default_skeleton()
    cmd = CloseCommand(1.0, rate_limit=1.0)
    pose = advance_pose(skel, HandPose.rest(), cmd, dt=0.1)
    assert np.max(pose.angles) == pytest.approx(0.1)


def test_blocked_phalanx_keeps_angle_and_world_frame():
    skel = default_skeleton()
    blocked = {PhalanxId(Finger.INDEX, Segment.MIDDLE)}
    pose = set_angle(HandPose.rest(), skel, Finger.INDEX, 1, 0.3)
    pose = set_angle(pose, skel, Finger.INDEX, 0, 0.2)
    frame0 = forward_kinematics(skel, pose)[PhalanxId(Finger.INDEX, Segment.MIDDLE)]
    cmd = CloseCommand(1.0)
    for _ in range(5):
        pose = advance_pose(skel, pose, cmd, 1.0 / 90.0, blocked)
    assert pose.angles[skel.angle_index(Finger.INDEX, 1)] == pytest.approx(0.3)
    assert pose.angles[skel.angle_index(Finger.INDEX, 0)] == pytest.approx(0.2)
    # Distal child keeps flexing its own joint while the parent is pinned.
    assert pose.angles[skel.angle_index(Finger.INDEX, 2)] > 0.0
    frame1 = forward_kinematics(skel, pose)[PhalanxId(Finger.INDEX, Segment.MIDDLE)]
    np.testing.assert_allclose(frame1.translation, frame0.translation, atol=1e-12)
    np.testing.assert_allclose(frame1.rotation, frame0.rotation, atol=1e-12)


def test_blocked_joint_released_on_opening_command():
    skel = default_skeleton()
    blocked = {PhalanxId(Finger.INDEX, Segment.MIDDLE)}
    pose = set_angle(HandPose.rest(), skel, Finger.INDEX, 1, 0.3)
    pose = advance_pose(skel, pose, CloseCommand(1.0), 1.0 / 90.0, blocked)
    assert pose.angles[skel.angle_index(Finger.INDEX, 1)] == pytest.approx(0.3)
    for _ in range(200):
        pose = advance_pose(skel, pose, CloseCommand(0.0), 1.0 / 90.0, blocked)
    assert pose.angles[skel.angle_index(Finger.INDEX, 1)] == pytest.approx(0.0)


def test_advance_never_violates_ranges():
    skel = default_skeleton()
    rng = np.random.default_rng(21)
    pose = HandPose.rest()
    for _ in range(200):
        cmd = CloseCommand(float(rng.random()), rate_limit=float(rng.uniform(0.5, 6)))
        blocked = {pid for pid in TRIGGER_PHALANGES if rng.random() < 0.2}
        pose = advance_pose(skel, pose, cmd, float(rng.uniform(0.001, 0.1)), blocked)
        for f in Finger:
            for j in range(3):
                spec = skel.joint(f, j)
                theta = pose.angles[skel.angle_index(f, j)]
                assert spec.theta_min <= theta <= spec.theta_max


# ---------------------------------------------------------------------------
# smoothing
# ---------------------------------------------------------------------------

def test_smooth_noop_when_within_limit():
    skel = default_skeleton()
    prev = HandPose.rest()
    nxt = set_angle(prev, skel, Finger.INDEX, 0, 0.01)
    out = smooth_deltas(prev, nxt, 0.05)
    assert len(out) == 1 and out[0] is nxt


def test_smooth_subdivides_large_jump():
    skel = default_skeleton()
    delta_max = 0.1
    prev = HandPose.rest()
    nxt = set_angle(prev, skel, Finger.INDEX, 0, 0.35)  # 3.5 x delta_max
    out = smooth_deltas(prev, nxt, delta_max)
    assert len(out) == 4
    last = prev
    for p in out:
        assert np.max(np.abs(p.angles - last.angles)) <= delta_max + 1e-12
        last = p
    assert out[-1] is nxt


def test_smooth_identity():
    prev = HandPose.rest()
    out = smooth_deltas(prev, prev, 0.1)
    assert len(out) == 1 and out[0] is prev


def test_smooth_interpolates_palm():
    prev = HandPose.rest()
    nxt = HandPose(np.full(15, 0.5), Transform.from_translation((1.0, 0.0, 0.0)))
    out = smooth_deltas(prev, nxt, 0.1)
    assert len(out) == 5
    np.testing.assert_allclose(out[1].palm.translation, (0.4, 0, 0), atol=1e-12)
    assert out[-1] is nxt


# ---------------------------------------------------------------------------
# config round trip
# ---------------------------------------------------------------------------

def test_hand_config_roundtrip(tmp_path):
    cfg = default_hand_config()
    doc = hand_config_to_dict(cfg)
    back = hand_config_from_dict(doc)
    assert back.skeleton.handedness == cfg.skeleton.handedness
    for f in Finger:
        a = cfg.skeleton.fingers[f]
        b = back.skeleton.fingers[f]
        for ja, jb in zip(a.joints, b.joints):
            np.testing.assert_allclose(ja.offset, jb.offset)
            np.testing.assert_allclose(ja.axis, jb.axis)
            assert (ja.theta_min, ja.theta_max) == (jb.theta_min, jb.theta_max)
        np.testing.assert_allclose(a.tip, b.tip)
    assert back.layout.palm_radius == cfg.layout.palm_radius
    assert back.rate_limit == cfg.rate_limit

    path = tmp_path / "hand.json"
    from vrgrasp.hand import load_hand_config, save_hand_config
    save_hand_config(cfg, path)
    again = load_hand_config(path)
    assert hand_config_to_dict(again) == doc


def test_left_hand_mirrors_defaults():
    left = default_skeleton("left")
    right = default_skeleton("right")
    lr = left.fingers[Finger.THUMB].joints[0].offset
    rr = right.fingers[Finger.THUMB].joints[0].offset
    np.testing.assert_allclose(lr, rr * np.array([1.0, -1.0, 1.0]))
