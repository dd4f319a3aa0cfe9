"""
Parametric distortions of a pose sequence and their transfer to the surface.

Each distortion edits root translations, joint rotations or the frame set.
:func:`apply_distortion` then unposes every reference surface frame with the
reference pose and reposes it with the distorted one.
"""
import json
import math
import warnings
from functools import lru_cache
from importlib import resources

import numpy as np

from .core import (
    DISTORTION_KINDS,
    AnimationSequence,
    DistortionSpec,
    PointFrame,
    PoseFrame,
    pose_with_positions,
)
from .errors import (
    InvalidJointIndex,
    InvalidStrength,
    TooFewFramesRemaining,
    WeightRowMismatch,
)
from .skinning import (
    lbs_pose,
    lbs_unpose,
    nearest_correspondence,
    skin_sequence,
    transfer_weights,
    unpose_sequence,
)
from .synth import DEFAULT_INTERSECTION_JOINTS, DEFAULT_TWIST_JOINTS

IDENTITY_STRENGTH = {
    "FootGlide": 1.0,
    "Moonwalk": 1.0,
    "FootContact": 0.0,
    "Smoothness": 0.0,
    "TemporalTwist": 0.0,
    "SelfIntersection": 0.0,
}
TWIST_WINDOW = (1.0 / 3.0, 2.0 / 3.0)
MIN_FRAMES_AFTER_DELETION = 4
VERTICAL = np.array([0.0, 0.0, 1.0])


@lru_cache(maxsize=None)
def _catalogs():
    text = resources.files("animqa").joinpath("data/catalogs.json").read_text()
    return json.loads(text)


def catalog_names():
    return tuple(_catalogs())


def load_catalog(name="pilot"):
    """Strength levels per distortion kind, ordered from mild to severe.

    ``"pilot"`` holds the 46 pilot-study levels, ``"main"`` the five levels per
    kind used for the training grid.
    """
    cats = _catalogs()
    if name not in cats:
        raise KeyError(f"unknown catalog {name!r}; available: {sorted(cats)}")
    return {kind: list(cats[name][kind]) for kind in DISTORTION_KINDS}


def strength_range(kind):
    """Smallest interval holding every catalogued strength and the identity."""
    values = [IDENTITY_STRENGTH[kind]]
    for cat in _catalogs().values():
        values += cat[kind]
    return min(values), max(values)


def _check_range(kind, strength):
    lo, hi = strength_range(kind)
    if not lo <= strength <= hi:
        warnings.warn(
            f"{kind} strength {strength} is outside the catalogued range [{lo}, {hi}]",
            stacklevel=3,
        )


def distort_footskate(pose, K):
    """Scale every root translation by ``K`` (>1 glides, <1 moonwalks)."""
    K = float(K)
    if not (np.isfinite(K) and K > 0):
        raise InvalidStrength(f"footskate factor must be positive, got {K}")
    return pose.replace(translations=pose.translations * K, joint_positions=None)


def distort_foot_contact(pose, L_z):
    """Lift (or sink) the root by ``L_z`` metres on the vertical axis."""
    L_z = float(L_z)
    if not np.isfinite(L_z):
        raise InvalidStrength("foot contact offset must be finite")
    return pose.replace(
        translations=pose.translations + np.array([0.0, 0.0, L_z]), joint_positions=None
    )


def smoothness_keep_indices(n, S, seed):
    """Frames surviving deletion of ``floor(S * n)`` random interior frames.

    One seeded permutation of the interior frames decides the deletion order,
    so for a fixed seed a larger ``S`` deletes a superset of frames.  The first
    and last frames always survive.
    """
    S = float(S)
    if not 0.0 <= S < 1.0:
        raise InvalidStrength(f"smoothness strength must be in [0, 1), got {S}")
    m = math.floor(S * n + 1e-9)
    if m > n - 2 or n - m < MIN_FRAMES_AFTER_DELETION:
        raise TooFewFramesRemaining(
            f"deleting {m} of {n} frames leaves fewer than {MIN_FRAMES_AFTER_DELETION}"
        )
    order = np.random.default_rng(seed).permutation(np.arange(1, n - 1))
    return np.setdiff1d(np.arange(n), order[:m])


def distort_smoothness(pose, S, seed=0):
    """Randomly delete frames; survivors keep their original timestamps."""
    return pose.subset(smoothness_keep_indices(len(pose), S, seed))


def twist_envelope(n, window=TWIST_WINDOW):
    """Triangular 0..1..0 weights over normalised time inside ``window``."""
    start, end = window
    if not 0.0 <= start < end <= 1.0:
        raise ValueError(f"bad twist window {window}")
    u = np.arange(n) / (n - 1)
    mid, half = 0.5 * (start + end), 0.5 * (end - start)
    env = 1.0 - np.abs(u - mid) / half
    env[(u <= start) | (u >= end)] = 0.0
    return np.clip(env, 0.0, 1.0)


def _resolve_joints(pose, joints, defaults):
    if joints is None:
        joints = [j for j in defaults if j < pose.joint_count] or [pose.joint_count - 1]
    joints = [int(j) for j in joints]
    if not joints:
        raise InvalidJointIndex("no target joints given")
    bad = [j for j in joints if not 0 <= j < pose.joint_count]
    if bad:
        raise InvalidJointIndex(f"joint indices {bad} out of range for {pose.joint_count} joints")
    return sorted(set(joints))


def add_rotation_angle(rotvec, amount):
    """Increase axis-angle rotations by ``amount`` radians about their own axis.

    Zero rotations are turned about the vertical axis.
    """
    rotvec = np.asarray(rotvec, dtype=float)
    amount = np.asarray(amount, dtype=float)
    angle = np.linalg.norm(rotvec, axis=-1)
    safe = np.where(angle > 0, angle, 1.0)
    axis = np.where(angle[..., None] > 0, rotvec / safe[..., None], VERTICAL)
    out = axis * (angle + amount)[..., None]
    # zero increments leave rotations bit-identical (no renormalisation)
    return np.where((amount == 0)[..., None], rotvec, out)


def _perturb(pose, joints, amounts):
    rot = np.array(pose.rotations)
    for j in joints:
        rot[:, j] = add_rotation_angle(rot[:, j], amounts)
    return pose.replace(rotations=rot, joint_positions=None)


def distort_twist(pose, alpha, joints=None, window=TWIST_WINDOW):
    """Twist target joints by up to ``alpha`` radians mid-sequence.

    The extra angle ramps linearly from 0 at the window start to ``alpha`` at
    its centre and back to 0; frames outside the window are untouched.
    """
    alpha = float(alpha)
    if not np.isfinite(alpha):
        raise InvalidStrength("twist angle must be finite")
    joints = _resolve_joints(pose, joints, DEFAULT_TWIST_JOINTS)
    if alpha == 0.0:
        return pose
    return _perturb(pose, joints, alpha * twist_envelope(len(pose), window))


def distort_self_intersection(pose, delta, joints=None):
    """Rotate target joints by a constant extra ``delta`` radians in every frame."""
    delta = float(delta)
    if not np.isfinite(delta):
        raise InvalidStrength("self-intersection angle must be finite")
    joints = _resolve_joints(pose, joints, DEFAULT_INTERSECTION_JOINTS)
    if delta == 0.0:
        return pose
    return _perturb(pose, joints, np.full(len(pose), delta))


def distort_pose(pose, spec, window=TWIST_WINDOW):
    """Apply ``spec`` to a pose sequence (joint positions are dropped)."""
    _check_range(spec.kind, spec.strength)
    if spec.kind in ("FootGlide", "Moonwalk"):
        return distort_footskate(pose, spec.strength)
    if spec.kind == "FootContact":
        return distort_foot_contact(pose, spec.strength)
    if spec.kind == "Smoothness":
        return distort_smoothness(pose, spec.strength, spec.seed)
    if spec.kind == "TemporalTwist":
        return distort_twist(pose, spec.strength, spec.joints, window)
    return distort_self_intersection(pose, spec.strength, spec.joints)


def _repose_frame(rig, points, ref_frame, gen_frame):
    """Unpose one surface frame with the reference pose, repose with the new one."""
    if len(points) == len(rig.weights):
        weights = None
    else:
        fitted = lbs_pose(rig, rig.template, ref_frame).points
        weights = transfer_weights(rig, nearest_correspondence(points, fitted))
    rest = lbs_unpose(rig, points, ref_frame, weights)
    return lbs_pose(rig, rest, gen_frame, weights).points


def apply_distortion(rig, ref_anim, ref_pose, spec, window=TWIST_WINDOW):
    """Distort a reference animation; returns ``(animation, pose)``.

    Surfaces in template order are transferred directly; other surfaces get
    skin weights from their nearest point on the fitted template each frame.
    The returned pose has joint positions from forward kinematics.
    """
    if isinstance(spec, dict):
        spec = DistortionSpec.from_dict(spec)
    if len(ref_anim) != len(ref_pose):
        raise WeightRowMismatch(
            f"animation has {len(ref_anim)} frames but the pose has {len(ref_pose)}"
        )
    gen_pose = pose_with_positions(rig, distort_pose(ref_pose, spec, window))

    if spec.kind == "Smoothness":
        keep = smoothness_keep_indices(len(ref_pose), spec.strength, spec.seed)
        return ref_anim.subset(keep), gen_pose

    faces = [f.faces for f in ref_anim.frames]
    if all(len(f) == len(rig.weights) for f in ref_anim.frames):
        stack = np.stack([f.points for f in ref_anim.frames])
        rest = unpose_sequence(rig, stack, ref_pose.rotations, ref_pose.translations)
        posed = skin_sequence(rig, gen_pose.rotations, gen_pose.translations, rest)
    else:
        posed = [
            _repose_frame(
                rig,
                ref_anim.frames[i].points,
                PoseFrame(ref_pose.rotations[i], ref_pose.translations[i]),
                PoseFrame(gen_pose.rotations[i], gen_pose.translations[i]),
            )
            for i in range(len(ref_anim))
        ]
    frames = tuple(PointFrame(p, fc) for p, fc in zip(posed, faces))
    return AnimationSequence(frames, ref_anim.fps, ref_anim.times), gen_pose
