"""
Deterministic synthetic walking character.

A capsule-skinned humanoid (z up, walking along +x) that stands in for an
acquired scan sequence.  The same seed always produces bit-identical output.
"""
import numpy as np

from .core import AnimationSequence, PointFrame, PoseSequence, SkinnedRig, pose_with_positions
from .errors import InvalidParameter
from .skinning import skin_sequence

# name, parent, rest offset from parent (m), capsule radius of the bone ending here (m)
SKELETON = (
    ("pelvis", -1, (0.0, 0.0, 0.95), 0.11),
    ("l_hip", 0, (0.0, 0.10, -0.06), 0.07),
    ("r_hip", 0, (0.0, -0.10, -0.06), 0.07),
    ("l_knee", 1, (0.0, 0.0, -0.42), 0.065),
    ("r_knee", 2, (0.0, 0.0, -0.42), 0.065),
    ("spine", 0, (0.0, 0.0, 0.22), 0.12),
    ("l_ankle", 3, (0.0, 0.0, -0.40), 0.05),
    ("r_ankle", 4, (0.0, 0.0, -0.40), 0.05),
    ("chest", 5, (0.0, 0.0, 0.22), 0.13),
    ("l_shoulder", 8, (0.0, 0.20, 0.06), 0.05),
    ("r_shoulder", 8, (0.0, -0.20, 0.06), 0.05),
    ("l_elbow", 9, (0.0, 0.0, -0.28), 0.045),
    ("r_elbow", 10, (0.0, 0.0, -0.28), 0.045),
    ("head", 8, (0.0, 0.0, 0.20), 0.09),
    ("l_wrist", 11, (0.0, 0.0, -0.25), 0.035),
    ("r_wrist", 12, (0.0, 0.0, -0.25), 0.035),
    ("l_toe", 6, (0.14, 0.0, -0.05), 0.035),
    ("r_toe", 7, (0.14, 0.0, -0.05), 0.035),
)
JOINT_NAMES = tuple(s[0] for s in SKELETON)
MAX_JOINTS = len(SKELETON)
TORSO_JOINTS = (5, 8)  # bones pelvis->spine and spine->chest
DEFAULT_TWIST_JOINTS = (3, 4, 6, 7)  # knees and ankles
DEFAULT_INTERSECTION_JOINTS = (11, 12)  # elbows


def _rig(joint_count, rng, points_per_bone, scale):
    parents = np.array([SKELETON[k][1] for k in range(joint_count)])
    lengths = rng.uniform(0.95, 1.05, size=joint_count)
    lengths[0] = 1.0
    offsets = np.array([SKELETON[k][2] for k in range(joint_count)]) * lengths[:, None]
    rest = np.zeros((joint_count, 3))
    rest[0] = offsets[0]
    for k in range(1, joint_count):
        rest[k] = rest[parents[k]] + offsets[k]

    pts, wts = [], []
    # pelvis blob, rigid to the root
    d = rng.normal(size=(points_per_bone, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    pts.append(rest[0] + SKELETON[0][3] * d * np.array([0.8, 1.0, 0.7]))
    w = np.zeros((points_per_bone, joint_count))
    w[:, 0] = 1.0
    wts.append(w)

    for k in range(1, joint_count):
        p = parents[k]
        a, b = rest[p], rest[k]
        axis = (b - a) / np.linalg.norm(b - a)
        helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 0.0, 1.0])
        e1 = np.cross(axis, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(axis, e1)
        u = rng.uniform(0.0, 1.0, size=points_per_bone)
        phi = rng.uniform(0.0, 2 * np.pi, size=points_per_bone)
        r = SKELETON[k][3] * rng.uniform(0.9, 1.0, size=points_per_bone)
        ring = r[:, None] * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2)
        pts.append(a + u[:, None] * (b - a) + ring)

        # the bone p->k follows joint p; blend towards k near its far end and
        # towards p's parent near its near end
        w = np.zeros((points_per_bone, joint_count))
        to_child = 0.5 * np.clip((u - 0.75) / 0.25, 0.0, 1.0)
        to_grand = 0.5 * np.clip((0.25 - u) / 0.25, 0.0, 1.0) if p > 0 else np.zeros_like(u)
        w[:, k] += to_child
        if p > 0:
            w[:, parents[p]] += to_grand
        w[:, p] += 1.0 - to_child - to_grand
        wts.append(w)

    return SkinnedRig(np.concatenate(pts), parents, offsets, np.concatenate(wts), scale)


def _walk(joint_count, t, rng, cycle_hz):
    w = 2 * np.pi * cycle_hz
    phase = rng.uniform(0.0, 2 * np.pi)
    amp = rng.uniform(0.9, 1.1)
    speed = rng.uniform(1.1, 1.3)
    s = np.sin(w * t + phase)
    c = np.cos(w * t + phase)
    zero = np.zeros_like(t)

    def about(x=zero, y=zero, z=zero):
        return np.stack([x + zero, y + zero, z + zero], axis=-1)

    table = {
        "pelvis": about(z=0.05 * amp * s),
        "l_hip": about(y=0.45 * amp * s),
        "r_hip": about(y=-0.45 * amp * s),
        "l_knee": about(y=0.3 + 0.25 * amp * c),
        "r_knee": about(y=0.3 - 0.25 * amp * c),
        "spine": about(z=0.08 * amp * s),
        "l_ankle": about(y=0.15 + 0.1 * amp * s),
        "r_ankle": about(y=0.15 - 0.1 * amp * s),
        "chest": about(z=-0.06 * amp * s),
        "l_shoulder": about(x=-0.12, y=-0.35 * amp * s),
        "r_shoulder": about(x=0.12, y=0.35 * amp * s),
        "l_elbow": about(x=-0.25, y=0.1 + 0.05 * amp * s),
        "r_elbow": about(x=0.25, y=0.1 - 0.05 * amp * s),
        "head": about(z=0.05 * amp * c),
        "l_wrist": about(y=0.05 * amp * s),
        "r_wrist": about(y=-0.05 * amp * s),
        "l_toe": about(y=0.1 + 0.08 * amp * c),
        "r_toe": about(y=0.1 - 0.08 * amp * c),
    }
    rotations = np.stack([table[JOINT_NAMES[k]] for k in range(joint_count)], axis=1)
    gamma = np.stack(
        [speed * t, 0.02 * amp * np.sin(w * t + phase), 0.015 * amp * np.sin(2 * (w * t + phase))],
        axis=-1,
    )
    gamma -= gamma[0]
    gamma[:, 0] = speed * t  # keep the forward advance exactly linear
    return rotations, gamma


def synth_walk_rig(
    joint_count=MAX_JOINTS,
    cycle_hz=1.0,
    frame_count=60,
    fps=30.0,
    seed=0,
    scale=1.0,
    points_per_bone=40,
):
    """Build a seeded walking character.

    Parameters
    ----------
    joint_count : int
        Number of joints, 2 to 18.  Smaller rigs keep a prefix of the full
        humanoid skeleton (parents always precede children).
    cycle_hz : float
        Gait cycle frequency.
    frame_count, fps : int, float
        Sampling of the generated sequence.
    seed : int
        Controls limb proportions, gait phase/amplitude, walking speed and
        surface sampling.
    scale : float
        Global rig scale applied to the posed surface and joint positions.

    Returns
    -------
    rig : SkinnedRig
    pose : PoseSequence
        With joint positions filled in.
    anim : AnimationSequence
        The skinned surface of ``pose``.
    """
    if not 2 <= int(joint_count) <= MAX_JOINTS:
        raise InvalidParameter(f"joint_count must be in [2, {MAX_JOINTS}], got {joint_count}")
    if int(frame_count) < 2:
        raise InvalidParameter(f"frame_count must be at least 2, got {frame_count}")
    if not (fps > 0 and cycle_hz > 0 and scale > 0 and points_per_bone >= 1):
        raise InvalidParameter("fps, cycle_hz, scale and points_per_bone must be positive")
    joint_count, frame_count = int(joint_count), int(frame_count)
    rng = np.random.default_rng(seed)
    rig = _rig(joint_count, rng, int(points_per_bone), scale)
    t = np.arange(frame_count) / float(fps)
    rotations, gamma = _walk(joint_count, t, rng, cycle_hz)
    pose = pose_with_positions(rig, PoseSequence(rotations, gamma, fps))
    surface = skin_sequence(rig, rotations, gamma)
    anim = AnimationSequence(tuple(PointFrame(f) for f in surface), fps)
    return rig, pose, anim
