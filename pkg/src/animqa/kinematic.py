"""
Skeleton and motion features f3-f7 and the log dimensionless jerk.

Pose-based features compare frames paired by :func:`animqa.spatial.align_indices`,
so a generated sequence that lost frames is compared on the reference grid
with each missing frame replaced by the nearest surviving one.
"""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .core import FeatureVector
from .errors import (
    AllJointsDegenerate,
    DegenerateDuration,
    DegeneratePath,
    JointCountMismatch,
    TooFewFrames,
)
from .spatial import _as_points, aligned_pairs, frame_pair_distances, nn_sq_distances

PATH_EPSILON = 1e-9
JERK_FLOOR = 1e-12
LDLJ_CEILING = 69.0


@dataclass(frozen=True)
class JointTrajectory:
    positions: np.ndarray
    fps: float

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim == 1:
            pos = pos[:, None]
        if not np.all(np.isfinite(pos)):
            raise ValueError("trajectory contains non-finite positions")
        if not self.fps > 0:
            raise DegenerateDuration(f"fps must be positive, got {self.fps}")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "fps", float(self.fps))

    def __len__(self):
        return len(self.positions)


def third_derivative(x, h):
    """Third derivative of uniformly sampled ``x`` (time along axis 0).

    Interior samples use the 5-point central stencil, the two samples at
    each end the 5-point one-sided stencils; all are second-order accurate
    and exact for quartics.  Four samples fall back to the single
    first-order difference.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 4:
        raise TooFewFrames(f"a third derivative needs at least 4 samples, got {n}")
    if n == 4:
        d = (x[3] - 3 * x[2] + 3 * x[1] - x[0]) / h**3
        return np.broadcast_to(d, x.shape).copy()
    j = np.empty_like(x)
    j[2:-2] = (x[4:] - 2 * x[3:-1] + 2 * x[1:-3] - x[:-4]) / (2 * h**3)
    # one-sided stencils over the first five samples, evaluated at sample 0 and 1
    edge = np.array([[-2.5, 9.0, -12.0, 7.0, -1.5], [-1.5, 5.0, -6.0, 3.0, -0.5]])
    for i in (0, 1):
        j[i] = np.tensordot(edge[i], x[:5], axes=1) / h**3
        j[n - 1 - i] = -np.tensordot(edge[i], x[::-1][:5], axes=1) / h**3
    return j


def path_length(positions):
    positions = np.asarray(positions, dtype=float)
    return float(np.linalg.norm(np.diff(positions, axis=0), axis=-1).sum())


def ldlj(traj, fps=None):
    """Log dimensionless jerk of a uniformly sampled trajectory.

    ``-ln((t2 - t1)^5 / L^2 * integral |x'''|^2 dt)`` with the jerk from
    :func:`third_derivative`, the integral by the trapezoid rule and ``L`` the
    polyline length.  Higher is smoother.  A jerk integral below 1e-12 returns
    69.0 instead of +inf.

    ``traj`` is a :class:`JointTrajectory` or a position array with ``fps``.
    """
    if not isinstance(traj, JointTrajectory):
        traj = JointTrajectory(traj, fps)
    x = traj.positions
    if len(x) < 4:
        raise TooFewFrames(f"LDLJ needs at least 4 frames, got {len(x)}")
    length = path_length(x)
    if length <= PATH_EPSILON:
        raise DegeneratePath(f"path length {length:.3g} m: the joint is stationary")
    h = 1.0 / traj.fps
    jerk = third_derivative(x, h)
    t = np.arange(len(x)) * h
    integral = float(trapezoid((jerk**2).sum(axis=-1), t))
    if integral < JERK_FLOOR:
        return LDLJ_CEILING
    duration = t[-1] - t[0]
    return float(-np.log(duration**5 / length**2 * integral))


def _check_joints(ref, gen):
    if ref.joint_count != gen.joint_count:
        raise JointCountMismatch(
            f"reference has {ref.joint_count} joints, generated has {gen.joint_count}"
        )


def foot_contact_feature(ref, gen, align=True):
    """f3: mean distance between root translations of paired frames (m)."""
    ia, ib = aligned_pairs(ref, gen, align)
    d = ref.translations[ia] - gen.translations[ib]
    return float(np.linalg.norm(d, axis=-1).mean())


def global_translation_feature(ref, gen, align=True):
    """f4: mean distance between root-joint world positions of paired frames (m)."""
    ia, ib = aligned_pairs(ref, gen, align)
    p = ref.require_positions()[ia, 0] - gen.require_positions()[ib, 0]
    return float(np.linalg.norm(p, axis=-1).mean())


def mean_nn_distance(a, b):
    """Symmetric mean nearest-neighbour distance between two point frames."""
    a, b = _as_points(a), _as_points(b)
    ab = np.sqrt(nn_sq_distances(a, b))
    ba = np.sqrt(nn_sq_distances(b, a))
    return 0.5 * (ab.mean() + ba.mean())


def velocity_term(anim):
    """Mean consecutive-frame NN distance divided by the sequence duration."""
    cached = anim.__dict__.get("_velocity_term")
    if cached is not None:
        return cached
    if anim.duration <= 0:
        raise DegenerateDuration(f"duration is {anim.duration} s")
    d = [mean_nn_distance(anim.frames[i], anim.frames[i + 1]) for i in range(len(anim) - 1)]
    value = float(np.mean(d)) / anim.duration
    # sequences are immutable, so the term can live on the instance
    object.__setattr__(anim, "_velocity_term", value)
    return value


def velocity_feature(ref, gen):
    """f5: absolute difference of the two sequences' velocity terms.

    Each term is internal to its own sequence, so frame counts may differ.
    """
    return abs(velocity_term(ref) - velocity_term(gen))


def _joint_ldlj(positions, fps, k):
    try:
        return ldlj(positions[:, k], fps)
    except DegeneratePath:
        return None


def joint_ldlj_differences(ref, gen, align=True):
    """Per-joint ``LDLJ_ref - LDLJ_gen`` on the paired frame grid.

    Returns ``(differences, skipped)``: joints whose trajectory is stationary
    in either sequence are left out of ``differences`` and listed in
    ``skipped``.
    """
    _check_joints(ref, gen)
    if len(ref) < 4 or len(gen) < 4:
        raise TooFewFrames("smoothness needs at least 4 frames in each sequence")
    ia, ib = aligned_pairs(ref, gen, align)
    pr = ref.require_positions()[ia]
    pg = gen.require_positions()[ib]
    fps = ref.fps if len(ref) >= len(gen) else gen.fps
    diffs, skipped = [], []
    for k in range(ref.joint_count):
        a = _joint_ldlj(pr, fps, k)
        b = _joint_ldlj(pg, fps, k)
        if a is None or b is None:
            skipped.append(k)
        else:
            diffs.append(a - b)
    if not diffs:
        raise AllJointsDegenerate("every joint is stationary in at least one sequence")
    return np.array(diffs), skipped


def smoothness_feature(ref, gen, signed=False, align=True):
    """f6: mean per-joint LDLJ difference, as a magnitude unless ``signed``."""
    diffs, _ = joint_ldlj_differences(ref, gen, align)
    value = float(diffs.mean())
    return value if signed else abs(value)


def mpjpe_feature(ref, gen, align=True):
    """f7: mean per-joint position error over paired frames (m)."""
    _check_joints(ref, gen)
    ia, ib = aligned_pairs(ref, gen, align)
    d = ref.require_positions()[ia] - gen.require_positions()[ib]
    return float(np.linalg.norm(d, axis=-1).mean())


def extract_features(ref_anim, gen_anim, ref_pose, gen_pose, align=True):
    """Assemble f1-f7 for one reference/generated pair.

    A failing component re-raises its own error with a ``feature`` attribute
    naming which feature failed.
    """

    def run(name, fn, *args):
        try:
            return fn(*args)
        except Exception as exc:
            exc.feature = name
            raise

    cham, haus = run("f1/f2", frame_pair_distances, ref_anim, gen_anim, align)
    return FeatureVector(
        f1=float(cham.mean()),
        f2=float(haus.mean()),
        f3=run("f3", foot_contact_feature, ref_pose, gen_pose, align),
        f4=run("f4", global_translation_feature, ref_pose, gen_pose, align),
        f5=run("f5", velocity_feature, ref_anim, gen_anim),
        f6=run("f6", smoothness_feature, ref_pose, gen_pose, False, align),
        f7=run("f7", mpjpe_feature, ref_pose, gen_pose, align),
    )


__all__ = [
    "JointTrajectory",
    "extract_features",
    "foot_contact_feature",
    "global_translation_feature",
    "joint_ldlj_differences",
    "ldlj",
    "mean_nn_distance",
    "mpjpe_feature",
    "path_length",
    "smoothness_feature",
    "third_derivative",
    "velocity_feature",
    "velocity_term",
]
