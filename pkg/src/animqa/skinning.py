"""
Linear blend skinning: pose a rest-pose surface and invert the blend.

Per point the posed position is ``scale * (sum_k w_k A_k x)`` where ``A_k``
carries the rest-pose joint ``k`` to its posed world frame (root translation
included).  Shape blendshapes and pose-corrective offsets are not modelled.
"""
import numpy as np
from scipy.spatial import cKDTree

from .core import PointFrame, global_transforms
from .errors import JointCountMismatch, SingularBlend, WeightRowMismatch

MAX_BLEND_CONDITION = 1e8


def _skinning_transforms(rig, rotations, translations):
    """Rest-to-posed affine transforms ``(..., j, 3, 3)`` and ``(..., j, 3)``."""
    R, t = global_transforms(rig, rotations, translations)
    rest = rig.rest_joints
    # A_k x = R_k (x - rest_k) + t_k
    t = t - np.einsum("...kab,kb->...ka", R, rest)
    return R, t


def _blend(rig, rotations, translations, weights=None):
    w = rig.weights if weights is None else weights
    R, t = _skinning_transforms(rig, rotations, translations)
    M = np.einsum("vk,...kab->...vab", w, R)
    c = np.einsum("vk,...ka->...va", w, t)
    return M, c


def _check_points(rig, points, weights=None):
    points = np.asarray(points, dtype=float)
    rows = len(rig.weights) if weights is None else len(weights)
    if points.ndim != 2 or points.shape[1] != 3:
        raise WeightRowMismatch(f"points must have shape (v, 3), got {points.shape}")
    if len(points) != rows:
        raise WeightRowMismatch(f"{len(points)} points but {rows} skin weight rows")
    return points


def _check_pose(rig, pose):
    if pose.joint_count != rig.joint_count:
        raise JointCountMismatch(
            f"pose has {pose.joint_count} joints, rig has {rig.joint_count}"
        )


def lbs_pose(rig, tpose_points, pose, weights=None):
    """Pose rest-pose points with a :class:`PoseFrame`; returns a PointFrame.

    ``weights`` overrides the rig's skin weights for surfaces that are not in
    template order (see :func:`transfer_weights`).
    """
    points = _check_points(rig, tpose_points, weights)
    _check_pose(rig, pose)
    M, c = _blend(rig, pose.rotations, pose.root_translation, weights)
    posed = np.einsum("vab,vb->va", M, points) + c
    return PointFrame(rig.scale * posed)


def lbs_unpose(rig, posed_points, pose, weights=None):
    """Invert :func:`lbs_pose` point by point.

    Divides by the rig scale, removes the blended translation (which contains
    the root translation) and applies the inverse of each point's blended
    3x3 matrix.  Raises SingularBlend when any blended matrix has a condition
    number above 1e8.
    """
    if isinstance(posed_points, PointFrame):
        posed_points = posed_points.points
    points = _check_points(rig, posed_points, weights)
    _check_pose(rig, pose)
    M, c = _blend(rig, pose.rotations, pose.root_translation, weights)
    cond = np.linalg.cond(M)
    if not np.all(np.isfinite(cond)) or np.max(cond) > MAX_BLEND_CONDITION:
        raise SingularBlend(
            f"blended transform is ill-conditioned (max condition {np.max(cond):.3g})"
        )
    return np.linalg.solve(M, (points / rig.scale - c)[..., None])[..., 0]


def skin_sequence(rig, rotations, translations, points=None):
    """Pose ``points`` (default: the rig template) for every frame at once.

    Returns an ``(n, v, 3)`` array.
    """
    pts = rig.template if points is None else np.asarray(points, dtype=float)
    M, c = _blend(rig, rotations, translations)
    if pts.ndim == 2:
        posed = np.einsum("nvab,vb->nva", M, pts)
    else:
        posed = np.einsum("nvab,nvb->nva", M, pts)
    return rig.scale * (posed + c)


def unpose_sequence(rig, posed, rotations, translations):
    """Vectorised :func:`lbs_unpose` over ``(n, v, 3)`` posed points."""
    posed = np.asarray(posed, dtype=float)
    if posed.shape[-2] != len(rig.weights):
        raise WeightRowMismatch(
            f"{posed.shape[-2]} points but the rig has {len(rig.weights)} weight rows"
        )
    M, c = _blend(rig, rotations, translations)
    cond = np.linalg.cond(M)
    if not np.all(np.isfinite(cond)) or np.max(cond) > MAX_BLEND_CONDITION:
        raise SingularBlend(
            f"blended transform is ill-conditioned (max condition {np.max(cond):.3g})"
        )
    return np.linalg.solve(M, (posed / rig.scale - c)[..., None])[..., 0]


def nearest_correspondence(surface_points, fitted_points):
    """Index of the closest fitted point for every surface point.

    Used to carry skin weights onto scans whose points are not in template
    order; the result can be passed to :func:`transfer_weights`.
    """
    tree = cKDTree(np.asarray(fitted_points, dtype=float))
    _, idx = tree.query(np.asarray(surface_points, dtype=float))
    return idx


def transfer_weights(rig, correspondence):
    """Skin weights for an external surface given per-point template indices."""
    return rig.weights[np.asarray(correspondence)]
