"""
Domain types for reference/distorted animation pairs.

Everything here is immutable once constructed: array fields are copied on the
way in and flagged read-only.  Coordinates are metres, times are seconds and
the vertical axis is +z.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    EmptyFrame,
    EmptySequence,
    InvalidParameter,
    JointCountMismatch,
    MalformedInput,
    MissingJointPositions,
    NonFiniteCoordinate,
)

FEATURE_NAMES = ("f1", "f2", "f3", "f4", "f5", "f6", "f7")
DISTORTION_KINDS = (
    "FootGlide",
    "Moonwalk",
    "FootContact",
    "Smoothness",
    "TemporalTwist",
    "SelfIntersection",
)


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise NonFiniteCoordinate(f"{what} contains NaN or infinite values")


def _uniform_times(n, fps):
    return np.arange(n, dtype=float) / float(fps)


def _check_times(times, n):
    if times.shape != (n,):
        raise MalformedInput(f"expected {n} timestamps, got shape {times.shape}")
    _check_finite(times, "timestamps")
    if n > 1 and np.any(np.diff(times) <= 0):
        raise MalformedInput("timestamps must be strictly increasing")


def axis_angle_to_matrix(rotvec):
    """Rodrigues' formula, vectorised over leading dimensions.

    ``rotvec[..., 3]`` holds axis * angle in radians; returns ``[..., 3, 3]``.
    """
    rotvec = np.asarray(rotvec, dtype=float)
    angle = np.linalg.norm(rotvec, axis=-1)
    safe = np.where(angle > 0, angle, 1.0)
    k = rotvec / safe[..., None]
    kx, ky, kz = k[..., 0], k[..., 1], k[..., 2]
    zero = np.zeros_like(kx)
    K = np.stack(
        [
            np.stack([zero, -kz, ky], axis=-1),
            np.stack([kz, zero, -kx], axis=-1),
            np.stack([-ky, kx, zero], axis=-1),
        ],
        axis=-2,
    )
    s = np.sin(angle)[..., None, None]
    c = np.cos(angle)[..., None, None]
    eye = np.broadcast_to(np.eye(3), K.shape)
    return eye + s * K + (1.0 - c) * (K @ K)


@dataclass(frozen=True)
class PointFrame:
    """One scan: an ``(m, 3)`` point array and optional triangle indices."""

    points: np.ndarray
    faces: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise MalformedInput(f"points must have shape (m, 3), got {pts.shape}")
        if len(pts) == 0:
            raise EmptyFrame("frame has no points")
        _check_finite(pts, "points")
        object.__setattr__(self, "points", pts)
        if self.faces is not None:
            faces = _frozen(self.faces, dtype=np.int64)
            if faces.ndim != 2 or faces.shape[1] != 3:
                raise MalformedInput(f"faces must have shape (k, 3), got {faces.shape}")
            if faces.size and (faces.min() < 0 or faces.max() >= len(pts)):
                raise MalformedInput("face index out of range")
            object.__setattr__(self, "faces", faces)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class AnimationSequence:
    """Ordered surface frames sampled at ``fps``.

    ``times`` defaults to ``i / fps``.  Frame deletion keeps the survivors'
    original timestamps, so ``duration`` is measured from them and equals
    ``(n - 1) / fps`` only for uniformly sampled sequences.
    """

    frames: tuple
    fps: float = 30.0
    times: Optional[np.ndarray] = None

    def __post_init__(self):
        frames = tuple(f if isinstance(f, PointFrame) else PointFrame(f) for f in self.frames)
        if len(frames) < 2:
            raise EmptySequence(f"an animation needs at least 2 frames, got {len(frames)}")
        if not (np.isfinite(self.fps) and self.fps > 0):
            raise InvalidParameter(f"fps must be positive, got {self.fps}")
        times = _uniform_times(len(frames), self.fps) if self.times is None else self.times
        times = _frozen(times)
        _check_times(times, len(frames))
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "fps", float(self.fps))
        object.__setattr__(self, "times", times)

    def __len__(self):
        return len(self.frames)

    @property
    def frame_count(self):
        return len(self.frames)

    @property
    def duration(self):
        return float(self.times[-1] - self.times[0])

    def subset(self, indices):
        indices = list(indices)
        return AnimationSequence(
            tuple(self.frames[i] for i in indices), self.fps, self.times[indices]
        )

    def translated(self, offset):
        offset = np.asarray(offset, dtype=float)
        return AnimationSequence(
            tuple(PointFrame(f.points + offset, f.faces) for f in self.frames),
            self.fps,
            self.times,
        )

    def scaled(self, factor):
        return AnimationSequence(
            tuple(PointFrame(f.points * factor, f.faces) for f in self.frames),
            self.fps,
            self.times,
        )


@dataclass(frozen=True)
class PoseFrame:
    rotations: np.ndarray
    root_translation: np.ndarray
    joint_positions: Optional[np.ndarray] = None

    def __post_init__(self):
        rot = _frozen(self.rotations)
        if rot.ndim != 2 or rot.shape[1] != 3:
            raise MalformedInput(f"rotations must have shape (j, 3), got {rot.shape}")
        _check_finite(rot, "rotations")
        gamma = _frozen(self.root_translation)
        if gamma.shape != (3,):
            raise MalformedInput("root_translation must be a 3-vector")
        _check_finite(gamma, "root_translation")
        object.__setattr__(self, "rotations", rot)
        object.__setattr__(self, "root_translation", gamma)
        if self.joint_positions is not None:
            pos = _frozen(self.joint_positions)
            if pos.shape != rot.shape:
                raise JointCountMismatch("joint_positions must match rotations")
            object.__setattr__(self, "joint_positions", pos)

    @property
    def joint_count(self):
        return len(self.rotations)


@dataclass(frozen=True)
class PoseSequence:
    """Per-frame skeletal pose stored as stacked arrays.

    ``rotations`` is ``(n, j, 3)`` axis-angle, ``translations`` is ``(n, 3)``
    (the root translation) and ``joint_positions`` is ``(n, j, 3)`` world
    positions, or ``None`` until forward kinematics has been run with a rig.
    """

    rotations: np.ndarray
    translations: np.ndarray
    fps: float = 30.0
    joint_positions: Optional[np.ndarray] = None
    times: Optional[np.ndarray] = None

    def __post_init__(self):
        rot = _frozen(self.rotations)
        if rot.ndim != 3 or rot.shape[2] != 3 or rot.shape[1] < 1:
            raise MalformedInput(f"rotations must have shape (n, j, 3), got {rot.shape}")
        n = rot.shape[0]
        if n < 2:
            raise EmptySequence(f"a pose sequence needs at least 2 frames, got {n}")
        _check_finite(rot, "rotations")
        gamma = _frozen(self.translations)
        if gamma.shape != (n, 3):
            raise MalformedInput(f"translations must have shape ({n}, 3), got {gamma.shape}")
        _check_finite(gamma, "translations")
        if not (np.isfinite(self.fps) and self.fps > 0):
            raise InvalidParameter(f"fps must be positive, got {self.fps}")
        times = _uniform_times(n, self.fps) if self.times is None else self.times
        times = _frozen(times)
        _check_times(times, n)
        object.__setattr__(self, "rotations", rot)
        object.__setattr__(self, "translations", gamma)
        object.__setattr__(self, "fps", float(self.fps))
        object.__setattr__(self, "times", times)
        if self.joint_positions is not None:
            pos = _frozen(self.joint_positions)
            if pos.shape != rot.shape:
                raise JointCountMismatch(
                    f"joint_positions shape {pos.shape} does not match rotations {rot.shape}"
                )
            _check_finite(pos, "joint_positions")
            object.__setattr__(self, "joint_positions", pos)

    def __len__(self):
        return self.rotations.shape[0]

    @property
    def frame_count(self):
        return self.rotations.shape[0]

    @property
    def joint_count(self):
        return self.rotations.shape[1]

    @property
    def duration(self):
        return float(self.times[-1] - self.times[0])

    def frame(self, i):
        pos = None if self.joint_positions is None else self.joint_positions[i]
        return PoseFrame(self.rotations[i], self.translations[i], pos)

    @property
    def frames(self):
        return [self.frame(i) for i in range(len(self))]

    def require_positions(self):
        if self.joint_positions is None:
            raise MissingJointPositions(
                "joint positions are not set; run forward kinematics with the rig first"
            )
        return self.joint_positions

    def replace(self, **changes):
        kw = dict(
            rotations=self.rotations,
            translations=self.translations,
            fps=self.fps,
            joint_positions=self.joint_positions,
            times=self.times,
        )
        kw.update(changes)
        return PoseSequence(**kw)

    def subset(self, indices):
        indices = list(indices)
        pos = None if self.joint_positions is None else self.joint_positions[indices]
        return PoseSequence(
            self.rotations[indices], self.translations[indices], self.fps, pos, self.times[indices]
        )


@dataclass(frozen=True)
class SkinnedRig:
    """Rest-pose surface, skeleton and per-vertex skin weights.

    ``parents[k]`` is the parent of joint ``k`` (``-1`` for the root, which must
    be joint 0) and every parent precedes its children.  ``offsets[k]`` is the
    rest-pose offset of joint ``k`` from its parent; the root offset is measured
    from the origin.  World positions are ``scale * (...)``.
    """

    template: np.ndarray
    parents: np.ndarray
    offsets: np.ndarray
    weights: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        template = _frozen(self.template)
        parents = _frozen(self.parents, dtype=np.int64)
        offsets = _frozen(self.offsets)
        weights = _frozen(self.weights)
        if template.ndim != 2 or template.shape[1] != 3 or len(template) == 0:
            raise MalformedInput(f"template must have shape (v, 3), got {template.shape}")
        _check_finite(template, "template")
        j = len(parents)
        if j < 1 or parents.ndim != 1:
            raise MalformedInput("parents must be a non-empty 1-d array")
        if parents[0] != -1:
            raise MalformedInput("joint 0 must be the root (parent -1)")
        for k in range(1, j):
            if not 0 <= parents[k] < k:
                raise MalformedInput(
                    f"parent of joint {k} is {parents[k]}; parents must precede children"
                )
        if offsets.shape != (j, 3):
            raise MalformedInput(f"offsets must have shape ({j}, 3), got {offsets.shape}")
        _check_finite(offsets, "offsets")
        if weights.shape != (len(template), j):
            raise MalformedInput(
                f"weights must have shape ({len(template)}, {j}), got {weights.shape}"
            )
        if np.any(weights < 0) or np.any(np.abs(weights.sum(axis=1) - 1.0) > 1e-9):
            raise MalformedInput("skin weights must be nonnegative with rows summing to 1")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise InvalidParameter(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "template", template)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def joint_count(self):
        return len(self.parents)

    @property
    def rest_joints(self):
        """Unscaled rest-pose joint positions."""
        rest = np.zeros((self.joint_count, 3))
        rest[0] = self.offsets[0]
        for k in range(1, self.joint_count):
            rest[k] = rest[self.parents[k]] + self.offsets[k]
        return rest

    def children(self, k):
        return [i for i in range(self.joint_count) if self.parents[i] == k]


def global_transforms(rig, rotations, translations):
    """Compose parent-to-child rigid transforms from the root outwards.

    Returns unscaled world rotations ``(..., j, 3, 3)`` and joint origins
    ``(..., j, 3)``.  The root translation enters the root origin directly.
    """
    rotations = np.asarray(rotations, dtype=float)
    translations = np.asarray(translations, dtype=float)
    if rotations.shape[-2] != rig.joint_count:
        raise JointCountMismatch(
            f"pose has {rotations.shape[-2]} joints, rig has {rig.joint_count}"
        )
    local = axis_angle_to_matrix(rotations)
    world_R = np.empty_like(local)
    world_t = np.empty(rotations.shape)
    world_R[..., 0, :, :] = local[..., 0, :, :]
    world_t[..., 0, :] = rig.offsets[0] + translations
    for k in range(1, rig.joint_count):
        p = rig.parents[k]
        world_R[..., k, :, :] = world_R[..., p, :, :] @ local[..., k, :, :]
        world_t[..., k, :] = world_t[..., p, :] + world_R[..., p, :, :] @ rig.offsets[k]
    return world_R, world_t


def forward_kinematics(rig, pose):
    """World joint positions for a :class:`PoseFrame` (``(j, 3)``, metres)."""
    if pose.joint_count != rig.joint_count:
        raise JointCountMismatch(
            f"pose has {pose.joint_count} joints, rig has {rig.joint_count}"
        )
    _, origins = global_transforms(rig, pose.rotations, pose.root_translation)
    return rig.scale * origins


def pose_with_positions(rig, pose):
    """Return ``pose`` with ``joint_positions`` recomputed from ``rig``."""
    _, origins = global_transforms(rig, pose.rotations, pose.translations)
    return pose.replace(joint_positions=rig.scale * origins)


@dataclass(frozen=True)
class FeatureVector:
    """The seven pair features; f6 is stored as a magnitude."""

    f1: float
    f2: float
    f3: float
    f4: float
    f5: float
    f6: float
    f7: float

    def __post_init__(self):
        for name in FEATURE_NAMES:
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise NonFiniteCoordinate(f"feature {name} is not finite")
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, values):
        values = np.asarray(values, dtype=float).ravel()
        if values.shape != (7,):
            raise MalformedInput(f"expected 7 feature values, got {values.size}")
        return cls(*values)

    def as_array(self):
        return np.array([getattr(self, n) for n in FEATURE_NAMES])

    def as_dict(self):
        return {n: getattr(self, n) for n in FEATURE_NAMES}


@dataclass(frozen=True)
class QualityModel:
    """Linear quality model ``M = sum_i w_i F_i`` (+ optional intercept)."""

    weights: tuple
    intercept: float = 0.0

    def __post_init__(self):
        w = tuple(float(x) for x in np.asarray(self.weights, dtype=float).ravel())
        if len(w) != 7:
            raise MalformedInput(f"a quality model has exactly 7 weights, got {len(w)}")
        if not all(np.isfinite(w)) or not np.isfinite(self.intercept):
            raise NonFiniteCoordinate("model weights must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "intercept", float(self.intercept))

    def to_dict(self):
        d = {"weights": list(self.weights)}
        if self.intercept:
            d["intercept"] = self.intercept
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(tuple(d["weights"]), float(d.get("intercept", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad model document: {exc}") from exc


# Fitted weights published with the model.
PUBLISHED_WEIGHTS = (0.246, -0.259, 0.459, -7.2, -0.273, 0.643, 7.49)
PUBLISHED_MODEL = QualityModel(PUBLISHED_WEIGHTS)


@dataclass(frozen=True)
class DistortionSpec:
    kind: str
    strength: float
    joints: Optional[tuple] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DISTORTION_KINDS:
            raise InvalidParameter(
                f"unknown distortion kind {self.kind!r}; expected one of {DISTORTION_KINDS}"
            )
        s = float(self.strength)
        if not np.isfinite(s):
            raise InvalidParameter("strength must be finite")
        object.__setattr__(self, "strength", s)
        if self.joints is not None:
            object.__setattr__(self, "joints", tuple(int(j) for j in self.joints))
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self):
        d = {"kind": self.kind, "strength": self.strength, "seed": self.seed}
        if self.joints is not None:
            d["joints"] = list(self.joints)
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["kind"], d["strength"], d.get("joints"), d.get("seed", 0))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad distortion spec: {exc}") from exc
