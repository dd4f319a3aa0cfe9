"""Perceptual quality assessment of 3D human animation.

Synthesise distorted animations of a skinned character, extract seven
geometric/kinematic pair features and map them to a predicted opinion score
with a linear model.
"""
from .core import (
    DISTORTION_KINDS,
    FEATURE_NAMES,
    PUBLISHED_MODEL,
    PUBLISHED_WEIGHTS,
    AnimationSequence,
    DistortionSpec,
    FeatureVector,
    PointFrame,
    PoseFrame,
    PoseSequence,
    QualityModel,
    SkinnedRig,
    forward_kinematics,
    pose_with_positions,
)
from .distortion import (
    apply_distortion,
    distort_foot_contact,
    distort_footskate,
    distort_self_intersection,
    distort_smoothness,
    distort_twist,
    load_catalog,
)
from .io import load_animation, save_animation
from .kinematic import (
    JointTrajectory,
    extract_features,
    foot_contact_feature,
    global_translation_feature,
    ldlj,
    mpjpe_feature,
    smoothness_feature,
    velocity_feature,
)
from .skinning import lbs_pose, lbs_unpose
from .spatial import NearestNeighborIndex, chamfer_feature, hausdorff_feature
from .stats import (
    LabeledDataset,
    RatingTable,
    SplitConfig,
    compute_mos,
    evaluate,
    fit_model,
    mse,
    plcc,
    predict,
    srocc,
)
from .synth import synth_walk_rig

__version__ = "0.1.0"

__all__ = [
    "load_animation",
    "save_animation",
    "lbs_pose",
    "lbs_unpose",
    "NearestNeighborIndex",
    "chamfer_feature",
    "hausdorff_feature",
    "__version__",
    "DISTORTION_KINDS",
    "FEATURE_NAMES",
    "PUBLISHED_MODEL",
    "PUBLISHED_WEIGHTS",
    "AnimationSequence",
    "DistortionSpec",
    "FeatureVector",
    "PointFrame",
    "PoseFrame",
    "PoseSequence",
    "QualityModel",
    "SkinnedRig",
    "forward_kinematics",
    "pose_with_positions",
    "apply_distortion",
    "distort_foot_contact",
    "distort_footskate",
    "distort_self_intersection",
    "distort_smoothness",
    "distort_twist",
    "load_catalog",
    "JointTrajectory",
    "extract_features",
    "foot_contact_feature",
    "global_translation_feature",
    "ldlj",
    "mpjpe_feature",
    "smoothness_feature",
    "velocity_feature",
    "LabeledDataset",
    "RatingTable",
    "SplitConfig",
    "compute_mos",
    "evaluate",
    "fit_model",
    "mse",
    "plcc",
    "predict",
    "srocc",
    "synth_walk_rig",
]
