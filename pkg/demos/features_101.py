"""
Comparing a distorted animation with its reference
===================================================

Build a small walking character, damage its motion in a few ways and look at
the seven pair features and the score the published linear model assigns.
"""

import numpy as np

from animqa import PUBLISHED_MODEL, DistortionSpec, apply_distortion, extract_features, predict, synth_walk_rig

# A seeded character: rig, joint-angle sequence and skinned surface points.
rig, pose, anim = synth_walk_rig(frame_count=60, fps=30.0, seed=0)
print(f"{rig.joint_count} joints, {len(rig.template)} surface points, {len(anim)} frames")

# Comparing the reference with itself gives an all-zero feature vector.
print("identity:", extract_features(anim, anim, pose, pose).as_array())

# One stimulus per distortion type, at a clearly visible strength.
specs = [
    DistortionSpec("FootGlide", 1.5),
    DistortionSpec("Moonwalk", 0.5),
    DistortionSpec("FootContact", 0.15),
    DistortionSpec("Smoothness", 0.3, seed=1),
    DistortionSpec("TemporalTwist", 0.25),
    DistortionSpec("SelfIntersection", 0.15),
]

np.set_printoptions(precision=4, suppress=True)
for spec in specs:
    gen_anim, gen_pose = apply_distortion(rig, anim, pose, spec)
    f = extract_features(anim, gen_anim, pose, gen_pose)
    print(f"{spec.kind:>16} {spec.strength:5.2f}  {f.as_array()}  score {predict(PUBLISHED_MODEL, f):6.3f}")

# The model has no intercept, so an undistorted pair scores 0 rather than 1.
