"""
Predicted score along each strength catalog
===========================================

Walk through the pilot catalog for every distortion kind and print the score
the published model gives each level.  Scores rise with severity, but for
frame deletion that is not guaranteed: the smoothness feature depends on
where the gaps land as well as on how many frames are gone, and some seeds
produce a dip.
"""

from animqa import PUBLISHED_MODEL, DistortionSpec, apply_distortion, extract_features, load_catalog, predict, synth_walk_rig

rig, pose, anim = synth_walk_rig(seed=2)

for kind, levels in load_catalog("pilot").items():
    scores = []
    for strength in levels:
        gen_anim, gen_pose = apply_distortion(rig, anim, pose, DistortionSpec(kind, strength, seed=7))
        scores.append(predict(PUBLISHED_MODEL, extract_features(anim, gen_anim, pose, gen_pose)))
    print(f"{kind:>16}: " + " ".join(f"{s:6.2f}" for s in scores))
