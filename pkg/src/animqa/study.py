"""
Synthetic stimulus sets for training and validating the quality model.

A *source* is one seeded walking character; a *stimulus* is one distortion of
a source at one catalogued strength, together with its pair features.

Seeds
-----
Every random stream is derived from one root seed with
``derive_seed(root, *keys)``, which hashes the root and integer keys through
``numpy.random.SeedSequence``.  Streams used here: ``(root, 0, i)`` for
source ``i``, ``(root, 1, i)`` for its distortion seeds, ``(root, 2)`` for
held-out stimulus choices and ``(root, 3)`` for label noise.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import DISTORTION_KINDS, DistortionSpec, FeatureVector
from .distortion import apply_distortion, load_catalog
from .kinematic import extract_features
from .stats import LabeledDataset
from .synth import MAX_JOINTS, synth_walk_rig

THREADS_ENV = "ANIMQA_THREADS"


def derive_seed(root, *keys):
    """A 63-bit seed for the stream ``keys`` under ``root``."""
    ss = np.random.SeedSequence([int(root), *(int(k) for k in keys)])
    return int(ss.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))


def max_workers():
    """Worker cap from ``ANIMQA_THREADS`` (default: CPU count)."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Source:
    name: str
    rig: object
    pose: object
    anim: object


@dataclass(frozen=True)
class Stimulus:
    stimulus_id: str
    source: str
    kind: str
    level: int
    strength: float
    features: FeatureVector


def make_sources(
    count,
    seed=0,
    scale_range=(0.85, 1.15),
    frame_count=60,
    fps=30.0,
    joint_count=MAX_JOINTS,
    prefix="src",
):
    """``count`` characters with body scales spread evenly over ``scale_range``.

    Differing scales keep root translations and root world positions from
    being proportional across the whole set.
    """
    scales = np.linspace(*scale_range, count) if count > 1 else [np.mean(scale_range)]
    out = []
    for i in range(count):
        rig, pose, anim = synth_walk_rig(
            joint_count, 1.0, frame_count, fps, derive_seed(seed, 0, i), float(scales[i])
        )
        out.append(Source(f"{prefix}{i:02d}", rig, pose, anim))
    return out


def _stimulus(source, kind, level, strength, dseed):
    gen_anim, gen_pose = apply_distortion(
        source.rig, source.anim, source.pose, DistortionSpec(kind, strength, seed=dseed)
    )
    f = extract_features(source.anim, gen_anim, source.pose, gen_pose)
    sid = f"{source.name}/{kind}/{level}"
    return Stimulus(sid, source.name, kind, level, float(strength), f)


def _run(jobs, threads):
    threads = threads or max_workers()
    if threads == 1:
        return [_stimulus(*j) for j in jobs]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda j: _stimulus(*j), jobs))


def distortion_grid(sources, catalog="main", kinds=DISTORTION_KINDS, seed=0, threads=None):
    """Every source x kind x catalogued strength, in that order."""
    cat = load_catalog(catalog) if isinstance(catalog, str) else catalog
    jobs = []
    for i, src in enumerate(sources):
        dseed = derive_seed(seed, 1, i)
        for kind in kinds:
            for level, s in enumerate(cat[kind]):
                jobs.append((src, kind, level, s, dseed))
    return _run(jobs, threads)


def single_distortion_set(sources, catalog="main", seed=0, threads=None):
    """One random kind at one random strength per source (a held-out test set)."""
    cat = load_catalog(catalog) if isinstance(catalog, str) else catalog
    rng = np.random.default_rng(derive_seed(seed, 2))
    jobs = []
    for i, src in enumerate(sources):
        kind = DISTORTION_KINDS[rng.integers(len(DISTORTION_KINDS))]
        level = int(rng.integers(len(cat[kind])))
        jobs.append((src, kind, level, cat[kind][level], derive_seed(seed, 1, 1000 + i)))
    return _run(jobs, threads)


def feature_matrix(stimuli):
    return np.array([s.features.as_array() for s in stimuli])


def planted_labels(stimuli, weights, sigma=0.0, seed=0):
    """``sum_i w_i F_i`` plus Gaussian noise of standard deviation ``sigma``."""
    X = feature_matrix(stimuli)
    noise = np.random.default_rng(derive_seed(seed, 3)).normal(0.0, 1.0, len(X))
    return X @ np.asarray(weights, dtype=float) + sigma * noise


def rank_labels(stimuli, levels=5, sigma=0.3, seed=0):
    """Strength rank mapped linearly onto 1..5, plus noise, clipped to 1..5."""
    rank = np.array([s.level for s in stimuli], dtype=float)
    base = 1.0 + 4.0 * rank / (levels - 1)
    noise = np.random.default_rng(derive_seed(seed, 3)).normal(0.0, 1.0, len(rank))
    return np.clip(base + sigma * noise, 1.0, 5.0)


def to_dataset(stimuli, labels, check_range=True):
    return LabeledDataset(
        tuple(s.stimulus_id for s in stimuli), feature_matrix(stimuli), labels, check_range
    )
