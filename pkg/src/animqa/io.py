"""
Readers and writers for animations, poses, rigs, datasets and models.

Formats
-------
Animation JSONL
    One object per frame: ``{"t": seconds, "points": [x0, y0, z0, x1, ...],
    "faces": [[i, j, k], ...], "fps": hz}``; ``faces`` and ``fps`` optional.
Animation OBJ directory
    One ``.obj`` per frame (``v x y z`` and 1-based ``f i j k`` lines), frames
    taken in sorted file-name order.
Pose JSONL
    One object per frame: ``{"t", "fps", "rotations": flat (j*3),
    "translation": [3], "joints": flat (j*3)}``.
Rig JSON
    ``{"template", "parents", "offsets", "weights", "scale"}``.
"""
import csv
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import (
    FEATURE_NAMES,
    AnimationSequence,
    FeatureVector,
    PointFrame,
    PoseSequence,
    QualityModel,
    SkinnedRig,
)
from .errors import AnimQAError, EmptySequence, MalformedInput, NonFiniteCoordinate

DEFAULT_FPS = 30.0


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dumps(obj):
    # allow_nan=False: a NaN must never reach disk silently
    return json.dumps(obj, allow_nan=False, separators=(",", ":"))


def _records(path):
    try:
        with open(path) as fh:
            lines = [ln for ln in fh if ln.strip()]
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from exc
    out = []
    for lineno, ln in enumerate(lines, 1):
        try:
            out.append(json.loads(ln, parse_constant=lambda c: float(c)))
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"{path}:{lineno}: {exc}") from exc
    return out


def _finite_array(values, what):
    try:
        a = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"{what}: {exc}") from exc
    if not np.all(np.isfinite(a)):
        raise NonFiniteCoordinate(f"{what} contains NaN or infinite values")
    return a


def animation_to_jsonl(anim):
    lines = []
    for t, frame in zip(anim.times, anim.frames):
        rec = {"t": float(t), "fps": anim.fps, "points": frame.points.ravel().tolist()}
        if frame.faces is not None:
            rec["faces"] = frame.faces.tolist()
        lines.append(_dumps(rec))
    return "\n".join(lines) + "\n"


def save_animation(anim, path, format="jsonl"):
    """Write ``anim`` as a JSONL file or as a directory of OBJ files."""
    format = format.lower()
    if format == "jsonl":
        atomic_write_text(path, animation_to_jsonl(anim))
    elif format in ("obj", "obj_dir"):
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        width = max(4, len(str(len(anim))))
        for i, frame in enumerate(anim.frames):
            rows = [f"v {x!r} {y!r} {z!r}" for x, y, z in frame.points.tolist()]
            if frame.faces is not None:
                rows += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in frame.faces.tolist()]
            atomic_write_text(path / f"frame_{i:0{width}d}.obj", "\n".join(rows) + "\n")
    else:
        raise ValueError(f"unknown animation format {format!r}")


def _load_jsonl(path, fps):
    recs = _records(path)
    if len(recs) < 2:
        raise EmptySequence(f"{path}: need at least 2 frames, found {len(recs)}")
    frames, times = [], []
    for i, rec in enumerate(recs):
        if not isinstance(rec, dict) or "points" not in rec:
            raise MalformedInput(f"{path}: record {i} has no 'points'")
        pts = _finite_array(rec["points"], f"{path}: record {i} points")
        if pts.ndim != 1 or pts.size % 3:
            raise MalformedInput(f"{path}: record {i} points length is not a multiple of 3")
        faces = rec.get("faces")
        frames.append(PointFrame(pts.reshape(-1, 3), None if faces is None else faces))
        if "t" in rec:
            times.append(rec["t"])
    stored = recs[0].get("fps") if isinstance(recs[0], dict) else None
    fps = float(stored if stored is not None else (fps or DEFAULT_FPS))
    times = _finite_array(times, f"{path}: timestamps") if len(times) == len(frames) else None
    return AnimationSequence(tuple(frames), fps, times)


def _parse_obj(path):
    verts, faces = [], []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from exc
    for lineno, ln in enumerate(text.splitlines(), 1):
        parts = ln.split()
        if not parts or parts[0].startswith("#"):
            continue
        try:
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
                if len(parts) < 4:
                    raise ValueError("vertex needs 3 coordinates")
            elif parts[0] == "f":
                idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                if len(idx) < 3:
                    raise ValueError("face needs at least 3 vertices")
                for k in range(1, len(idx) - 1):  # fan-triangulate polygons
                    faces.append([idx[0], idx[k], idx[k + 1]])
        except ValueError as exc:
            raise MalformedInput(f"{path}:{lineno}: {exc}") from exc
    verts = _finite_array(verts, f"{path} vertices")
    if verts.size == 0:
        raise MalformedInput(f"{path}: no vertices")
    return PointFrame(verts, faces if faces else None)


def load_animation(path, format="jsonl", fps=None):
    """Load an :class:`AnimationSequence` from JSONL or an OBJ directory.

    ``fps`` is used only when the file does not record it (always for OBJ
    directories); it defaults to 30.
    """
    format = format.lower()
    path = Path(path)
    if format == "jsonl":
        if not path.is_file():
            raise MalformedInput(f"{path} is not a file")
        return _load_jsonl(path, fps)
    if format in ("obj", "obj_dir"):
        if not path.is_dir():
            raise MalformedInput(f"{path} is not a directory")
        files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".obj")
        if len(files) < 2:
            raise EmptySequence(f"{path}: need at least 2 OBJ frames, found {len(files)}")
        return AnimationSequence(tuple(_parse_obj(f) for f in files), fps or DEFAULT_FPS)
    raise ValueError(f"unknown animation format {format!r}")


def pose_to_jsonl(pose):
    lines = []
    for i in range(len(pose)):
        rec = {
            "t": float(pose.times[i]),
            "fps": pose.fps,
            "rotations": pose.rotations[i].ravel().tolist(),
            "translation": pose.translations[i].tolist(),
        }
        if pose.joint_positions is not None:
            rec["joints"] = pose.joint_positions[i].ravel().tolist()
        lines.append(_dumps(rec))
    return "\n".join(lines) + "\n"


def save_pose(pose, path):
    atomic_write_text(path, pose_to_jsonl(pose))


def load_pose(path, fps=None):
    recs = _records(path)
    if len(recs) < 2:
        raise EmptySequence(f"{path}: need at least 2 frames, found {len(recs)}")
    try:
        rot = _finite_array([r["rotations"] for r in recs], f"{path} rotations")
        gamma = _finite_array([r["translation"] for r in recs], f"{path} translations")
        times = _finite_array([r["t"] for r in recs], f"{path} timestamps")
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"{path}: missing pose field {exc}") from exc
    if rot.ndim != 2 or rot.shape[1] % 3:
        raise MalformedInput(f"{path}: rotations must be flat multiples of 3 of equal length")
    rot = rot.reshape(len(recs), -1, 3)
    joints = None
    if all("joints" in r for r in recs):
        joints = _finite_array([r["joints"] for r in recs], f"{path} joints").reshape(rot.shape)
    stored = recs[0].get("fps")
    return PoseSequence(rot, gamma, float(stored or fps or DEFAULT_FPS), joints, times)


def rig_to_dict(rig):
    return {
        "template": rig.template.tolist(),
        "parents": rig.parents.tolist(),
        "offsets": rig.offsets.tolist(),
        "weights": rig.weights.tolist(),
        "scale": rig.scale,
    }


def save_rig(rig, path):
    atomic_write_text(path, _dumps(rig_to_dict(rig)))


def load_rig(path):
    try:
        d = json.loads(Path(path).read_text())
        return SkinnedRig(
            np.asarray(d["template"], dtype=float),
            np.asarray(d["parents"], dtype=np.int64),
            np.asarray(d["offsets"], dtype=float),
            np.asarray(d["weights"], dtype=float),
            float(d.get("scale", 1.0)),
        )
    except AnimQAError:
        raise
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"bad rig file {path}: {exc}") from exc


def save_model(model, path):
    atomic_write_text(path, json.dumps(model.to_dict(), indent=2) + "\n")


def load_model(path):
    try:
        return QualityModel.from_dict(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"bad model file {path}: {exc}") from exc


def write_feature_csv(path, ids, features, mos=None):
    """Rows of ``stimulus_id,f1..f7[,mos]``."""
    header = ["stimulus_id", *FEATURE_NAMES] + (["mos"] if mos is not None else [])
    lines = [",".join(header)]
    for k, (sid, f) in enumerate(zip(ids, features)):
        arr = f.as_array() if isinstance(f, FeatureVector) else np.asarray(f, dtype=float)
        row = [str(sid)] + [repr(float(v)) for v in arr]
        if mos is not None:
            row.append(repr(float(mos[k])))
        lines.append(",".join(row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_feature_csv(path):
    """Return ``(ids, features (N, 7), mos or None)``."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise MalformedInput(f"{path}: no data rows")
    missing = [c for c in ("stimulus_id", *FEATURE_NAMES) if c not in rows[0]]
    if missing:
        raise MalformedInput(f"{path}: missing columns {missing}")
    try:
        ids = [r["stimulus_id"] for r in rows]
        feats = np.array([[float(r[n]) for n in FEATURE_NAMES] for r in rows])
        mos = np.array([float(r["mos"]) for r in rows]) if "mos" in rows[0] else None
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"{path}: {exc}") from exc
    if not np.all(np.isfinite(feats)) or (mos is not None and not np.all(np.isfinite(mos))):
        raise NonFiniteCoordinate(f"{path}: non-finite values")
    return ids, feats, mos


def format_float(x):
    """17 significant digits, the round-trip precision of a double."""
    return "nan" if math.isnan(x) else f"{x:.17g}"
