"""
Command-line pipeline: synthesize, distort, extract features, train, predict,
evaluate.

Every successful run writes a ``manifest.json`` (a :class:`RunManifest`)
recording the resolved configuration, inputs, outputs and the argv needed to
reproduce it.  Outputs are staged in a temporary directory and moved into
place only when the whole command succeeds, so a failing run leaves nothing
behind.  Any error exits with status 1 and a one-line message on stderr.

Directory layout
----------------
A *stimulus directory* holds ``pose.jsonl`` plus either ``anim.jsonl`` or an
``anim/`` directory of per-frame OBJ files; a reference directory also holds
``rig.json``.  ``distort --catalog`` writes one stimulus directory per
``<kind>/<strength-index>/``.
"""
import argparse
import json
import os
import shutil
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .core import (
    DISTORTION_KINDS,
    PUBLISHED_MODEL,
    AnimationSequence,
    DistortionSpec,
    pose_with_positions,
)
from .distortion import apply_distortion, catalog_names, load_catalog
from .errors import AnimQAError, MalformedInput
from .io import (
    atomic_write_text,
    load_animation,
    load_model,
    load_pose,
    load_rig,
    read_feature_csv,
    save_animation,
    save_model,
    save_pose,
    save_rig,
    write_feature_csv,
)
from .kinematic import extract_features
from .stats import LabeledDataset, SplitConfig, evaluate, fit_model, predict_clamped, predict_many
from .study import derive_seed, max_workers
from .synth import MAX_JOINTS, synth_walk_rig

RIG_FILE = "rig.json"
POSE_FILE = "pose.jsonl"
ANIM_FILE = "anim.jsonl"
ANIM_DIR = "anim"
SPEC_FILE = "spec.json"
MANIFEST_FILE = "manifest.json"


class CommandError(AnimQAError):
    """Bad command-line usage detected after parsing."""


@dataclass
class RunManifest:
    command: str
    config: dict
    inputs: list
    outputs: list
    seed: object
    version: str = __version__
    argv: list = field(default_factory=list)
    duration_s: float = 0.0

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


# -- staging -----------------------------------------------------------------


class Stage:
    """Collect outputs in a scratch directory, then move them into place.

    ``root`` is where outputs finally live (a directory).  Files are written
    under :attr:`path` with the same relative layout; :meth:`commit` moves
    each one over its destination with an atomic rename.
    """

    def __init__(self, root):
        self.root = Path(root)
        self.root.parent.mkdir(parents=True, exist_ok=True)
        self.path = Path(tempfile.mkdtemp(prefix=f".{self.root.name}.", dir=self.root.parent))

    def __call__(self, rel):
        p = self.path / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def commit(self):
        self.root.mkdir(parents=True, exist_ok=True)
        moved = []
        for src in sorted(p for p in self.path.rglob("*") if p.is_file()):
            rel = src.relative_to(self.path)
            dst = self.root / rel
            if dst.is_dir():
                shutil.rmtree(dst)
            dst.parent.mkdir(parents=True, exist_ok=True)
            os.replace(src, dst)
            moved.append(str(rel))
        self.discard()
        return moved

    def discard(self):
        shutil.rmtree(self.path, ignore_errors=True)


def _file_stage(out):
    """Stage for a single output file ``out`` (manifest goes next to it)."""
    out = Path(out)
    return Stage(out.parent), out.name, f"{out.stem}.{MANIFEST_FILE}"


# -- stimulus directories ------------------------------------------------------


def save_stimulus(stage, rel, anim, pose, fmt):
    rel = Path(rel)
    save_pose(pose, stage(rel / POSE_FILE))
    if fmt == "obj":
        save_animation(anim, stage(rel / ANIM_DIR / "x").parent, "obj")
    else:
        save_animation(anim, stage(rel / ANIM_FILE), "jsonl")


def load_stimulus(path):
    """``(anim, pose)`` from a stimulus directory."""
    path = Path(path)
    if not (path / POSE_FILE).is_file():
        raise MalformedInput(f"{path}: no {POSE_FILE}")
    pose = load_pose(path / POSE_FILE)
    if (path / ANIM_FILE).is_file():
        anim = load_animation(path / ANIM_FILE, "jsonl", pose.fps)
    elif (path / ANIM_DIR).is_dir():
        anim = load_animation(path / ANIM_DIR, "obj", pose.fps)
        if len(anim) == len(pose):
            # OBJ carries no timestamps; the pose does
            anim = AnimationSequence(anim.frames, pose.fps, pose.times)
    else:
        raise MalformedInput(f"{path}: no {ANIM_FILE} or {ANIM_DIR}/")
    if pose.joint_positions is None and (path / RIG_FILE).is_file():
        pose = pose_with_positions(load_rig(path / RIG_FILE), pose)
    return anim, pose


def find_stimuli(root):
    """Stimulus directories at or below ``root``, in sorted order."""
    root = Path(root)
    if (root / POSE_FILE).is_file():
        return [root]
    found = sorted(p.parent for p in root.rglob(POSE_FILE))
    if not found:
        raise MalformedInput(f"{root}: no stimulus directories found")
    return found


def _map(fn, items):
    threads = max_workers()
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


# -- commands ----------------------------------------------------------------


def cmd_synth(args, stage):
    rig, pose, anim = synth_walk_rig(
        args.joints, args.cycle_hz, args.frames, args.fps, args.seed, args.scale, args.points_per_bone
    )
    save_rig(rig, stage(RIG_FILE))
    save_stimulus(stage, ".", anim, pose, args.format)
    config = {
        "joints": args.joints,
        "frames": args.frames,
        "fps": args.fps,
        "cycle_hz": args.cycle_hz,
        "scale": args.scale,
        "points_per_bone": args.points_per_bone,
        "format": args.format,
    }
    return config, []


def _parse_spec(text, seed):
    """A spec from inline JSON or a JSON file; ``seed`` fills a missing seed."""
    try:
        raw = Path(text).read_text() if Path(text).is_file() else text
    except OSError:  # e.g. inline JSON longer than a file name may be
        raw = text
    try:
        d = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"--spec is neither a JSON file nor JSON text: {exc}") from exc
    if not isinstance(d, dict):
        raise MalformedInput("--spec must be a JSON object")
    d.setdefault("seed", seed)
    return DistortionSpec.from_dict(d)


def cmd_distort(args, stage):
    if (args.spec is None) == (args.catalog is None):
        raise CommandError("give exactly one of --spec or --catalog")
    ref = Path(args.ref)
    rig = load_rig(ref / RIG_FILE)
    ref_anim, ref_pose = load_stimulus(ref)
    inputs = [str(ref)]

    if args.spec is not None:
        spec = _parse_spec(args.spec, derive_seed(args.seed, 1, 0))
        jobs = [(Path("."), spec)]
    else:
        cat = load_catalog(args.catalog)
        kinds = args.kinds or list(DISTORTION_KINDS)
        unknown = [k for k in kinds if k not in DISTORTION_KINDS]
        if unknown:
            raise CommandError(f"unknown kinds {unknown}; expected {list(DISTORTION_KINDS)}")
        sseed = derive_seed(args.seed, 1, 0)
        jobs = [
            (Path(kind) / str(level), DistortionSpec(kind, s, seed=sseed))
            for kind in kinds
            for level, s in enumerate(cat[kind])
        ]

    def run(job):
        rel, spec = job
        return rel, spec, apply_distortion(rig, ref_anim, ref_pose, spec)

    for rel, spec, (anim, pose) in _map(run, jobs):
        save_stimulus(stage, rel, anim, pose, args.format)
        atomic_write_text(stage(rel / SPEC_FILE), json.dumps(spec.to_dict(), indent=2) + "\n")
    config = {
        "catalog": args.catalog,
        "spec": None if args.spec is None else jobs[0][1].to_dict(),
        "stimuli": len(jobs),
        "format": args.format,
    }
    return config, inputs


def cmd_features(args, stage):
    ref_anim, ref_pose = load_stimulus(args.ref)
    gen_dirs = []
    for g in args.gen:
        gen_dirs += find_stimuli(g)

    def stimulus_id(path):
        for g in args.gen:
            try:
                rel = Path(path).relative_to(g)
            except ValueError:
                continue
            if str(rel) != ".":
                return rel.as_posix()
        return Path(path).name

    def run(path):
        anim, pose = load_stimulus(path)
        return extract_features(ref_anim, anim, ref_pose, pose)

    feats = _map(run, gen_dirs)
    ids = [stimulus_id(p) for p in gen_dirs]
    write_feature_csv(stage(args.out.name), ids, feats)
    return {"pairs": len(ids)}, [str(args.ref), *map(str, gen_dirs)]


def _labeled(path, check_range):
    ids, X, mos = read_feature_csv(path)
    if mos is None:
        raise MalformedInput(f"{path}: no mos column")
    return LabeledDataset(ids, X, mos, check_range)


def cmd_train(args, stage):
    data = _labeled(args.data, not args.no_range_check)
    fit = fit_model(data, SplitConfig(args.train_fraction, args.seed), intercept=args.intercept)
    save_model(fit.model, stage(args.out.name))
    summary = {
        "validation_mse": fit.validation_mse,
        "train_mse": fit.train_mse,
        "ridge_lambda": fit.ridge_lambda,
        "n_train": fit.n_train,
        "n_validation": fit.n_validation,
    }
    print(json.dumps(summary))
    config = {
        "train_fraction": args.train_fraction,
        "intercept": args.intercept,
        "range_check": not args.no_range_check,
        **summary,
    }
    return config, [str(args.data)]


def _model(spec):
    return PUBLISHED_MODEL if spec == "published" else load_model(spec)


def cmd_predict(args, stage):
    model = _model(args.model)
    ids, X, _ = read_feature_csv(args.features)
    if args.clamp:
        pred = [predict_clamped(model, x) for x in X]
    else:
        pred = predict_many(model, X)
    lines = ["stimulus_id,predicted_mos"] + [f"{i},{float(p)!r}" for i, p in zip(ids, pred)]
    atomic_write_text(stage(args.out.name), "\n".join(lines) + "\n")
    return {"clamp": args.clamp, "rows": len(ids)}, [str(args.model), str(args.features)]


def cmd_evaluate(args, stage):
    model = _model(args.model)
    data = _labeled(args.data, not args.no_range_check)
    report = evaluate(model, data).to_dict()
    atomic_write_text(stage(args.out.name), json.dumps(report, indent=2) + "\n")
    print(json.dumps(report))
    return {"range_check": not args.no_range_check}, [str(args.model), str(args.data)]


COMMANDS = {
    "synth": cmd_synth,
    "distort": cmd_distort,
    "features": cmd_features,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
}
# commands whose --out names a directory; the rest name a single file
DIRECTORY_OUTPUT = {"synth", "distort"}


def build_parser():
    p = argparse.ArgumentParser(prog="animqa", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--out", type=Path, required=True, help="output path")
        sp.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
        return sp

    sp = add("synth", "write a seeded synthetic reference character")
    sp.add_argument("--joints", type=int, default=MAX_JOINTS)
    sp.add_argument("--frames", type=int, default=60)
    sp.add_argument("--fps", type=float, default=30.0)
    sp.add_argument("--cycle-hz", type=float, default=1.0)
    sp.add_argument("--scale", type=float, default=1.0)
    sp.add_argument("--points-per-bone", type=int, default=40)
    sp.add_argument("--format", choices=("jsonl", "obj"), default="jsonl")

    sp = add("distort", "distort a reference by one spec or a whole catalog")
    sp.add_argument("--ref", type=Path, required=True, help="reference directory")
    sp.add_argument("--spec", help="distortion spec as JSON text or a JSON file")
    sp.add_argument("--catalog", choices=sorted(catalog_names()))
    sp.add_argument("--kinds", nargs="+", help="restrict --catalog to these kinds")
    sp.add_argument("--format", choices=("jsonl", "obj"), default="jsonl")

    sp = add("features", "seven pair features as CSV, one row per generated stimulus")
    sp.add_argument("--ref", type=Path, required=True)
    sp.add_argument("--gen", type=Path, nargs="+", required=True,
                    help="stimulus directories or trees of them")

    sp = add("train", "fit the linear model on a labelled feature CSV")
    sp.add_argument("--data", type=Path, required=True, help="CSV: stimulus_id,f1..f7,mos")
    sp.add_argument("--train-fraction", type=float, default=0.8)
    sp.add_argument("--intercept", action="store_true")
    sp.add_argument("--no-range-check", action="store_true",
                    help="accept labels outside 1..5 (planted synthetic labels)")

    sp = add("predict", "predicted MOS per feature row")
    sp.add_argument("--model", required=True, help="model JSON or 'published'")
    sp.add_argument("--features", type=Path, required=True)
    sp.add_argument("--clamp", action="store_true", help="clamp predictions to 1..5")

    sp = add("evaluate", "MSE/PLCC/SROCC of a model on a labelled CSV")
    sp.add_argument("--model", required=True, help="model JSON or 'published'")
    sp.add_argument("--data", type=Path, required=True)
    sp.add_argument("--no-range-check", action="store_true")
    return p


def _describe(exc):
    name = type(exc).__name__
    feature = getattr(exc, "feature", None)
    return f"{name} in {feature}: {exc}" if feature else f"{name}: {exc}"


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    stage = None
    try:
        if args.command in DIRECTORY_OUTPUT:
            stage = Stage(args.out)
            manifest_name = MANIFEST_FILE
        else:
            stage, _, manifest_name = _file_stage(args.out)
        config, inputs = COMMANDS[args.command](args, stage)
        outputs = sorted(
            str(p.relative_to(stage.path)) for p in stage.path.rglob("*") if p.is_file()
        )
        manifest = RunManifest(
            command=args.command,
            config=config,
            inputs=inputs,
            outputs=outputs,
            seed=args.seed,
            argv=[args.command, *argv[argv.index(args.command) + 1:]],
            duration_s=time.perf_counter() - t0,
        )
        atomic_write_text(stage(manifest_name), manifest.to_json())
        stage.commit()
    except (AnimQAError, OSError, ValueError, KeyError) as exc:
        if stage is not None:
            stage.discard()
        print(f"animqa {args.command}: error: {_describe(exc)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
