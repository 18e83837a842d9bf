"""Command-line entry point: ``trajrec reconstruct | evaluate | synth``.

Exit codes partition the outcomes: 0 success, 2 input or parse problems,
3 degenerate camera motion (the scale cannot be observed), 4 registration
degeneracy during evaluation. Diagnostics go to stderr as single-line
key=value records; stdout carries a one-line success summary. Every run
writes a run-manifest.json beside its outputs recording inputs, resolved
parameters, library versions, and per-stage timings, which is enough to
reproduce the outputs bit for bit.
"""

from __future__ import annotations

import argparse
import platform
import re
import sys
import time
from dataclasses import asdict, fields as dataclass_fields, replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .dataio import (
    dump_canonical_json,
    load_ground_truth,
    load_label_maps,
    load_reconstruction,
    load_semantic_config,
)
from .errors import (
    AllPairsDegenerate,
    DegenerateConfiguration,
    NoCommonFrames,
    NoRayHits,
    NoValidFrames,
    TrajrecError,
)
from .evaluation import (
    reference_scale_ratio,
    register_to_ground_truth,
    trajectory_error,
    write_eval_report,
)
from .ground import RansacParams
from .pipeline import METHODS, reconstruct_trajectory
from .synthetic import (
    SceneConfig,
    generate_scene,
    load_scene_config,
    write_scene,
)
from .trajectory import load_trajectory, write_ply, write_trajectory

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_REGISTRATION = 4

_VERSIONS = {
    "trajrec": __version__,
    "python": platform.python_version(),
    "numpy": np.__version__,
    "scipy": scipy.__version__,
}


def _diag(**fields) -> None:
    """One machine-readable key=value line on stderr."""
    parts = []
    for key, value in fields.items():
        text = str(value)
        if any(c.isspace() for c in text) or text == "":
            text = '"' + text.replace('"', "'") + '"'
        parts.append(f"{key}={text}")
    print(" ".join(parts), file=sys.stderr)


def _slug(exc: Exception) -> str:
    return re.sub(r"(?<!^)(?=[A-Z])", "-", type(exc).__name__).lower()


def _write_manifest(directory, command, inputs, outputs, parameters, timings) -> None:
    payload = {
        "command": command,
        "inputs": {k: (None if v is None else str(v)) for k, v in inputs.items()},
        "outputs": {k: (None if v is None else str(v)) for k, v in outputs.items()},
        "parameters": parameters,
        "versions": _VERSIONS,
        "timings": {k: float(v) for k, v in timings.items()},
    }
    dump_canonical_json(payload, Path(directory) / "run-manifest.json")


class _StageClock:
    def __init__(self):
        self.timings: dict[str, float] = {}
        self._mark = time.perf_counter()

    def lap(self, stage: str) -> None:
        now = time.perf_counter()
        self.timings[stage] = now - self._mark
        self._mark = now


def cmd_reconstruct(args) -> int:
    clock = _StageClock()
    sfm_o = load_reconstruction(args.object_sfm)
    sfm_b = load_reconstruction(args.background_sfm)
    semantic = load_semantic_config(args.semantic_config)
    label_maps = load_label_maps(args.labels_dir, semantic)
    clock.lap("load_inputs")

    ransac = RansacParams(
        iterations=args.ransac_iters,
        inlier_threshold=args.ransac_threshold,
    )
    result = reconstruct_trajectory(
        sfm_o,
        sfm_b,
        label_maps,
        semantic,
        method=args.method,
        num_b=args.num_b,
        ransac=ransac,
        seed=args.seed,
        pair_stride=args.pair_stride,
    )
    clock.lap("reconstruct")

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trajectory(result.estimate, result.trajectory, out)
    if args.ply_dir is not None:
        ply_dir = Path(args.ply_dir)
        ply_dir.mkdir(parents=True, exist_ok=True)
        for frame, points in sorted(result.trajectory.items()):
            write_ply(points, ply_dir / f"frame{frame:05d}.ply")
    clock.lap("write_outputs")

    _write_manifest(
        out.parent,
        "reconstruct",
        inputs={
            "object_sfm": args.object_sfm,
            "background_sfm": args.background_sfm,
            "labels_dir": args.labels_dir,
            "semantic_config": args.semantic_config,
        },
        outputs={"trajectory": out, "ply_dir": args.ply_dir},
        parameters={
            "method": args.method,
            "num_b": args.num_b,
            "ransac_iters": args.ransac_iters,
            "ransac_threshold": args.ransac_threshold,
            "seed": args.seed,
            "pair_stride": args.pair_stride,
        },
        timings={**clock.timings, **{f"pipeline.{k}": v for k, v in result.timings.items()}},
    )
    pair = result.estimate.chosen_pair
    print(
        f"scale_ratio={result.estimate.scale_ratio!r} method={args.method} "
        f"chosen_pair={'-' if pair is None else f'{pair[0]},{pair[1]}'} "
        f"frames={len(result.trajectory)} out={out}"
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    clock = _StageClock()
    trajectory = load_trajectory(args.trajectory)
    sfm_o = load_reconstruction(args.object_sfm)
    sfm_b = load_reconstruction(args.background_sfm)
    gt = load_ground_truth(args.gt)
    clock.lap("load_inputs")

    missing = sorted(set(trajectory.frames) - set(gt.frames))
    if missing:
        _diag(
            error="frame-mismatch",
            missing=",".join(str(f) for f in missing),
            message="trajectory frames absent from the ground truth",
        )
        return EXIT_INPUT

    try:
        registration = register_to_ground_truth(sfm_b.cameras, gt)
    except (NoCommonFrames, DegenerateConfiguration) as exc:
        _diag(error="registration-degenerate", message=str(exc))
        return EXIT_REGISTRATION
    clock.lap("register")

    aligned = {
        frame: registration.transform.apply(points)
        for frame, points in trajectory.frames.items()
    }
    report = trajectory_error(aligned, gt)
    clock.lap("trajectory_error")

    try:
        reference = reference_scale_ratio(sfm_o, gt, registration)
    except (NoCommonFrames, NoRayHits) as exc:
        _diag(error="no-ray-hits", message=str(exc))
        return EXIT_REGISTRATION
    clock.lap("reference_ratio")

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_eval_report(trajectory.scale_ratio, reference, report, out)
    clock.lap("write_outputs")

    _write_manifest(
        out.parent,
        "evaluate",
        inputs={
            "trajectory": args.trajectory,
            "object_sfm": args.object_sfm,
            "background_sfm": args.background_sfm,
            "gt": args.gt,
        },
        outputs={"eval": out},
        parameters={},
        timings=clock.timings,
    )
    deviation = abs(trajectory.scale_ratio - reference) / reference
    print(
        f"scale_ratio={trajectory.scale_ratio!r} reference={reference!r} "
        f"deviation={deviation!r} trajectory_error_mean={report.overall_mean!r} out={out}"
    )
    return EXIT_OK


def cmd_synth(args) -> int:
    clock = _StageClock()
    config = load_scene_config(args.config) if args.config else SceneConfig()
    overrides = {
        f.name: getattr(args, f.name)
        for f in dataclass_fields(SceneConfig)
        if getattr(args, f.name) is not None
    }
    if overrides:
        config = replace(config, **overrides)
    config.validate()
    clock.lap("load_config")

    scene = generate_scene(config, seed=args.seed)
    clock.lap("generate")
    out = Path(args.out)
    paths = write_scene(scene, out)
    clock.lap("write_outputs")

    _write_manifest(
        out,
        "synth",
        inputs={"config": args.config},
        outputs={"directory": out},
        parameters={**asdict(config), "seed": args.seed},
        timings=clock.timings,
    )
    print(f"scene={out} files={len(paths)} true_scale_ratio={config.true_scale_ratio!r}")
    return EXIT_OK


def _add_synth_config_flags(parser: argparse.ArgumentParser) -> None:
    """One optional flag per SceneConfig field, overriding the config file."""
    choices = {"object_path": ("line", "arc", "s-curve"), "ground": ("flat", "inclined", "piecewise")}
    for f in dataclass_fields(SceneConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type == "bool":
            parser.add_argument(flag, dest=f.name, action="store_const", const=True, default=None)
        elif f.type == "int":
            parser.add_argument(flag, dest=f.name, type=int, default=None)
        elif f.type == "float":
            parser.add_argument(flag, dest=f.name, type=float, default=None)
        else:
            parser.add_argument(flag, dest=f.name, choices=choices.get(f.name), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajrec",
        description="Metric object trajectories from paired monocular SfM reconstructions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rec = sub.add_parser("reconstruct", help="estimate the scale ratio and write trajectory.json")
    rec.add_argument("--object-sfm", required=True, help="object-relative reconstruction JSON")
    rec.add_argument("--background-sfm", required=True, help="background reconstruction JSON")
    rec.add_argument("--labels-dir", required=True, help="directory of frame%%05d.pgm label maps")
    rec.add_argument("--semantic-config", required=True, help="semantic.json class mapping")
    rec.add_argument("--out", required=True, help="output trajectory.json path")
    rec.add_argument("--method", choices=list(METHODS), default="constant-distance")
    rec.add_argument("--num-b", type=int, default=50, help="local ground points per frame")
    rec.add_argument("--ransac-iters", type=int, default=256)
    rec.add_argument(
        "--ransac-threshold",
        type=float,
        default=None,
        help="absolute inlier threshold (default: 1%% of the local bounding-box diagonal)",
    )
    rec.add_argument("--seed", type=int, default=0)
    rec.add_argument("--pair-stride", type=int, default=None, help="thin candidate view pairs")
    rec.add_argument("--ply-dir", default=None, help="also write per-frame PLY point clouds here")
    rec.set_defaults(func=cmd_reconstruct)

    ev = sub.add_parser("evaluate", help="score a trajectory against ground truth")
    ev.add_argument("--trajectory", required=True, help="trajectory.json from reconstruct")
    ev.add_argument("--object-sfm", required=True)
    ev.add_argument("--background-sfm", required=True)
    ev.add_argument("--gt", required=True, help="gt.json ground-truth scene")
    ev.add_argument("--out", required=True, help="output eval.json path")
    ev.set_defaults(func=cmd_evaluate)

    syn = sub.add_parser("synth", help="generate a synthetic scene directory")
    syn.add_argument("--config", default=None, help="scene-config.json (flags override it)")
    syn.add_argument("--out", required=True, help="output scene directory")
    syn.add_argument("--seed", type=int, default=0)
    _add_synth_config_flags(syn)
    syn.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        return args.func(args)
    except AllPairsDegenerate as exc:
        _diag(error="degenerate-camera-motion", message=str(exc))
        return EXIT_DEGENERATE
    except NoValidFrames as exc:
        _diag(error="no-valid-frames", message=str(exc))
        return EXIT_DEGENERATE
    except TrajrecError as exc:
        _diag(error=_slug(exc), message=str(exc))
        return EXIT_INPUT
    except OSError as exc:
        _diag(error="missing-input", message=str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
