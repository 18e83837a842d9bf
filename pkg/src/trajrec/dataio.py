"""Readers, writers and container types for the on-disk formats.

Four inputs feed a reconstruction run:

* ``object.json`` / ``background.json``: SfM results. Layout::

      {"frame_size": [width, height],
       "cameras": [{"frame": 0, "R": [... 9 row-major ...], "c": [x, y, z]}],
       "points": [{"id": 0, "xyz": [x, y, z],
                   "obs": [{"frame": 0, "uv": [u, v]}]}]}

  ``R`` is the world-to-camera rotation, ``c`` the camera center in world
  coordinates (see :mod:`trajrec.geometry`).
* ``labels/frame%05d.pgm``: one 8-bit PGM (P2 or P5) label map per frame.
* ``semantic.json``: which label values mean ground / object / background.
* ``gt.json`` + a Wavefront OBJ mesh: ground truth camera and object poses
  for evaluation. The object pose maps mesh-local points into the world as
  ``R @ x + t``.

All JSON emitted here is canonical: sorted keys, compact separators, floats
via repr, trailing newline. Writing the same data twice produces identical
bytes, which the determinism guarantees elsewhere rely on.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    MissingMesh,
    NoCommonFrames,
    ParseError,
    ValidationError,
)
from .geometry import Pose, TriangleMesh

_LABEL_NAME = re.compile(r"^frame(\d{5})\.pgm$")


# ---------------------------------------------------------------------------
# container types


@dataclass(frozen=True)
class Observation:
    """One 2D measurement of a point: frame id plus pixel position."""

    frame_id: int
    pixel: np.ndarray

    def __post_init__(self):
        if self.frame_id < 0:
            raise ValidationError(f"negative frame id {self.frame_id}")
        px = np.asarray(self.pixel, dtype=float)
        if px.shape != (2,) or not np.all(np.isfinite(px)):
            raise ValidationError("observation pixel must be a finite 2-vector")
        object.__setattr__(self, "pixel", px)


@dataclass(frozen=True)
class ScenePoint:
    """A triangulated 3D point with its observations."""

    id: int
    position: np.ndarray
    observations: tuple[Observation, ...]

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        if pos.shape != (3,) or not np.all(np.isfinite(pos)):
            raise ValidationError(f"point {self.id}: position must be a finite 3-vector")
        frames = [o.frame_id for o in self.observations]
        if len(set(frames)) != len(frames):
            raise ValidationError(f"point {self.id}: duplicate observation frames")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "observations", tuple(self.observations))


@dataclass
class Reconstruction:
    """One SfM result: cameras by frame id, points, and the frame size."""

    frame_size: tuple[int, int]
    cameras: dict[int, Pose]
    points: list[ScenePoint]

    def validate(self) -> None:
        w, h = self.frame_size
        if w <= 0 or h <= 0:
            raise ValidationError(f"frame_size must be positive, got {self.frame_size}")
        ids = [p.id for p in self.points]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate point ids")
        for p in self.points:
            for obs in p.observations:
                if obs.frame_id not in self.cameras:
                    raise ValidationError(
                        f"point {p.id} observed in frame {obs.frame_id} which has no camera"
                    )
                u, v = obs.pixel
                if not (0.0 <= u < w and 0.0 <= v < h):
                    raise ValidationError(
                        f"point {p.id} frame {obs.frame_id}: pixel ({u}, {v}) "
                        f"outside frame {w}x{h}"
                    )

    def point_map(self) -> dict[int, ScenePoint]:
        return {p.id: p for p in self.points}


@dataclass(frozen=True)
class SemanticConfig:
    """Label values for each semantic class. Classes must not overlap."""

    ground_labels: frozenset[int]
    object_labels: frozenset[int]
    background_labels: frozenset[int]

    def __post_init__(self):
        g, o, b = (
            frozenset(int(x) for x in self.ground_labels),
            frozenset(int(x) for x in self.object_labels),
            frozenset(int(x) for x in self.background_labels),
        )
        if (g & o) or (g & b) or (o & b):
            raise ValidationError("semantic label sets overlap")
        if not (g | o | b):
            raise ValidationError("semantic config defines no labels at all")
        object.__setattr__(self, "ground_labels", g)
        object.__setattr__(self, "object_labels", o)
        object.__setattr__(self, "background_labels", b)


@dataclass
class LabelMap:
    """Per-frame semantic labels on the pixel grid, row-major."""

    frame_id: int
    labels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 2:
            raise ValidationError("label map must be a 2D grid")
        self.labels = arr.astype(np.uint8)

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    def label_at(self, pixel) -> int:
        """Label under a continuous pixel coordinate (floor lookup)."""
        u, v = float(pixel[0]), float(pixel[1])
        col, row = int(u), int(v)
        if not (0 <= col < self.width and 0 <= row < self.height):
            raise ValidationError(
                f"pixel ({u}, {v}) outside label map {self.width}x{self.height}"
            )
        return int(self.labels[row, col])


@dataclass(frozen=True)
class ObjectPose:
    """Mesh-local to world rigid motion ``x -> R @ x + t``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        # Reuse Pose validation for orthonormality / determinant.
        checked = Pose(self.rotation, self.translation)
        object.__setattr__(self, "rotation", checked.rotation)
        object.__setattr__(self, "translation", checked.center)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.rotation.T + self.translation


@dataclass(frozen=True)
class GroundTruthFrame:
    camera: Pose
    object_pose: ObjectPose


@dataclass
class GroundTruthScene:
    frames: dict[int, GroundTruthFrame]
    mesh: TriangleMesh


# ---------------------------------------------------------------------------
# canonical JSON plumbing


def _reject_constant(token: str):
    raise ParseError(f"non-finite JSON number {token!r}")


def read_json(path) -> object:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh, parse_constant=_reject_constant)
    except FileNotFoundError:
        raise ParseError(f"{path}: file not found")
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})")


def dump_canonical_json(payload, path) -> None:
    """Write JSON with a byte-stable encoding (sorted keys, repr floats)."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
        fh.write("\n")


def _expect(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing key {key!r}")
    value = obj[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParseError(f"{where}.{key}: expected a number")
        return float(value)
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ParseError(f"{where}.{key}: expected an integer")
        return value
    if not isinstance(value, kind):
        raise ParseError(f"{where}.{key}: expected {kind.__name__}")
    return value


def _number_list(obj, key, length, where):
    raw = _expect(obj, key, list, where)
    if len(raw) != length:
        raise ParseError(f"{where}.{key}: expected {length} numbers, got {len(raw)}")
    out = []
    for k, value in enumerate(raw):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParseError(f"{where}.{key}[{k}]: expected a number")
        out.append(float(value))
    return out


# ---------------------------------------------------------------------------
# reconstructions


def load_reconstruction(path) -> Reconstruction:
    """Load and validate one SfM result file."""
    raw = read_json(path)
    where = str(path)
    size = _number_list(raw, "frame_size", 2, where)
    if size != [int(size[0]), int(size[1])]:
        raise ParseError(f"{where}.frame_size: expected integers")
    frame_size = (int(size[0]), int(size[1]))

    cameras: dict[int, Pose] = {}
    for k, cam in enumerate(_expect(raw, "cameras", list, where)):
        at = f"{where}.cameras[{k}]"
        frame = _expect(cam, "frame", int, at)
        if frame in cameras:
            raise ValidationError(f"{at}: duplicate camera for frame {frame}")
        rot = np.array(_number_list(cam, "R", 9, at)).reshape(3, 3)
        center = np.array(_number_list(cam, "c", 3, at))
        try:
            cameras[frame] = Pose(rot, center)
        except ValidationError as exc:
            raise ValidationError(f"{at}: {exc}")

    points: list[ScenePoint] = []
    for k, pt in enumerate(_expect(raw, "points", list, where)):
        at = f"{where}.points[{k}]"
        pid = _expect(pt, "id", int, at)
        xyz = np.array(_number_list(pt, "xyz", 3, at))
        observations = []
        for m, obs in enumerate(_expect(pt, "obs", list, at)):
            oat = f"{at}.obs[{m}]"
            frame = _expect(obs, "frame", int, oat)
            uv = np.array(_number_list(obs, "uv", 2, oat))
            observations.append(Observation(frame, uv))
        try:
            points.append(ScenePoint(pid, xyz, tuple(observations)))
        except ValidationError as exc:
            raise ValidationError(f"{at}: {exc}")

    recon = Reconstruction(frame_size=frame_size, cameras=cameras, points=points)
    recon.validate()
    return recon


def write_reconstruction(recon: Reconstruction, path) -> None:
    """Write a reconstruction in canonical form (sorted, compact)."""
    payload = {
        "frame_size": [int(recon.frame_size[0]), int(recon.frame_size[1])],
        "cameras": [
            {
                "frame": int(frame),
                "R": [float(x) for x in recon.cameras[frame].rotation.ravel()],
                "c": [float(x) for x in recon.cameras[frame].center],
            }
            for frame in sorted(recon.cameras)
        ],
        "points": [
            {
                "id": int(p.id),
                "xyz": [float(x) for x in p.position],
                "obs": [
                    {"frame": int(o.frame_id), "uv": [float(x) for x in o.pixel]}
                    for o in sorted(p.observations, key=lambda o: o.frame_id)
                ],
            }
            for p in sorted(recon.points, key=lambda p: p.id)
        ],
    }
    dump_canonical_json(payload, path)


def pair_cameras(a: Reconstruction, b: Reconstruction) -> list[int]:
    """Frame ids present in both reconstructions, ascending.

    Raises NoCommonFrames if the intersection is empty.
    """
    common = sorted(set(a.cameras) & set(b.cameras))
    if not common:
        raise NoCommonFrames("reconstructions share no frame ids")
    return common


# ---------------------------------------------------------------------------
# label maps (PGM)


def load_pgm(path) -> np.ndarray:
    """Read an 8-bit PGM (P2 ascii or P5 binary) into a (h, w) uint8 grid."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except FileNotFoundError:
        raise ParseError(f"{path}: file not found")

    pos = 0

    def next_token():
        nonlocal pos
        while pos < len(data):
            ch = data[pos : pos + 1]
            if ch == b"#":
                while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            elif ch.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            if data[pos : pos + 1] == b"#":
                break
            pos += 1
        if start == pos:
            raise ParseError(f"{path}: truncated PGM header")
        return data[start:pos]

    magic = next_token()
    if magic not in (b"P2", b"P5"):
        raise ParseError(f"{path}: not a PGM file (magic {magic!r})")
    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError:
        raise ParseError(f"{path}: malformed PGM header")
    if width <= 0 or height <= 0:
        raise ParseError(f"{path}: bad PGM dimensions {width}x{height}")
    if not (0 < maxval <= 255):
        raise ParseError(f"{path}: unsupported PGM maxval {maxval}")

    if magic == b"P5":
        pos += 1  # single whitespace after maxval
        raster = data[pos : pos + width * height]
        if len(raster) != width * height:
            raise ParseError(f"{path}: PGM raster truncated")
        grid = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    else:
        values = data[pos:].split()
        if len(values) != width * height:
            raise ParseError(
                f"{path}: expected {width * height} samples, got {len(values)}"
            )
        try:
            grid = np.array([int(x) for x in values], dtype=np.int64)
        except ValueError:
            raise ParseError(f"{path}: non-numeric PGM sample")
        if grid.min() < 0 or grid.max() > maxval:
            raise ParseError(f"{path}: PGM sample out of range")
        grid = grid.astype(np.uint8).reshape(height, width)
    return grid


def write_pgm(grid: np.ndarray, path) -> None:
    """Write a (h, w) uint8 grid as binary P5."""
    arr = np.asarray(grid, dtype=np.uint8)
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def label_map_path(directory, frame_id: int) -> Path:
    return Path(directory) / f"frame{frame_id:05d}.pgm"


def load_label_maps(directory, config: SemanticConfig) -> dict[int, LabelMap]:
    """Load every ``frame%05d.pgm`` under ``directory``.

    ``config`` is validated up front; label values outside all of its sets
    are legal in the maps and are resolved as background during
    classification. All maps must agree on their dimensions.
    """
    if not isinstance(config, SemanticConfig):
        raise ValidationError("config must be a SemanticConfig")
    directory = Path(directory)
    if not directory.is_dir():
        raise ParseError(f"{directory}: not a directory")
    maps: dict[int, LabelMap] = {}
    shape = None
    for name in sorted(os.listdir(directory)):
        match = _LABEL_NAME.match(name)
        if not match:
            continue
        frame_id = int(match.group(1))
        grid = load_pgm(directory / name)
        if shape is None:
            shape = grid.shape
        elif grid.shape != shape:
            raise DimensionMismatch(
                f"{directory / name}: size {grid.shape[1]}x{grid.shape[0]} differs "
                f"from {shape[1]}x{shape[0]}"
            )
        maps[frame_id] = LabelMap(frame_id, grid)
    return maps


# ---------------------------------------------------------------------------
# semantic config


def load_semantic_config(path) -> SemanticConfig:
    raw = read_json(path)
    where = str(path)
    sets = {}
    for key in ("ground", "object", "background"):
        values = _expect(raw, key, list, where)
        out = set()
        for k, val in enumerate(values):
            if not isinstance(val, int) or isinstance(val, bool) or not (0 <= val <= 255):
                raise ParseError(f"{where}.{key}[{k}]: expected a label in [0, 255]")
            out.add(val)
        sets[key] = frozenset(out)
    return SemanticConfig(sets["ground"], sets["object"], sets["background"])


def write_semantic_config(config: SemanticConfig, path) -> None:
    dump_canonical_json(
        {
            "ground": sorted(config.ground_labels),
            "object": sorted(config.object_labels),
            "background": sorted(config.background_labels),
        },
        path,
    )


# ---------------------------------------------------------------------------
# ground truth (gt.json + OBJ mesh)


def load_obj_mesh(path) -> TriangleMesh:
    """Wavefront OBJ subset: ``v`` and ``f`` records, faces fan-triangulated."""
    vertices: list[list[float]] = []
    triangles: list[tuple[int, int, int]] = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except FileNotFoundError:
        raise MissingMesh(f"{path}: mesh file not found")
    with fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split("#", 1)[0].split()
            if not fields:
                continue
            tag = fields[0]
            if tag == "v":
                if len(fields) < 4:
                    raise ParseError(f"{path}:{lineno}: vertex needs 3 coordinates")
                try:
                    vertices.append([float(x) for x in fields[1:4]])
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: bad vertex coordinate")
            elif tag == "f":
                refs = []
                for field in fields[1:]:
                    head = field.split("/", 1)[0]
                    try:
                        idx = int(head)
                    except ValueError:
                        raise ParseError(f"{path}:{lineno}: bad face index {field!r}")
                    if idx < 0:
                        idx = len(vertices) + 1 + idx
                    if not (1 <= idx <= len(vertices)):
                        raise ParseError(f"{path}:{lineno}: face index {idx} out of range")
                    refs.append(idx - 1)
                if len(refs) < 3:
                    raise ParseError(f"{path}:{lineno}: face needs at least 3 vertices")
                for k in range(1, len(refs) - 1):
                    triangles.append((refs[0], refs[k], refs[k + 1]))
            # all other records (vn, vt, o, g, usemtl, ...) are ignored
    try:
        return TriangleMesh(np.array(vertices, dtype=float).reshape(-1, 3), np.array(triangles, dtype=np.int64).reshape(-1, 3))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}")


def write_obj_mesh(mesh: TriangleMesh, path) -> None:
    lines = []
    for v in mesh.vertices:
        lines.append(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}")
    for t in mesh.triangles:
        lines.append(f"f {int(t[0]) + 1} {int(t[1]) + 1} {int(t[2]) + 1}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def load_ground_truth(path) -> GroundTruthScene:
    """Load gt.json; the mesh path inside is relative to the json file."""
    raw = read_json(path)
    where = str(path)
    mesh_name = _expect(raw, "mesh", str, where)
    mesh = load_obj_mesh(Path(path).parent / mesh_name)

    frames: dict[int, GroundTruthFrame] = {}
    for k, entry in enumerate(_expect(raw, "frames", list, where)):
        at = f"{where}.frames[{k}]"
        frame = _expect(entry, "frame", int, at)
        if frame in frames:
            raise ValidationError(f"{at}: duplicate frame {frame}")
        cam = _expect(entry, "camera", dict, at)
        obj = _expect(entry, "object", dict, at)
        try:
            camera = Pose(
                np.array(_number_list(cam, "R", 9, f"{at}.camera")).reshape(3, 3),
                np.array(_number_list(cam, "c", 3, f"{at}.camera")),
            )
            object_pose = ObjectPose(
                np.array(_number_list(obj, "R", 9, f"{at}.object")).reshape(3, 3),
                np.array(_number_list(obj, "t", 3, f"{at}.object")),
            )
        except ValidationError as exc:
            raise ValidationError(f"{at}: {exc}")
        frames[frame] = GroundTruthFrame(camera=camera, object_pose=object_pose)
    if not frames:
        raise ValidationError(f"{where}: ground truth contains no frames")
    return GroundTruthScene(frames=frames, mesh=mesh)


def write_ground_truth(scene: GroundTruthScene, path, mesh_name: str) -> None:
    """Write gt.json referencing ``mesh_name`` (the OBJ is written separately)."""
    payload = {
        "mesh": mesh_name,
        "frames": [
            {
                "frame": int(frame),
                "camera": {
                    "R": [float(x) for x in scene.frames[frame].camera.rotation.ravel()],
                    "c": [float(x) for x in scene.frames[frame].camera.center],
                },
                "object": {
                    "R": [float(x) for x in scene.frames[frame].object_pose.rotation.ravel()],
                    "t": [float(x) for x in scene.frames[frame].object_pose.translation],
                },
            }
            for frame in sorted(scene.frames)
        ],
    }
    dump_canonical_json(payload, path)
