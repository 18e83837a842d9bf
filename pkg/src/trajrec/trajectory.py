"""Trajectory family construction and scale-ratio estimation.

The object-relative and background-relative reconstructions of the same
video agree on cameras up to an unknown scale ratio ``r``. For every frame
``i`` and object point ``j`` the point's background-frame position is

    o_ji(r) = c_i + r * v_ji,      v_ji = R_i_b^T R_i_o (o_j - c_i_o)

a one-parameter family of trajectories. ``r`` is recovered from the
constraint that object points keep a constant height over the local ground
plane while the object moves over it: equating the plane distance of
``o_ji(r)`` in two views ``i, i'`` and solving for ``r`` gives, per point,

    r = (n' . (c' - p') - n . (c - p)) / (n . v_ji - n' . v_ji')

The numerator is the camera height difference between the two views (in
plane coordinates), so pairs of views at similar heights are degenerate;
pairs are ranked to prefer large numerators and mutually consistent
per-point ratios, and the winner is solved in least squares over all its
points.

An intersection baseline is also provided: cast each ``v_ji`` ray onto the
frame's ground plane, keep the smallest positive parameter per frame (the
lowest object point nearly touches the ground), and take the median over
frames. It needs an actual ground contact to be unbiased, which is exactly
what it is a baseline for.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Optional, Sequence

import numpy as np

from .dataio import Reconstruction, dump_canonical_json, read_json, _expect, _number_list
from .errors import (
    AllPairsDegenerate,
    EmptyObjectCloud,
    IllConditionedPair,
    NonPositiveScale,
    NoValidFrames,
    NoValidPairs,
    ParseError,
    ValidationError,
)
from .geometry import Plane

MAX_EXHAUSTIVE_FRAMES = 500


@dataclass
class TrajectoryFamily:
    """Per-frame camera centers and ray directions for every object point.

    ``centers[i]`` is the background camera center of ``frame_ids[i]``;
    ``directions[i, j]`` is ``v`` for object point ``point_ids[j]`` in that
    frame. Realizing the family at a scale ``r`` yields world positions
    ``centers[i] + r * directions[i, j]``.
    """

    frame_ids: np.ndarray  # (N,)
    point_ids: np.ndarray  # (J,)
    centers: np.ndarray  # (N, 3)
    directions: np.ndarray  # (N, J, 3)

    def frame_index(self, frame_id: int) -> int:
        hits = np.nonzero(self.frame_ids == frame_id)[0]
        if len(hits) == 0:
            raise ValidationError(f"frame {frame_id} not in family")
        return int(hits[0])

    def point_index(self, point_id: int) -> int:
        hits = np.nonzero(self.point_ids == point_id)[0]
        if len(hits) == 0:
            raise ValidationError(f"point {point_id} not in family")
        return int(hits[0])


@dataclass(frozen=True)
class ViewPairScore:
    pair: tuple[int, int]
    numerator: float
    ratio_variance: float
    conditioned_points: int
    distance_rank: int
    variance_rank: int
    combined_rank: int


@dataclass(frozen=True)
class ScaleEstimate:
    scale_ratio: float
    method: str
    chosen_pair: Optional[tuple[int, int]]
    per_point_ratios: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        r = float(self.scale_ratio)
        if not np.isfinite(r) or r <= 0.0:
            raise NonPositiveScale(f"scale ratio must be positive, got {r!r}")
        object.__setattr__(self, "scale_ratio", r)


def compute_family(
    sfm_o: Reconstruction,
    sfm_b: Reconstruction,
    paired_frames: Sequence[int],
) -> TrajectoryFamily:
    """Build the trajectory family over the given common frames."""
    if not sfm_o.points:
        raise EmptyObjectCloud("object reconstruction has no points")
    frames = sorted(paired_frames)
    for f in frames:
        if f not in sfm_o.cameras or f not in sfm_b.cameras:
            raise ValidationError(f"frame {f} missing from one of the reconstructions")

    points = sorted(sfm_o.points, key=lambda p: p.id)
    point_ids = np.array([p.id for p in points])
    cloud = np.vstack([p.position for p in points])  # (J, 3)

    centers = np.zeros((len(frames), 3))
    directions = np.zeros((len(frames), len(points), 3))
    for k, f in enumerate(frames):
        pose_o = sfm_o.cameras[f]
        pose_b = sfm_b.cameras[f]
        centers[k] = pose_b.center
        # v = R_b^T R_o (o - c_o), as row vectors.
        directions[k] = (cloud - pose_o.center) @ pose_o.rotation.T @ pose_b.rotation

    norms = np.linalg.norm(directions, axis=2)
    if norms.min() <= 0.0:
        bad = np.argwhere(norms == norms.min())[0]
        raise ValidationError(
            f"object point {point_ids[bad[1]]} coincides with the frame "
            f"{frames[bad[0]]} object camera center"
        )
    return TrajectoryFamily(
        frame_ids=np.array(frames), point_ids=point_ids, centers=centers, directions=directions
    )


def realize_trajectory(family: TrajectoryFamily, scale_ratio: float) -> dict[int, np.ndarray]:
    """World positions of every object point per frame at a given scale."""
    r = float(scale_ratio)
    if not np.isfinite(r) or r <= 0.0:
        raise NonPositiveScale(f"scale ratio must be positive, got {scale_ratio!r}")
    out = {}
    for k, frame in enumerate(family.frame_ids):
        out[int(frame)] = family.centers[k] + r * family.directions[k]
    return out


def _pair_terms(
    family: TrajectoryFamily,
    plane_i: Plane,
    plane_ip: Plane,
    frame_i: int,
    frame_ip: int,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Numerator, per-point denominators, and their conditioning floor."""
    ki = family.frame_index(frame_i)
    kp = family.frame_index(frame_ip)
    n_i, p_i = plane_i.normal, plane_i.anchor
    n_p, p_p = plane_ip.normal, plane_ip.anchor
    numerator = float(n_p @ (family.centers[kp] - p_p) - n_i @ (family.centers[ki] - p_i))
    d_i = family.directions[ki] @ n_i
    d_p = family.directions[kp] @ n_p
    denominators = d_i - d_p
    floor = 1e-9 * (np.abs(d_i) + np.abs(d_p) + 1.0)
    return numerator, denominators, floor


def scale_from_view_pair(
    family: TrajectoryFamily,
    plane_i: Plane,
    plane_ip: Plane,
    frame_i: int,
    frame_ip: int,
    point_id: int,
) -> float:
    """Single-point scale ratio from one view pair.

    Raises IllConditionedPair when the denominator sits below the relative
    conditioning floor for that point.
    """
    numerator, denominators, floor = _pair_terms(family, plane_i, plane_ip, frame_i, frame_ip)
    j = family.point_index(point_id)
    if abs(denominators[j]) <= floor[j]:
        raise IllConditionedPair(
            f"pair ({frame_i}, {frame_ip}) point {point_id}: denominator "
            f"{denominators[j]:.3e} under floor {floor[j]:.3e}"
        )
    return numerator / float(denominators[j])


def candidate_view_pairs(
    frame_ids: Sequence[int],
    stride: Optional[int] = None,
) -> list[tuple[int, int]]:
    """All frame pairs, thinned by ``stride`` for long sequences.

    With ``stride=None`` every pair is used up to 500 frames; beyond that
    the smallest stride bringing the frame count back under 500 applies.
    """
    frames = sorted(frame_ids)
    if stride is None:
        stride = 1 if len(frames) <= MAX_EXHAUSTIVE_FRAMES else -(-len(frames) // MAX_EXHAUSTIVE_FRAMES)
    if stride < 1:
        raise ValidationError("stride must be >= 1")
    return list(combinations(frames[::stride], 2))


def rank_view_pairs(
    family: TrajectoryFamily,
    planes: Mapping[int, Plane],
    candidate_pairs: Sequence[tuple[int, int]],
) -> list[ViewPairScore]:
    """Order candidate pairs by their joint distance / consistency rank.

    Pairs keep their per-point equations only where the denominator clears
    its conditioning floor; pairs with fewer than two usable points are
    dropped. Rank 1 in distance goes to the largest absolute numerator
    (the biggest camera height change), rank 1 in variance to the most
    mutually consistent per-point ratios. Ties and the final order resolve
    lexicographically by pair so the ranking is deterministic.
    """
    stats = []
    for pair in candidate_pairs:
        i, ip = int(pair[0]), int(pair[1])
        if i not in planes or ip not in planes:
            continue
        numerator, denominators, floor = _pair_terms(family, planes[i], planes[ip], i, ip)
        usable = np.abs(denominators) > floor
        if int(usable.sum()) < 2:
            continue
        ratios = numerator / denominators[usable]
        stats.append(((i, ip), numerator, float(np.var(ratios, ddof=1)), int(usable.sum())))
    if not stats:
        raise NoValidPairs("no view pair has two conditioned points")

    by_distance = sorted(stats, key=lambda s: (-abs(s[1]), s[0]))
    by_variance = sorted(stats, key=lambda s: (s[2], s[0]))
    distance_rank = {s[0]: k + 1 for k, s in enumerate(by_distance)}
    variance_rank = {s[0]: k + 1 for k, s in enumerate(by_variance)}

    scores = [
        ViewPairScore(
            pair=pair,
            numerator=num,
            ratio_variance=var,
            conditioned_points=cnt,
            distance_rank=distance_rank[pair],
            variance_rank=variance_rank[pair],
            combined_rank=distance_rank[pair] + variance_rank[pair],
        )
        for pair, num, var, cnt in stats
    ]
    scores.sort(key=lambda s: (s.combined_rank, s.pair))
    return scores


def estimate_scale_constant_distance(
    family: TrajectoryFamily,
    planes: Mapping[int, Plane],
    candidate_pairs: Optional[Sequence[tuple[int, int]]] = None,
) -> ScaleEstimate:
    """Primary estimator: best-ranked view pair, solved in least squares.

    Walks the ranked pairs and returns the first one whose least-squares
    solution ``r = b * sum(A_j) / sum(A_j^2)`` is finite and positive.
    Raises AllPairsDegenerate when no pair yields a usable scale, which is
    the signature of camera motion parallel to the object motion.
    """
    if candidate_pairs is None:
        usable = [int(f) for f in family.frame_ids if int(f) in planes]
        candidate_pairs = candidate_view_pairs(usable)
    try:
        scores = rank_view_pairs(family, planes, candidate_pairs)
    except NoValidPairs as exc:
        raise AllPairsDegenerate(str(exc))

    for score in scores:
        i, ip = score.pair
        numerator, denominators, floor = _pair_terms(family, planes[i], planes[ip], i, ip)
        usable = np.abs(denominators) > floor
        a = denominators[usable]
        r = numerator * a.sum() / (a * a).sum()
        if np.isfinite(r) and r > 0.0:
            return ScaleEstimate(
                scale_ratio=float(r),
                method="constant-distance",
                chosen_pair=score.pair,
                per_point_ratios=tuple(float(x) for x in numerator / a),
            )
    raise AllPairsDegenerate("every ranked view pair produced a non-positive scale")


def estimate_scale_intersection(
    family: TrajectoryFamily,
    planes: Mapping[int, Plane],
) -> ScaleEstimate:
    """Baseline estimator: smallest forward ray/ground hit per frame, then median."""
    minima = []
    frames_used = []
    for k, frame in enumerate(family.frame_ids):
        frame = int(frame)
        if frame not in planes:
            continue
        plane = planes[frame]
        dirs = family.directions[k]
        denominators = dirs @ plane.normal
        norms = np.linalg.norm(dirs, axis=1)
        numerator = float(plane.normal @ (plane.anchor - family.centers[k]))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = numerator / denominators
        forward = (np.abs(denominators) > 1e-9 * norms) & (ratios > 0.0) & np.isfinite(ratios)
        if not forward.any():
            continue
        minima.append(float(ratios[forward].min()))
        frames_used.append(frame)
    if not minima:
        raise NoValidFrames("no frame has a forward ray/ground intersection")
    return ScaleEstimate(
        scale_ratio=float(np.median(minima)),
        method="intersection",
        chosen_pair=None,
        per_point_ratios=tuple(minima),
    )


# ---------------------------------------------------------------------------
# trajectory.json / PLY output


@dataclass
class TrajectoryFile:
    method: str
    scale_ratio: float
    chosen_pair: Optional[tuple[int, int]]
    frames: dict[int, np.ndarray]  # frame id -> (J, 3)


def write_trajectory(
    estimate: ScaleEstimate,
    realized: Mapping[int, np.ndarray],
    path,
) -> None:
    payload = {
        "method": estimate.method,
        "scale_ratio": float(estimate.scale_ratio),
        "chosen_pair": None if estimate.chosen_pair is None else [int(x) for x in estimate.chosen_pair],
        "frames": [
            {
                "frame": int(frame),
                "points": [[float(x) for x in row] for row in np.asarray(realized[frame])],
            }
            for frame in sorted(realized)
        ],
    }
    dump_canonical_json(payload, path)


def load_trajectory(path) -> TrajectoryFile:
    raw = read_json(path)
    where = str(path)
    method = _expect(raw, "method", str, where)
    scale = _expect(raw, "scale_ratio", float, where)
    pair_raw = raw.get("chosen_pair") if isinstance(raw, dict) else None
    pair = None
    if pair_raw is not None:
        if not (isinstance(pair_raw, list) and len(pair_raw) == 2):
            raise ParseError(f"{where}.chosen_pair: expected two frame ids or null")
        pair = (int(pair_raw[0]), int(pair_raw[1]))
    frames: dict[int, np.ndarray] = {}
    for k, entry in enumerate(_expect(raw, "frames", list, where)):
        at = f"{where}.frames[{k}]"
        frame = _expect(entry, "frame", int, at)
        if frame in frames:
            raise ValidationError(f"{at}: duplicate frame {frame}")
        rows = _expect(entry, "points", list, at)
        pts = []
        for m, row in enumerate(rows):
            if not (isinstance(row, list) and len(row) == 3):
                raise ParseError(f"{at}.points[{m}]: expected [x, y, z]")
            pts.append([float(x) for x in row])
        frames[frame] = np.asarray(pts, dtype=float).reshape(-1, 3)
    if not frames:
        raise ValidationError(f"{where}: trajectory contains no frames")
    return TrajectoryFile(method=method, scale_ratio=scale, chosen_pair=pair, frames=frames)


def write_ply(points: np.ndarray, path) -> None:
    """ASCII PLY point cloud (one frame's realized object points)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(pts)}",
        "property double x",
        "property double y",
        "property double z",
        "end_header",
    ]
    for row in pts:
        lines.append(f"{float(row[0])!r} {float(row[1])!r} {float(row[2])!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
