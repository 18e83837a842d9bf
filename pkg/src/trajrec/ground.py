"""Ground point classification, local selection, and plane fitting.

The background reconstruction mixes ground points with everything else.
Classification votes each point's observations through per-frame label
maps. Points seen fewer than four times are too unstable to trust and are
dropped outright. A local subset of ground points is then picked per frame
in image space, nearest to the object's observations, and a RANSAC plane
fit turns that subset into the frame's ground plane.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .dataio import LabelMap, Reconstruction, SemanticConfig
from .errors import (
    DegenerateGroundSet,
    DimensionMismatch,
    MissingLabelMap,
    NoGroundObservations,
    ValidationError,
)
from .geometry import Plane

MIN_OBSERVATIONS = 4
DEFAULT_NUM_B = 50


@dataclass(frozen=True)
class LabeledPoint:
    point_id: int
    is_ground: bool
    observation_count: int


@dataclass(frozen=True)
class GroundMeasurement:
    """One ground point as seen in one frame: its 3D position and pixel."""

    point_id: int
    position: np.ndarray
    pixel: np.ndarray


@dataclass
class LocalGroundSet:
    """Ground points selected for a single frame."""

    frame_id: int
    positions: np.ndarray  # (K, 3)
    source_ids: np.ndarray  # (K,)


@dataclass(frozen=True)
class RansacParams:
    iterations: int = 256
    inlier_threshold: Optional[float] = None  # None: 0.01 * bbox diagonal
    threshold_fraction: float = 0.01

    def __post_init__(self):
        if self.iterations < 1:
            raise ValidationError("RansacParams.iterations must be >= 1")
        if self.inlier_threshold is not None and self.inlier_threshold <= 0:
            raise ValidationError("RansacParams.inlier_threshold must be positive")
        if self.threshold_fraction <= 0:
            raise ValidationError("RansacParams.threshold_fraction must be positive")


@dataclass
class RansacReport:
    """Diagnostics from one plane fit, mainly for tests."""

    hypothesis_counts: np.ndarray
    best_hypothesis_count: int
    returned_count: int
    refit_used: bool
    threshold: float


def classify_points(
    sfm_b: Reconstruction,
    label_maps: Mapping[int, LabelMap],
    config: SemanticConfig,
) -> list[LabeledPoint]:
    """Vote each stable background point into ground / non-ground.

    A point needs at least four observations to be classified at all. Each
    observation looks up the label under its pixel; ground labels vote
    ground, anything else (object, background, or values outside every
    configured set) votes non-ground. Strict majority wins, ties go to
    non-ground.
    """
    w, h = sfm_b.frame_size
    out: list[LabeledPoint] = []
    for point in sfm_b.points:
        if len(point.observations) < MIN_OBSERVATIONS:
            continue
        ground_votes = 0
        for obs in point.observations:
            if obs.frame_id not in label_maps:
                raise MissingLabelMap(obs.frame_id)
            label_map = label_maps[obs.frame_id]
            if (label_map.width, label_map.height) != (w, h):
                raise DimensionMismatch(
                    f"label map for frame {obs.frame_id} is "
                    f"{label_map.width}x{label_map.height}, frames are {w}x{h}"
                )
            if label_map.label_at(obs.pixel) in config.ground_labels:
                ground_votes += 1
        total = len(point.observations)
        out.append(
            LabeledPoint(
                point_id=point.id,
                is_ground=ground_votes > total - ground_votes,
                observation_count=total,
            )
        )
    return out


def frame_object_pixels(sfm_o: Reconstruction, frame_id: int) -> np.ndarray:
    """Pixels of every object point observed in ``frame_id``, shape (M, 2)."""
    pixels = [
        obs.pixel
        for point in sfm_o.points
        for obs in point.observations
        if obs.frame_id == frame_id
    ]
    if not pixels:
        return np.zeros((0, 2))
    return np.vstack(pixels)


def frame_ground_measurements(
    sfm_b: Reconstruction,
    ground_ids: Sequence[int],
    frame_id: int,
) -> list[GroundMeasurement]:
    """Ground-classified points of ``sfm_b`` observed in ``frame_id``."""
    wanted = set(ground_ids)
    out = []
    for point in sfm_b.points:
        if point.id not in wanted:
            continue
        for obs in point.observations:
            if obs.frame_id == frame_id:
                out.append(GroundMeasurement(point.id, point.position, obs.pixel))
                break
    return out


def select_local_ground_points(
    frame_id: int,
    object_pixels: np.ndarray,
    ground_measurements: Sequence[GroundMeasurement],
    num_b: int = DEFAULT_NUM_B,
) -> LocalGroundSet:
    """Pick the ground points closest in image space to the object.

    Round k adds, for every object pixel, its k-th nearest ground
    measurement (kd-tree over pixel coordinates). Full rounds run until at
    least ``num_b`` distinct 3D points are collected or the measurements
    are exhausted, so the result can overshoot ``num_b`` slightly but never
    stops mid-round.
    """
    if num_b < 1:
        raise ValidationError("num_b must be >= 1")
    if len(ground_measurements) == 0:
        raise NoGroundObservations(frame_id)
    object_pixels = np.asarray(object_pixels, dtype=float).reshape(-1, 2)
    if len(object_pixels) == 0:
        raise NoGroundObservations(frame_id)

    pixels = np.vstack([m.pixel for m in ground_measurements])
    k_max = len(ground_measurements)
    tree = cKDTree(pixels)
    # (M, k_max) neighbor indices, columns ordered by pixel distance.
    _, order = tree.query(object_pixels, k=k_max)
    order = np.atleast_2d(order)
    if k_max == 1:
        order = order.reshape(-1, 1)

    chosen: dict[int, int] = {}  # point_id -> measurement index, insertion ordered
    for k in range(k_max):
        for m in range(len(object_pixels)):
            idx = int(order[m, k])
            pid = ground_measurements[idx].point_id
            if pid not in chosen:
                chosen[pid] = idx
        if len(chosen) >= num_b:
            break

    indices = list(chosen.values())
    return LocalGroundSet(
        frame_id=frame_id,
        positions=np.vstack([ground_measurements[i].position for i in indices]),
        source_ids=np.array([ground_measurements[i].point_id for i in indices]),
    )


def _ls_plane(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Total least squares plane: (unit normal, centroid)."""
    centroid = points.mean(axis=0)
    _, s, vt = np.linalg.svd(points - centroid)
    return vt[2], centroid


def fit_ground_plane_details(
    ground_set: LocalGroundSet,
    camera_center: np.ndarray,
    seed: int,
    params: RansacParams = RansacParams(),
) -> tuple[Plane, RansacReport]:
    """RANSAC plane fit returning diagnostics alongside the plane."""
    points = np.asarray(ground_set.positions, dtype=float)
    n = len(points)
    if n < 3:
        raise DegenerateGroundSet(f"frame {ground_set.frame_id}: only {n} ground points")
    spread = np.linalg.svd(points - points.mean(axis=0), compute_uv=False)
    if spread[1] <= 1e-12 * max(spread[0], 1e-300):
        raise DegenerateGroundSet(f"frame {ground_set.frame_id}: ground points are collinear")

    if params.inlier_threshold is not None:
        threshold = params.inlier_threshold
    else:
        diagonal = np.linalg.norm(points.max(axis=0) - points.min(axis=0))
        threshold = params.threshold_fraction * diagonal

    rng = np.random.default_rng(seed)
    iters = params.iterations
    # Distinct index triples via the random-keys trick; deterministic in seed.
    keys = rng.random((iters, n))
    samples = np.argpartition(keys, 3, axis=1)[:, :3] if n > 3 else np.tile(np.arange(3), (iters, 1))

    a = points[samples[:, 0]]
    normals = np.cross(points[samples[:, 1]] - a, points[samples[:, 2]] - a)
    norms = np.linalg.norm(normals, axis=1)
    ok = norms > 1e-12
    counts = np.zeros(iters, dtype=int)
    if np.any(ok):
        unit = normals[ok] / norms[ok][:, None]
        # |(p - a) . n| for every (hypothesis, point) pair at once.
        dists = np.abs(np.einsum("hpd,hd->hp", points[None, :, :] - a[ok][:, None, :], unit))
        counts[ok] = (dists <= threshold).sum(axis=1)
    if counts.max() == 0:
        raise DegenerateGroundSet(f"frame {ground_set.frame_id}: no usable plane hypothesis")

    best = int(np.argmax(counts))  # argmax takes the earliest maximal iteration
    best_a = points[samples[best, 0]]
    best_n = normals[best] / norms[best]
    inliers = np.abs((points - best_a) @ best_n) <= threshold

    refit_n, refit_anchor = _ls_plane(points[inliers])
    refit_count = int((np.abs((points - refit_anchor) @ refit_n) <= threshold).sum())
    if refit_count >= counts[best]:
        normal, anchor, count, refit_used = refit_n, refit_anchor, refit_count, True
    else:
        # Keep the hypothesis plane; project the inlier centroid onto it so
        # the anchor actually lies on the plane.
        centroid = points[inliers].mean(axis=0)
        anchor = centroid - ((centroid - best_a) @ best_n) * best_n
        normal, count, refit_used = best_n, int(counts[best]), False

    # Orient the normal toward the camera.
    if normal @ (np.asarray(camera_center, dtype=float) - anchor) < 0:
        normal = -normal

    plane = Plane(normal, anchor)
    report = RansacReport(
        hypothesis_counts=counts,
        best_hypothesis_count=int(counts[best]),
        returned_count=count,
        refit_used=refit_used,
        threshold=threshold,
    )
    return plane, report


def fit_ground_plane(
    ground_set: LocalGroundSet,
    camera_center: np.ndarray,
    seed: int,
    params: RansacParams = RansacParams(),
) -> Plane:
    """RANSAC plane through a local ground set, normal facing the camera."""
    plane, _ = fit_ground_plane_details(ground_set, camera_center, seed, params)
    return plane
