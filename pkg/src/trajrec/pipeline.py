"""End-to-end reconstruction pipeline shared by the CLI, tests and demos."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .dataio import LabelMap, Reconstruction, SemanticConfig, pair_cameras
from .errors import (
    DegenerateGroundSet,
    NoGroundObservations,
    TrajrecError,
    ValidationError,
)
from .geometry import Plane
from .ground import (
    RansacParams,
    classify_points,
    fit_ground_plane,
    frame_ground_measurements,
    frame_object_pixels,
    select_local_ground_points,
)
from .trajectory import (
    ScaleEstimate,
    TrajectoryFamily,
    candidate_view_pairs,
    compute_family,
    estimate_scale_constant_distance,
    estimate_scale_intersection,
    realize_trajectory,
)

METHODS = ("constant-distance", "intersection")


@dataclass
class PipelineResult:
    estimate: ScaleEstimate
    trajectory: dict[int, np.ndarray]
    family: TrajectoryFamily
    planes: dict[int, Plane]
    ground_point_ids: list[int]
    paired_frames: list[int]
    timings: dict[str, float] = field(default_factory=dict)


def fit_frame_planes(
    sfm_o: Reconstruction,
    sfm_b: Reconstruction,
    ground_ids,
    frames,
    seed: int,
    params: RansacParams,
    num_b: int,
) -> dict[int, Plane]:
    """Per-frame ground planes; frames that cannot support a fit are skipped.

    If not a single frame yields a plane the last per-frame error is
    re-raised, since in that case the run cannot continue and the reason is
    frame-specific.
    """
    planes: dict[int, Plane] = {}
    last_error: Optional[TrajrecError] = None
    for frame in frames:
        pixels = frame_object_pixels(sfm_o, frame)
        measurements = frame_ground_measurements(sfm_b, ground_ids, frame)
        try:
            local = select_local_ground_points(frame, pixels, measurements, num_b=num_b)
            # Per-frame seeds decorrelate RANSAC draws across frames while
            # keeping the whole run a function of the one user-facing seed.
            planes[frame] = fit_ground_plane(
                local, sfm_b.cameras[frame].center, seed ^ frame, params
            )
        except (NoGroundObservations, DegenerateGroundSet) as exc:
            last_error = exc
    if not planes:
        raise last_error if last_error is not None else ValidationError(
            "no frames available for plane fitting"
        )
    return planes


def reconstruct_trajectory(
    sfm_o: Reconstruction,
    sfm_b: Reconstruction,
    label_maps: Mapping[int, LabelMap],
    semantic: SemanticConfig,
    method: str = "constant-distance",
    num_b: int = 50,
    ransac: RansacParams = RansacParams(),
    seed: int = 0,
    pair_stride: Optional[int] = None,
) -> PipelineResult:
    """Classify ground, fit planes, build the family, estimate the scale."""
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}, expected one of {METHODS}")
    timings: dict[str, float] = {}
    mark = time.perf_counter()

    def lap(stage: str) -> None:
        nonlocal mark
        now = time.perf_counter()
        timings[stage] = now - mark
        mark = now

    paired = pair_cameras(sfm_o, sfm_b)
    lap("pair_cameras")
    labeled = classify_points(sfm_b, label_maps, semantic)
    ground_ids = [lp.point_id for lp in labeled if lp.is_ground]
    lap("classify_points")
    planes = fit_frame_planes(sfm_o, sfm_b, ground_ids, paired, seed, ransac, num_b)
    lap("fit_ground_planes")
    family = compute_family(sfm_o, sfm_b, paired)
    lap("compute_family")
    if method == "constant-distance":
        pairs = candidate_view_pairs(sorted(planes), stride=pair_stride)
        estimate = estimate_scale_constant_distance(family, planes, pairs)
    else:
        estimate = estimate_scale_intersection(family, planes)
    lap("estimate_scale")
    trajectory = realize_trajectory(family, estimate.scale_ratio)
    lap("realize_trajectory")
    return PipelineResult(
        estimate=estimate,
        trajectory=trajectory,
        family=family,
        planes=planes,
        ground_point_ids=ground_ids,
        paired_frames=paired,
        timings=timings,
    )
