"""Ground-truth alignment and error metrics.

The background reconstruction lives in its own similarity frame. To compare
against ground truth it is registered with a two-stage similarity fit over
the cameras: a first Umeyama pass on camera centers pins down the scale,
then each camera contributes two extra virtual points (its up and forward
axes, extended by the median ground-truth camera spacing) so the second
pass also has to match orientations. Without the augmentation a camera path
with a symmetric center layout can be matched equally well by a flipped
solution; the axis endpoints break that tie.

Trajectory quality is the mean distance between realized object points and
the ground-truth mesh posed per frame. The reference scale ratio
reconstructs what the estimated ratio should have been, by casting each
object point's camera ray onto the posed mesh (nested medians over points
and frames) and dividing by the registration scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .dataio import GroundTruthScene, Reconstruction, dump_canonical_json
from .errors import (
    DegenerateConfiguration,
    FrameMissingFromGroundTruth,
    NoCommonFrames,
    NoRayHits,
)
from .geometry import (
    Pose,
    SimilarityTransform,
    point_mesh_distances,
    rays_mesh_intersections,
    umeyama_similarity,
    world_to_camera,
)

UP_AXIS = np.array([0.0, 1.0, 0.0])
FORWARD_AXIS = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class RegistrationResult:
    transform: SimilarityTransform
    rms_center_residual: float


@dataclass
class TrajectoryErrorReport:
    per_frame_mean: dict[int, float]
    overall_mean: float
    point_count: int


def register_to_ground_truth(
    cameras: Mapping[int, Pose],
    gt: GroundTruthScene,
) -> RegistrationResult:
    """Similarity transform taking reconstruction space into GT space."""
    common = sorted(set(cameras) & set(gt.frames))
    if not common:
        raise NoCommonFrames("reconstruction and ground truth share no frames")
    if len(common) < 3:
        raise DegenerateConfiguration(
            f"need at least 3 common frames to register, got {len(common)}"
        )
    rec_centers = np.vstack([cameras[f].center for f in common])
    gt_centers = np.vstack([gt.frames[f].camera.center for f in common])

    stage1 = umeyama_similarity(rec_centers, gt_centers)

    # Axis endpoints are extended by the median consecutive camera spacing,
    # expressed on each side in its own scale.
    spacing = float(np.median(np.linalg.norm(np.diff(gt_centers, axis=0), axis=1)))
    m_rec = spacing / stage1.scale

    def axis_points(poses, centers, magnitude):
        ups = np.vstack([p.rotation.T @ UP_AXIS for p in poses])
        fwds = np.vstack([p.rotation.T @ FORWARD_AXIS for p in poses])
        return np.vstack([centers, centers + magnitude * ups, centers + magnitude * fwds])

    rec_poses = [cameras[f] for f in common]
    gt_poses = [gt.frames[f].camera for f in common]
    source = axis_points(rec_poses, rec_centers, m_rec)
    target = axis_points(gt_poses, gt_centers, spacing)

    transform = umeyama_similarity(source, target)
    residual = float(
        np.sqrt(np.mean(np.sum((transform.apply(rec_centers) - gt_centers) ** 2, axis=1)))
    )
    return RegistrationResult(transform=transform, rms_center_residual=residual)


def trajectory_error(
    trajectory: Mapping[int, np.ndarray],
    gt: GroundTruthScene,
) -> TrajectoryErrorReport:
    """Mean point-to-mesh distance, per frame and overall.

    ``trajectory`` must already be expressed in ground-truth coordinates
    (apply the registration transform to realized points first).
    """
    per_frame: dict[int, float] = {}
    total = 0.0
    count = 0
    for frame in sorted(trajectory):
        if frame not in gt.frames:
            raise FrameMissingFromGroundTruth(frame)
        posed = gt.mesh.transformed(
            gt.frames[frame].object_pose.rotation,
            gt.frames[frame].object_pose.translation,
        )
        d = point_mesh_distances(np.asarray(trajectory[frame], dtype=float), posed)
        per_frame[int(frame)] = float(d.mean())
        total += float(d.sum())
        count += len(d)
    return TrajectoryErrorReport(
        per_frame_mean=per_frame,
        overall_mean=total / count if count else 0.0,
        point_count=count,
    )


def object_to_virtual_ratio(sfm_o: Reconstruction, gt: GroundTruthScene) -> float:
    """Median over frames of median per-point ray-to-mesh range ratios.

    For each frame the object points are moved into camera coordinates and
    a ray is cast from the camera origin through each of them onto the
    posed ground-truth mesh. The hit parameter equals the metric range over
    the reconstructed range, so its nested median estimates the scale
    between the object reconstruction and the virtual (ground-truth) world.
    Points whose rays miss are skipped; frames where everything misses are
    skipped; if every ray in every frame misses, NoRayHits is raised.
    """
    common = sorted(set(sfm_o.cameras) & set(gt.frames))
    if not common:
        raise NoCommonFrames("object reconstruction and ground truth share no frames")
    if not sfm_o.points:
        raise NoRayHits("object reconstruction has no points")
    cloud = np.vstack([p.position for p in sorted(sfm_o.points, key=lambda p: p.id)])

    frame_medians = []
    for frame in common:
        pose_o = sfm_o.cameras[frame]
        gt_frame = gt.frames[frame]
        rays = world_to_camera(pose_o, cloud)
        mesh_cam = gt.mesh.transformed(
            gt_frame.camera.rotation @ gt_frame.object_pose.rotation,
            world_to_camera(gt_frame.camera, gt_frame.object_pose.translation),
        )
        t, tri = rays_mesh_intersections(np.zeros(3), rays, mesh_cam)
        hit = tri >= 0
        if not hit.any():
            continue
        # The ray direction is the reconstructed point itself, so the hit
        # parameter t is exactly ||metric point|| / ||reconstructed point||.
        frame_medians.append(float(np.median(t[hit])))
    if not frame_medians:
        raise NoRayHits("every object ray misses the ground truth mesh")
    return float(np.median(frame_medians))


def reference_scale_ratio(
    sfm_o: Reconstruction,
    gt: GroundTruthScene,
    registration: RegistrationResult,
) -> float:
    """Reference object-to-background ratio from ground truth.

    The object-to-virtual ratio divided by the background-to-virtual ratio
    (the registration scale).
    """
    r_ov = object_to_virtual_ratio(sfm_o, gt)
    return r_ov / registration.transform.scale


def write_eval_report(
    estimated: float,
    reference: float,
    report: TrajectoryErrorReport,
    path,
) -> None:
    payload = {
        "scale_ratio_estimated": float(estimated),
        "scale_ratio_reference": float(reference),
        "scale_ratio_deviation": abs(float(estimated) - float(reference)) / float(reference),
        "trajectory_error_mean": float(report.overall_mean),
        "per_frame": [
            {"frame": int(frame), "mean": float(report.per_frame_mean[frame])}
            for frame in sorted(report.per_frame_mean)
        ],
    }
    dump_canonical_json(payload, path)
