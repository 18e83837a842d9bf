"""Deterministic synthetic scenes with exactly known scale ratio.

A box-shaped object (think vehicle) drives over a ground surface while a
virtual camera orbits it like a drone, climbing as it goes. The generator
emits everything a real run would ingest, all mutually consistent:

* ``sfm_b``: exact world cameras plus noisy ground / wall points,
* ``sfm_o``: object-relative cameras and object points, the whole object
  frame scaled by ``1 / true_scale_ratio``,
* per-frame label maps ray-cast against the true geometry,
* the semantic config, and the ground truth poses + mesh.

Realizing the resulting trajectory family at ``true_scale_ratio``
reproduces the exact world points of a noise-free scene, which is what the
recovery guarantees in the tests lean on.

Noise model: observation pixels get ``pixel_sigma`` Gaussian noise, and 3D
points get an isotropic perturbation with per-point std
``hypot(point_sigma, pixel_sigma * mean_depth / (focal * sqrt(n_obs)))``,
the usual multi-view triangulation error scale. Every Gaussian is drawn in
a sigma-independent order and scaled afterwards, so scenes that share a
seed share their noise realization across sigma settings (common random
numbers), and each (config, seed) pair is bit-reproducible.

The camera deliberately varies its height above ground: the constant
distance constraint divides by the camera height difference of a view
pair, so constant-height motion parallel to the object path is exactly the
degenerate case (available as ``degenerate_parallel`` for testing the
detection path).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .dataio import (
    GroundTruthFrame,
    GroundTruthScene,
    LabelMap,
    ObjectPose,
    Observation,
    Reconstruction,
    ScenePoint,
    SemanticConfig,
    dump_canonical_json,
    label_map_path,
    read_json,
    write_ground_truth,
    write_obj_mesh,
    write_pgm,
    write_reconstruction,
    write_semantic_config,
)
from .errors import InvalidConfig, ParseError
from .geometry import Plane, Pose, TriangleMesh, rays_mesh_intersections

GROUND_LABEL = 1
OBJECT_LABEL = 2
WALL_LABEL = 3
SKY_LABEL = 0

_PATHS = ("line", "arc", "s-curve")
_GROUNDS = ("flat", "inclined", "piecewise")


@dataclass(frozen=True)
class SceneConfig:
    frame_count: int = 12
    true_scale_ratio: float = 2.5
    object_path: str = "line"
    ground: str = "flat"
    ground_angle_deg: float = 8.0
    orbit_radius: float = 6.5
    orbit_height: float = 5.0
    orbit_height_gain: float = 5.0
    orbit_angular_speed: float = 0.45
    pixel_sigma: float = 0.0
    point_sigma: float = 0.0
    object_point_count: int = 48
    ground_point_count: int = 400
    wall_point_count: int = 100
    frame_width: int = 192
    frame_height: int = 144
    focal: float = 230.0
    path_extent: float = 6.0
    object_length: float = 4.2
    object_width: float = 1.9
    object_height: float = 1.6
    clearance: float = 0.35
    include_contact_points: bool = False
    degenerate_parallel: bool = False

    def validate(self) -> None:
        if self.frame_count < 2:
            raise InvalidConfig(f"frame_count must be >= 2, got {self.frame_count}")
        if not (self.true_scale_ratio > 0 and math.isfinite(self.true_scale_ratio)):
            raise InvalidConfig(f"true_scale_ratio must be positive, got {self.true_scale_ratio}")
        if self.object_path not in _PATHS:
            raise InvalidConfig(f"object_path must be one of {_PATHS}, got {self.object_path!r}")
        if self.ground not in _GROUNDS:
            raise InvalidConfig(f"ground must be one of {_GROUNDS}, got {self.ground!r}")
        if not (0.0 < abs(self.ground_angle_deg) < 45.0) and self.ground != "flat":
            raise InvalidConfig("ground_angle_deg must be in (0, 45) degrees")
        if self.pixel_sigma < 0 or self.point_sigma < 0:
            raise InvalidConfig("noise sigmas must be non-negative")
        if self.object_point_count < 16:
            raise InvalidConfig("object_point_count must be >= 16")
        if self.ground_point_count < 4:
            raise InvalidConfig("ground_point_count must be >= 4")
        if self.wall_point_count < 0:
            raise InvalidConfig("wall_point_count must be >= 0")
        if self.frame_width < 16 or self.frame_height < 16:
            raise InvalidConfig("frame dimensions must be at least 16 pixels")
        if self.focal <= 0:
            raise InvalidConfig("focal must be positive")
        if self.orbit_radius <= 0:
            raise InvalidConfig("orbit_radius must be positive")
        if self.orbit_height <= 0:
            raise InvalidConfig("orbit_height must be positive")
        if min(self.object_length, self.object_width, self.object_height) <= 0:
            raise InvalidConfig("object dimensions must be positive")
        if self.clearance < 0:
            raise InvalidConfig("clearance must be non-negative")
        if self.path_extent <= 0:
            raise InvalidConfig("path_extent must be positive")
        if self.degenerate_parallel and (self.ground != "flat" or self.object_path != "line"):
            raise InvalidConfig("degenerate_parallel requires flat ground and a line path")


@dataclass
class SyntheticScene:
    config: SceneConfig
    sfm_o: Reconstruction
    sfm_b: Reconstruction
    label_maps: dict[int, LabelMap]
    semantic: SemanticConfig
    gt: GroundTruthScene
    true_scale_ratio: float
    ground_planes: dict[int, Plane]  # true local plane under the object per frame


class _GroundModel:
    """Piecewise-planar ground surface parameterized by (s, l)."""

    def __init__(self, config: SceneConfig):
        self.kind = config.ground
        angle = math.radians(config.ground_angle_deg)
        self.e2 = np.array([0.0, 1.0, 0.0])
        flat_dir = np.array([1.0, 0.0, 0.0])
        tilt_dir = np.array([math.cos(angle), 0.0, math.sin(angle)])
        flat_n = np.array([0.0, 0.0, 1.0])
        tilt_n = np.array([-math.sin(angle), 0.0, math.cos(angle)])
        if self.kind == "flat":
            self.regions = [(-np.inf, np.inf, flat_dir, flat_n, np.zeros(3), 0.0)]
        elif self.kind == "inclined":
            self.regions = [(-np.inf, np.inf, tilt_dir, tilt_n, np.zeros(3), 0.0)]
        else:  # piecewise: flat behind the seam at s = 0, inclined past it
            self.regions = [
                (-np.inf, 0.0, flat_dir, flat_n, np.zeros(3), 0.0),
                (0.0, np.inf, tilt_dir, tilt_n, np.zeros(3), 0.0),
            ]

    def _region(self, s: float):
        for lo, hi, e1, normal, base, s0 in self.regions:
            if lo <= s < hi or (hi == np.inf and s >= lo):
                return e1, normal, base, s0
        return self.regions[-1][2:]

    def surface_point(self, s: float, l: float) -> np.ndarray:
        e1, _, base, s0 = self._region(s)
        return base + (s - s0) * e1 + l * self.e2

    def frame_axes(self, s: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(e1, e2, normal) of the region under path coordinate ``s``."""
        e1, normal, _, _ = self._region(s)
        return e1, self.e2, normal

    def plane_at(self, s: float) -> Plane:
        e1, normal, base, s0 = self._region(s)
        return Plane(normal, base)

    def patches(self, s_lo: float, s_hi: float, half_width: float):
        """Ground rectangles covering [s_lo, s_hi], one per touched region."""
        out = []
        for lo, hi, e1, normal, base, s0 in self.regions:
            a = max(s_lo, lo if np.isfinite(lo) else s_lo)
            b = min(s_hi, hi if np.isfinite(hi) else s_hi)
            if b <= a:
                continue
            corners = np.array(
                [
                    self.surface_point(a, -half_width),
                    self.surface_point(b, -half_width),
                    self.surface_point(b, half_width),
                    self.surface_point(a, half_width),
                ]
            )
            out.append(corners)
        return out


def _path_state(config: SceneConfig, tau: float) -> tuple[float, float, float]:
    """(s, l, heading) of the object at normalized time ``tau``."""
    extent = config.path_extent
    sigma = -extent / 2 + extent * tau  # arclength along the path
    if config.object_path == "line":
        return sigma, 0.0, 0.0
    if config.object_path == "arc":
        kappa = 1.5 / extent
        return math.sin(kappa * sigma) / kappa, (1.0 - math.cos(kappa * sigma)) / kappa, kappa * sigma
    amp = 1.2
    lateral = amp * math.sin(2.0 * math.pi * tau)
    slope = amp * 2.0 * math.pi / extent * math.cos(2.0 * math.pi * tau)
    return sigma, lateral, math.atan(slope)


def _look_at(center: np.ndarray, target: np.ndarray, up_hint: np.ndarray) -> np.ndarray:
    """World-to-camera rotation: z forward to target, y roughly downward."""
    forward = target - center
    fn = np.linalg.norm(forward)
    if fn < 1e-12:
        raise InvalidConfig("camera coincides with its look-at target")
    z = forward / fn
    x = np.cross(z, up_hint)
    xn = np.linalg.norm(x)
    if xn < 1e-12:
        raise InvalidConfig("camera looks straight along the up direction")
    x = x / xn
    y = np.cross(z, x)
    return np.vstack([x, y, z])


def _box_faces(x0, x1, y0, y1, z0, z1):
    """Vertices and triangles of an axis-aligned box in local coordinates."""
    v = np.array([[x, y, z] for x in (x0, x1) for y in (y0, y1) for z in (z0, z1)])
    quads = [
        (0, 1, 3, 2), (4, 6, 7, 5),
        (0, 4, 5, 1), (2, 3, 7, 6),
        (0, 2, 6, 4), (1, 5, 7, 3),
    ]
    tris = []
    for q in quads:
        tris.append((q[0], q[1], q[2]))
        tris.append((q[0], q[2], q[3]))
    return v, np.array(tris, dtype=np.int64)


def _object_mesh(config: SceneConfig) -> tuple[TriangleMesh, np.ndarray]:
    """Canonical object mesh plus the wheel contact points (possibly empty).

    Local frame: x forward, y left, z up; z = 0 is the contact level. The
    body box floats at ``clearance``; with contact points enabled, four
    wheel boxes close the gap and their bottom centers touch z = 0.
    """
    hl, hw = config.object_length / 2, config.object_width / 2
    body_v, body_t = _box_faces(-hl, hl, -hw, hw, config.clearance, config.clearance + config.object_height)
    verts = [body_v]
    tris = [body_t]
    contacts = np.zeros((0, 3))
    if config.include_contact_points:
        wx, wy = hl - 0.55, hw - 0.2
        centers = [(wx, wy), (wx, -wy), (-wx, wy), (-wx, -wy)]
        pts = []
        for cx, cy in centers:
            w_v, w_t = _box_faces(cx - 0.25, cx + 0.25, cy - 0.15, cy + 0.15, 0.0, config.clearance)
            tris.append(w_t + sum(len(v) for v in verts))
            verts.append(w_v)
            pts.append([cx, cy, 0.0])
        contacts = np.array(pts)
    return TriangleMesh(np.vstack(verts), np.vstack(tris)), contacts


def _sample_object_surface(config: SceneConfig, n_contact: int, rng: np.random.Generator) -> np.ndarray:
    """Local surface samples with a strict majority on the top face.

    The top face is visible from every elevated camera, which keeps
    per-frame ratio medians exact in the reference-scale computation.
    """
    n = config.object_point_count
    hl, hw = config.object_length / 2, config.object_width / 2
    z_top = config.clearance + config.object_height
    n_top = max(math.ceil(0.6 * (n + n_contact)), 1)
    n_top = min(n_top, n)

    uv = rng.uniform(0.0, 1.0, size=(n_top, 2))
    top = np.column_stack(
        [-hl + uv[:, 0] * 2 * hl, -hw + uv[:, 1] * 2 * hw, np.full(n_top, z_top)]
    )

    n_side = n - n_top
    uv = rng.uniform(0.0, 1.0, size=(n_side, 2))
    sides = np.zeros((n_side, 3))
    for k in range(n_side):
        face = k % 4
        a, b = uv[k]
        z = config.clearance + b * config.object_height
        if face == 0:  # front (x = +hl)
            sides[k] = (hl, -hw + a * 2 * hw, z)
        elif face == 1:  # back
            sides[k] = (-hl, -hw + a * 2 * hw, z)
        elif face == 2:  # left (y = +hw)
            sides[k] = (-hl + a * 2 * hl, hw, z)
        else:  # right
            sides[k] = (-hl + a * 2 * hl, -hw, z)
    return np.vstack([top, sides])


def _project(pose: Pose, points: np.ndarray, config: SceneConfig) -> tuple[np.ndarray, np.ndarray]:
    """Pixel coordinates and camera depths of world points."""
    cam = (points - pose.center) @ pose.rotation.T
    z = cam[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = config.focal * cam[:, 0] / z + config.frame_width / 2.0
        v = config.focal * cam[:, 1] / z + config.frame_height / 2.0
    return np.column_stack([u, v]), z


def _render_labels(
    pose: Pose,
    static_vertices: np.ndarray,
    static_triangles: np.ndarray,
    static_labels: np.ndarray,
    object_mesh: TriangleMesh,
    config: SceneConfig,
) -> np.ndarray:
    w, h = config.frame_width, config.frame_height
    verts = np.vstack([static_vertices, object_mesh.vertices])
    tris = np.vstack([static_triangles, object_mesh.triangles + len(static_vertices)])
    labels = np.concatenate([static_labels, np.full(len(object_mesh.triangles), OBJECT_LABEL, dtype=np.uint8)])
    mesh = TriangleMesh(verts, tris)

    cols, rows = np.meshgrid(np.arange(w) + 0.5, np.arange(h) + 0.5)
    cam_dirs = np.column_stack(
        [
            (cols.ravel() - w / 2.0) / config.focal,
            (rows.ravel() - h / 2.0) / config.focal,
            np.ones(w * h),
        ]
    )
    world_dirs = cam_dirs @ pose.rotation  # rows: R^T @ d

    grid = np.zeros(w * h, dtype=np.uint8)
    chunk = 8192
    for start in range(0, len(world_dirs), chunk):
        sl = slice(start, start + chunk)
        _, tri = rays_mesh_intersections(pose.center, world_dirs[sl], mesh)
        hit = tri >= 0
        out = grid[sl]
        out[hit] = labels[tri[hit]]
    return grid.reshape(h, w)


def _triangulate_quads(quads: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    verts = []
    tris = []
    offset = 0
    for corners in quads:
        verts.append(corners)
        tris.append(np.array([[0, 1, 2], [0, 2, 3]]) + offset)
        offset += 4
    return np.vstack(verts), np.vstack(tris)


def generate_scene(config: SceneConfig, seed: int) -> SyntheticScene:
    """Build a complete scene; same (config, seed) gives identical output."""
    config.validate()
    rng = np.random.default_rng(seed)
    ground = _GroundModel(config)
    n_frames = config.frame_count
    r_true = config.true_scale_ratio

    mesh, contacts = _object_mesh(config)
    n_contact = len(contacts)

    # --- all random draws, in a fixed sigma-independent order -------------
    surface_local = _sample_object_surface(config, n_contact, rng)
    object_local = np.vstack([surface_local, contacts]) if n_contact else surface_local
    n_obj = len(object_local)

    margin = 5.0
    s_lo, s_hi = -config.path_extent / 2 - margin, config.path_extent / 2 + margin
    half_width = 7.0
    g_uv = rng.uniform(0.0, 1.0, size=(config.ground_point_count, 2))
    ground_sl = np.column_stack(
        [s_lo + g_uv[:, 0] * (s_hi - s_lo), -half_width + g_uv[:, 1] * 2 * half_width]
    )

    wall_offset = 9.0
    wall_height = 3.5
    n_wall = config.wall_point_count
    w_uv = rng.uniform(0.0, 1.0, size=(n_wall, 2))

    eps_obj = rng.standard_normal((n_obj, 3))
    eps_ground = rng.standard_normal((config.ground_point_count, 3))
    eps_wall = rng.standard_normal((n_wall, 3))
    px_obj = rng.standard_normal((n_frames, n_obj, 2))
    px_ground = rng.standard_normal((n_frames, config.ground_point_count, 2))
    px_wall = rng.standard_normal((n_frames, n_wall, 2))
    # --- no rng use past this point ----------------------------------------

    ground_world = np.vstack(
        [ground.surface_point(s, l) for s, l in ground_sl]
    )
    wall_world = np.zeros((n_wall, 3))
    for k in range(n_wall):
        side = -1.0 if k % 2 == 0 else 1.0
        s = s_lo + w_uv[k, 0] * (s_hi - s_lo)
        height = 0.3 + w_uv[k, 1] * (wall_height - 0.6)
        wall_world[k] = ground.surface_point(s, side * wall_offset) + np.array([0.0, 0.0, height])

    # Object poses and cameras per frame.
    taus = np.array([i / max(n_frames - 1, 1) for i in range(n_frames)])
    object_poses: list[ObjectPose] = []
    cameras: list[Pose] = []
    ground_planes: dict[int, Plane] = {}
    for i, tau in enumerate(taus):
        s, l, heading = _path_state(config, tau)
        e1, e2, normal = ground.frame_axes(s)
        h_dir = math.cos(heading) * e1 + math.sin(heading) * e2
        lat = np.cross(normal, h_dir)
        rotation = np.column_stack([h_dir, lat, normal])
        position = ground.surface_point(s, l)
        object_poses.append(ObjectPose(rotation, position))
        ground_planes[i] = ground.plane_at(s)

        target = position + normal * (config.clearance + config.object_height / 2)
        if config.degenerate_parallel:
            # Constant height, translation parallel to the object path: the
            # constant-distance denominator vanishes for every view pair.
            center = np.array([0.55 * s - 2.0, -config.orbit_radius, config.orbit_height])
        else:
            theta = 0.7 + config.orbit_angular_speed * i
            height = config.orbit_height + config.orbit_height_gain * tau
            center = position + config.orbit_radius * (math.cos(theta) * e1 + math.sin(theta) * e2) + height * normal
        cameras.append(Pose(_look_at(center, target, normal), center))

    # Exact world positions of object points per frame: (F, J, 3).
    object_world = np.stack([pose.apply(object_local) for pose in object_poses])

    # Exact projections and depths (pre-noise, sigma-independent).
    def track(points_per_frame) -> tuple[np.ndarray, np.ndarray]:
        uv = np.zeros((n_frames, len(points_per_frame[0]), 2))
        depth = np.zeros((n_frames, len(points_per_frame[0])))
        for i in range(n_frames):
            uv[i], depth[i] = _project(cameras[i], points_per_frame[i], config)
        return uv, depth

    obj_uv, obj_depth = track(object_world)
    ground_uv, ground_depth = track([ground_world] * n_frames)
    wall_uv, wall_depth = track([wall_world] * n_frames)

    w, h = config.frame_width, config.frame_height

    def in_frame(uv, depth):
        return (
            (depth > 0.1)
            & (uv[..., 0] >= 0.0)
            & (uv[..., 0] < w)
            & (uv[..., 1] >= 0.0)
            & (uv[..., 1] < h)
        )

    def effective_sigma(depth, visible):
        counts = visible.sum(axis=0)
        mean_depth = np.where(
            counts > 0,
            (depth * visible).sum(axis=0) / np.maximum(counts, 1),
            depth.mean(axis=0),
        )
        tri_sigma = config.pixel_sigma * mean_depth / (config.focal * np.sqrt(np.maximum(counts, 1)))
        return np.hypot(config.point_sigma, tri_sigma)

    obj_visible = in_frame(obj_uv, obj_depth)
    ground_visible = in_frame(ground_uv, ground_depth)
    wall_visible = in_frame(wall_uv, wall_depth)

    sigma_obj = effective_sigma(obj_depth, obj_visible)[:, None]
    sigma_ground = effective_sigma(ground_depth, ground_visible)[:, None]
    sigma_wall = effective_sigma(wall_depth, wall_visible)[:, None] if n_wall else np.zeros((0, 1))

    noisy_object_local = object_local + sigma_obj * eps_obj
    noisy_ground = ground_world + sigma_ground * eps_ground
    noisy_wall = wall_world + sigma_wall * eps_wall if n_wall else wall_world

    # Noisy pixels. Object tracks stay full: clip into the frame.
    obj_px = obj_uv + config.pixel_sigma * px_obj
    obj_px[..., 0] = np.clip(obj_px[..., 0], 0.0, w - 1e-3)
    obj_px[..., 1] = np.clip(obj_px[..., 1], 0.0, h - 1e-3)
    ground_px = ground_uv + config.pixel_sigma * px_ground
    wall_px = wall_uv + config.pixel_sigma * px_wall

    # --- object reconstruction (object frame scaled by 1 / r_true) --------
    o_points = []
    for j in range(n_obj):
        obs = tuple(Observation(i, obj_px[i, j]) for i in range(n_frames))
        o_points.append(ScenePoint(j, noisy_object_local[j] / r_true, obs))
    o_cameras = {}
    for i in range(n_frames):
        pose = object_poses[i]
        cam = cameras[i]
        rotation = cam.rotation @ pose.rotation
        center = pose.rotation.T @ (cam.center - pose.translation) / r_true
        o_cameras[i] = Pose(rotation, center)
    sfm_o = Reconstruction(frame_size=(w, h), cameras=o_cameras, points=o_points)

    # --- background reconstruction ----------------------------------------
    # In-frame tests use the noisy pixel (it is the measurement that would
    # have been tracked) together with the exact depth.
    ground_px_ok = in_frame(ground_px, ground_depth)
    wall_px_ok = in_frame(wall_px, wall_depth)
    b_points = []
    for k in range(config.ground_point_count):
        obs = tuple(
            Observation(i, ground_px[i, k]) for i in range(n_frames) if ground_px_ok[i, k]
        )
        b_points.append(ScenePoint(k, noisy_ground[k], obs))
    for k in range(n_wall):
        obs = tuple(
            Observation(i, wall_px[i, k]) for i in range(n_frames) if wall_px_ok[i, k]
        )
        b_points.append(ScenePoint(config.ground_point_count + k, noisy_wall[k], obs))
    b_cameras = {i: cameras[i] for i in range(n_frames)}
    sfm_b = Reconstruction(frame_size=(w, h), cameras=b_cameras, points=b_points)

    sfm_o.validate()
    sfm_b.validate()

    # --- label maps ---------------------------------------------------------
    ground_quads = ground.patches(s_lo - 3.0, s_hi + 3.0, half_width + 3.0)
    wall_quads = []
    for side in (-1.0, 1.0):
        for lo, hi, e1, normal, base, s0 in ground.regions:
            a = max(s_lo - 3.0, lo if np.isfinite(lo) else s_lo - 3.0)
            b = min(s_hi + 3.0, hi if np.isfinite(hi) else s_hi + 3.0)
            if b <= a:
                continue
            p0 = ground.surface_point(a, side * wall_offset)
            p1 = ground.surface_point(b, side * wall_offset)
            up = np.array([0.0, 0.0, wall_height])
            wall_quads.append(np.array([p0, p1, p1 + up, p0 + up]))
    static_v, static_t = _triangulate_quads(ground_quads + wall_quads)
    static_labels = np.concatenate(
        [
            np.full(2 * len(ground_quads), GROUND_LABEL, dtype=np.uint8),
            np.full(2 * len(wall_quads), WALL_LABEL, dtype=np.uint8),
        ]
    )
    label_maps = {}
    for i in range(n_frames):
        posed = mesh.transformed(object_poses[i].rotation, object_poses[i].translation)
        grid = _render_labels(cameras[i], static_v, static_t, static_labels, posed, config)
        label_maps[i] = LabelMap(i, grid)

    semantic = SemanticConfig(
        ground_labels=frozenset({GROUND_LABEL}),
        object_labels=frozenset({OBJECT_LABEL}),
        background_labels=frozenset({SKY_LABEL, WALL_LABEL}),
    )
    gt = GroundTruthScene(
        frames={
            i: GroundTruthFrame(camera=cameras[i], object_pose=object_poses[i])
            for i in range(n_frames)
        },
        mesh=mesh,
    )
    return SyntheticScene(
        config=config,
        sfm_o=sfm_o,
        sfm_b=sfm_b,
        label_maps=label_maps,
        semantic=semantic,
        gt=gt,
        true_scale_ratio=r_true,
        ground_planes=ground_planes,
    )


def write_scene(scene: SyntheticScene, directory) -> list[Path]:
    """Write the scene in the exact ingest layout; returns written paths."""
    directory = Path(directory)
    labels_dir = directory / "labels"
    labels_dir.mkdir(parents=True, exist_ok=True)

    paths = []

    def record(path):
        paths.append(Path(path))
        return path

    write_reconstruction(scene.sfm_o, record(directory / "object.json"))
    write_reconstruction(scene.sfm_b, record(directory / "background.json"))
    write_semantic_config(scene.semantic, record(directory / "semantic.json"))
    write_obj_mesh(scene.gt.mesh, record(directory / "object.obj"))
    write_ground_truth(scene.gt, record(directory / "gt.json"), "object.obj")
    for frame_id in sorted(scene.label_maps):
        write_pgm(scene.label_maps[frame_id].labels, record(label_map_path(labels_dir, frame_id)))
    return sorted(paths)


_CONFIG_FIELDS = {f: t for f, t in SceneConfig.__dataclass_fields__.items()}


def load_scene_config(path) -> SceneConfig:
    """Read a scene-config.json whose keys mirror SceneConfig fields."""
    raw = read_json(path)
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: scene config must be a JSON object")
    unknown = set(raw) - set(_CONFIG_FIELDS)
    if unknown:
        raise InvalidConfig(f"{path}: unknown scene config keys {sorted(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        field_type = _CONFIG_FIELDS[key].type
        if field_type == "bool":
            if not isinstance(value, bool):
                raise InvalidConfig(f"{path}: {key} must be a boolean")
            kwargs[key] = value
        elif field_type == "int":
            if not isinstance(value, int) or isinstance(value, bool):
                raise InvalidConfig(f"{path}: {key} must be an integer")
            kwargs[key] = value
        elif field_type == "float":
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise InvalidConfig(f"{path}: {key} must be a number")
            kwargs[key] = float(value)
        else:
            if not isinstance(value, str):
                raise InvalidConfig(f"{path}: {key} must be a string")
            kwargs[key] = value
    config = SceneConfig(**kwargs)
    config.validate()
    return config


def write_scene_config(config: SceneConfig, path) -> None:
    dump_canonical_json(asdict(config), path)
