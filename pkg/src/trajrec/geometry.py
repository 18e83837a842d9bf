"""Geometric primitives and kernels used by every other module.

Conventions, fixed once here and relied on everywhere:

* A camera pose stores the world-to-camera rotation ``R`` and the camera
  center ``c`` in world coordinates, so a world point ``x`` maps to camera
  coordinates as ``R @ (x - c)`` and back as ``c + R.T @ x_cam``.
* Planes are stored as a unit normal plus an anchor point on the plane.
  Signed distance is positive on the side the normal points into.
* All arrays are float64. Functions accept a single point ``(3,)`` or a
  batch ``(N, 3)`` where that is noted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    DegenerateConfiguration,
    EmptyMesh,
    NearParallel,
    ValidationError,
)

_ORTHONORMAL_TOL = 1e-9


def _as_float_array(value, shape, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != shape:
        raise ValidationError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def _check_rotation(rotation: np.ndarray, name: str) -> None:
    # Orthonormality and determinant +1, both within 1e-9.
    err = np.abs(rotation.T @ rotation - np.eye(3)).max()
    if err > _ORTHONORMAL_TOL:
        raise ValidationError(f"{name} is not orthonormal (max deviation {err:.3e})")
    det = np.linalg.det(rotation)
    if abs(det - 1.0) > _ORTHONORMAL_TOL:
        raise ValidationError(f"{name} must have determinant +1, got {det!r}")


@dataclass(frozen=True)
class Pose:
    """World-to-camera rotation plus camera center in world coordinates."""

    rotation: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        rotation = _as_float_array(self.rotation, (3, 3), "Pose.rotation")
        center = _as_float_array(self.center, (3,), "Pose.center")
        _check_rotation(rotation, "Pose.rotation")
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "center", center)


@dataclass(frozen=True)
class Plane:
    """Plane given by a unit normal and an anchor point lying on it."""

    normal: np.ndarray
    anchor: np.ndarray

    def __post_init__(self):
        normal = _as_float_array(self.normal, (3,), "Plane.normal")
        anchor = _as_float_array(self.anchor, (3,), "Plane.anchor")
        norm = np.linalg.norm(normal)
        if norm < 1e-12:
            raise ValidationError("Plane.normal is numerically zero")
        object.__setattr__(self, "normal", normal / norm)
        object.__setattr__(self, "anchor", anchor)


@dataclass(frozen=True)
class SimilarityTransform:
    """Maps ``x`` to ``scale * rotation @ x + translation``."""

    scale: float
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rotation = _as_float_array(self.rotation, (3, 3), "SimilarityTransform.rotation")
        translation = _as_float_array(self.translation, (3,), "SimilarityTransform.translation")
        _check_rotation(rotation, "SimilarityTransform.rotation")
        scale = float(self.scale)
        if not np.isfinite(scale) or scale <= 0.0:
            raise ValidationError(f"SimilarityTransform.scale must be positive, got {scale!r}")
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Apply to one point ``(3,)`` or a batch ``(N, 3)``."""
        pts = np.asarray(points, dtype=float)
        return self.scale * pts @ self.rotation.T + self.translation


@dataclass(frozen=True)
class TriangleMesh:
    """Triangle soup: ``vertices (V, 3)`` float, ``triangles (T, 3)`` int."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if vertices.size and not np.all(np.isfinite(vertices)):
            raise ValidationError("TriangleMesh.vertices contains non-finite values")
        if triangles.size:
            if triangles.min() < 0 or triangles.max() >= len(vertices):
                raise ValidationError("TriangleMesh.triangles indexes outside vertices")
            corners = vertices[triangles]
            doubled = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
            areas = 0.5 * np.linalg.norm(doubled, axis=1)
            if areas.min() <= 1e-12:
                bad = int(np.argmin(areas))
                raise ValidationError(f"TriangleMesh triangle {bad} is degenerate (area {areas[bad]:.3e})")
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "triangles", triangles)

    def corners(self) -> np.ndarray:
        """Triangle corner coordinates, shape ``(T, 3, 3)``."""
        return self.vertices[self.triangles]

    def transformed(self, rotation: np.ndarray, translation: np.ndarray) -> "TriangleMesh":
        """Mesh with vertices mapped by ``rotation @ v + translation``."""
        verts = np.asarray(self.vertices) @ np.asarray(rotation, dtype=float).T + np.asarray(translation, dtype=float)
        return TriangleMesh(verts, self.triangles)


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for a (not necessarily unit) axis."""
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm < 1e-15:
        raise ValidationError("rotation axis is numerically zero")
    x, y, z = axis / norm
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def world_to_camera(pose: Pose, point: np.ndarray) -> np.ndarray:
    """Map world points into the camera frame: ``R @ (x - c)``.

    ``point`` may be ``(3,)`` or ``(N, 3)``; the result matches.
    """
    pts = np.asarray(point, dtype=float)
    return (pts - pose.center) @ pose.rotation.T


def camera_to_world(pose: Pose, point: np.ndarray) -> np.ndarray:
    """Inverse of :func:`world_to_camera`: ``c + R.T @ x_cam``."""
    pts = np.asarray(point, dtype=float)
    return pts @ pose.rotation + pose.center


def signed_plane_distance(plane: Plane, point: np.ndarray) -> np.ndarray:
    """Signed distance ``n . (x - p)``, vectorized over leading axes."""
    pts = np.asarray(point, dtype=float)
    return (pts - plane.anchor) @ plane.normal


def ray_plane_parameter(origin: np.ndarray, direction: np.ndarray, plane: Plane) -> float:
    """Parameter ``t`` with ``origin + t * direction`` on the plane.

    Raises
    ------
    NearParallel
        If ``|direction . n| <= 1e-9 * ||direction||``.
    """
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(direction, dtype=float)
    denom = float(direction @ plane.normal)
    if abs(denom) <= 1e-9 * np.linalg.norm(direction):
        raise NearParallel("ray direction is numerically parallel to the plane")
    return float((plane.anchor - origin) @ plane.normal / denom)


def umeyama_similarity(source: np.ndarray, target: np.ndarray) -> SimilarityTransform:
    """Least-squares similarity aligning ``source`` onto ``target``.

    Solves ``min sum_i || target_i - (s R source_i + t) ||^2`` over scale,
    rotation and translation (the classic closed form via the SVD of the
    cross covariance, with the determinant sign correction).

    Parameters
    ----------
    source, target : (N, 3) arrays with N >= 3, matched row by row.

    Raises
    ------
    DegenerateConfiguration
        Fewer than three correspondences, or source points all collinear.
    """
    src = np.asarray(source, dtype=float).reshape(-1, 3)
    dst = np.asarray(target, dtype=float).reshape(-1, 3)
    if src.shape != dst.shape:
        raise ValidationError("source and target must have matching shapes")
    n = len(src)
    if n < 3:
        raise DegenerateConfiguration(f"need at least 3 correspondences, got {n}")

    mu_src = src.mean(axis=0)
    mu_dst = dst.mean(axis=0)
    src_c = src - mu_src
    dst_c = dst - mu_dst

    cov = dst_c.T @ src_c / n
    u, d, vt = np.linalg.svd(cov)

    # Collinear sources leave the rotation about the line unconstrained.
    sv = np.linalg.svd(src_c, compute_uv=False)
    if sv[1] <= 1e-12 * max(sv[0], 1e-300):
        raise DegenerateConfiguration("source points are collinear")

    s = np.ones(3)
    if np.linalg.det(u) * np.linalg.det(vt) < 0.0:
        s[2] = -1.0
    rotation = u @ np.diag(s) @ vt

    var_src = (src_c ** 2).sum() / n
    scale = float((d * s).sum() / var_src)
    translation = mu_dst - scale * rotation @ mu_src
    return SimilarityTransform(scale=scale, rotation=rotation, translation=translation)


def _point_triangle_distances(points: np.ndarray, corners: np.ndarray) -> np.ndarray:
    """Exact distances between ``points (N, 3)`` and triangles ``(T, 3, 3)``.

    Returns an ``(N, T)`` matrix. The closest feature is found by projecting
    onto the triangle plane and checking barycentric coordinates; points
    whose projection falls outside fall back to the minimum over the three
    edge segments, which together cover all Voronoi regions of a triangle.
    """
    p = points[:, None, :]                      # (N, 1, 3)
    a = corners[None, :, 0, :]                  # (1, T, 3)
    b = corners[None, :, 1, :]
    c = corners[None, :, 2, :]

    ab = b - a
    ac = c - a
    normal = np.cross(ab, ac)                   # (1, T, 3)
    nn = (normal * normal).sum(-1)

    ap = p - a
    # Barycentric coordinates of the in-plane projection.
    d00 = (ab * ab).sum(-1)
    d01 = (ab * ac).sum(-1)
    d11 = (ac * ac).sum(-1)
    d20 = (ap * ab).sum(-1)
    d21 = (ap * ac).sum(-1)
    denom = d00 * d11 - d01 * d01               # == nn, kept separate for clarity
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (d11 * d20 - d01 * d21) / denom
        w = (d00 * d21 - d01 * d20) / denom
        plane_dist = np.abs((ap * normal).sum(-1)) / np.sqrt(nn)
    inside = (v >= 0.0) & (w >= 0.0) & (v + w <= 1.0)

    def seg_dist(s0, s1):
        d = s1 - s0
        dd = (d * d).sum(-1)
        t = np.clip(((p - s0) * d).sum(-1) / dd, 0.0, 1.0)
        closest = s0 + t[..., None] * d
        return np.linalg.norm(p - closest, axis=-1)

    edge = np.minimum(seg_dist(a, b), np.minimum(seg_dist(b, c), seg_dist(c, a)))
    return np.where(inside, plane_dist, edge)


def point_mesh_distances(points: np.ndarray, mesh: TriangleMesh) -> np.ndarray:
    """Exact unsigned distance from each of ``points (N, 3)`` to the mesh."""
    if len(mesh.triangles) == 0:
        raise EmptyMesh("mesh has no triangles")
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    return _point_triangle_distances(pts, mesh.corners()).min(axis=1)


def point_mesh_distance(point: np.ndarray, mesh: TriangleMesh) -> float:
    """Exact unsigned distance from a single point to the mesh surface."""
    return float(point_mesh_distances(np.asarray(point, dtype=float).reshape(1, 3), mesh)[0])


def rays_mesh_intersections(
    origins: np.ndarray, directions: np.ndarray, mesh: TriangleMesh
) -> tuple[np.ndarray, np.ndarray]:
    """Batched first-hit ray casting (Moller-Trumbore).

    Parameters
    ----------
    origins : (N, 3) or (3,) ray origins (a single origin broadcasts).
    directions : (N, 3) ray directions, not necessarily unit length.

    Returns
    -------
    t : (N,) ray parameters of the nearest hit with ``t >= 0``; ``inf`` where
        the ray misses every triangle.
    tri : (N,) index of the hit triangle, ``-1`` where the ray misses.
    """
    if len(mesh.triangles) == 0:
        raise EmptyMesh("mesh has no triangles")
    dirs = np.asarray(directions, dtype=float).reshape(-1, 3)
    orig = np.broadcast_to(np.asarray(origins, dtype=float), dirs.shape)

    corners = mesh.corners()
    v0 = corners[None, :, 0, :]
    e1 = corners[None, :, 1, :] - v0             # (1, T, 3)
    e2 = corners[None, :, 2, :] - v0

    d = dirs[:, None, :]                         # (N, 1, 3)
    pvec = np.cross(d, e2)
    det = (e1 * pvec).sum(-1)                    # (N, T)
    eps = 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_det = 1.0 / det
        tvec = orig[:, None, :] - v0
        u = (tvec * pvec).sum(-1) * inv_det
        qvec = np.cross(tvec, e1)
        v = (d * qvec).sum(-1) * inv_det
        t = (e2 * qvec).sum(-1) * inv_det
        # Edge-inclusive so rays through vertices and edges still count as hits.
        valid = (
            (np.abs(det) > eps)
            & (u >= -eps)
            & (v >= -eps)
            & (u + v <= 1.0 + eps)
            & (t >= 0.0)
        )
    t = np.where(valid, t, np.inf)
    tri = np.argmin(t, axis=1)
    t_min = t[np.arange(len(dirs)), tri]
    tri = np.where(np.isfinite(t_min), tri, -1)
    return t_min, tri


def ray_mesh_intersection(
    origin: np.ndarray, direction: np.ndarray, mesh: TriangleMesh
) -> Optional[np.ndarray]:
    """Nearest intersection point of one ray with the mesh, or ``None``."""
    t, tri = rays_mesh_intersections(origin, np.asarray(direction, dtype=float).reshape(1, 3), mesh)
    if tri[0] < 0:
        return None
    return np.asarray(origin, dtype=float) + float(t[0]) * np.asarray(direction, dtype=float)
