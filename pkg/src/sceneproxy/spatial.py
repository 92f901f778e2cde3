"""Pixel rays and mesh intersection for 3D position estimates.

A pinhole camera (no distortion) maps a pixel to a head-frame ray;
intersecting the scene mesh gives the object's approximate world
position.  Nodes with an authored ``world_pos`` bypass the raycast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Vec3, quat_conjugate, quat_rotate, v_normalize
from .scene import CameraIntrinsics, Pose, SceneNode, SceneSnapshot, TriangleMesh, root_bboxes

_SELF_HIT_EPS = 1e-6
_PARALLEL_EPS = 1e-12


@dataclass(frozen=True)
class Ray:
    origin: Vec3
    direction: Vec3  # unit length


@dataclass(frozen=True)
class HitResult:
    point: Vec3
    t: float
    triangle_index: int


def pixel_ray(head: Pose, cam: CameraIntrinsics, px: tuple[float, float]) -> Ray:
    """Ray from the head through pixel ``px`` (camera looks along +z)."""
    u, v = px
    direction = v_normalize(((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0))
    return Ray(head.position, quat_rotate(head.orientation, direction))


def project_point(head: Pose, cam: CameraIntrinsics, point: Vec3) -> tuple[float, float] | None:
    """Inverse of ``pixel_ray`` for points in front of the camera; None behind."""
    rel = tuple(p - o for p, o in zip(point, head.position))
    cx, cy, cz = quat_rotate(quat_conjugate(head.orientation), rel)  # camera frame
    if cz <= 0:
        return None
    return (cam.cx + cam.fx * cx / cz, cam.cy + cam.fy * cy / cz)


def intersect_mesh(ray: Ray, mesh: TriangleMesh) -> HitResult | None:
    """Nearest forward intersection (t >= 1e-6); ties pick the lowest triangle index.

    Vectorized Moller-Trumbore over all triangles; fixture meshes are
    small enough that no spatial index is needed.
    """
    if not mesh.triangles:
        return None
    verts = np.asarray(mesh.vertices, dtype=np.float64)
    tris = np.asarray(mesh.triangles, dtype=np.int64)
    v0 = verts[tris[:, 0]]
    edge1 = verts[tris[:, 1]] - v0
    edge2 = verts[tris[:, 2]] - v0
    origin = np.asarray(ray.origin, dtype=np.float64)
    direction = np.asarray(ray.direction, dtype=np.float64)

    pvec = np.cross(direction, edge2)
    det = np.einsum("ij,ij->i", edge1, pvec)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_det = 1.0 / det
        tvec = origin - v0
        u = np.einsum("ij,ij->i", tvec, pvec) * inv_det
        qvec = np.cross(tvec, edge1)
        v = np.einsum("j,ij->i", direction, qvec) * inv_det
        t = np.einsum("ij,ij->i", edge2, qvec) * inv_det

    valid = (
        (np.abs(det) > _PARALLEL_EPS)
        & (u >= 0.0)
        & (v >= 0.0)
        & (u + v <= 1.0)
        & (t >= _SELF_HIT_EPS)
    )
    if not valid.any():
        return None
    t_masked = np.where(valid, t, np.inf)
    idx = int(np.argmin(t_masked))  # argmin returns the first (lowest) index on ties
    t_hit = float(t_masked[idx])
    point = origin + direction * t_hit
    return HitResult((float(point[0]), float(point[1]), float(point[2])), t_hit, idx)


@dataclass(frozen=True)
class PositionEstimate:
    positions: dict[str, Vec3]  # node id -> world point, in sorted id order
    unplaced: tuple[str, ...]
    depths: dict[str, float]  # ray-hit distance, for flagging outliers


def estimate_positions(snapshot: SceneSnapshot, nodes: list[SceneNode]) -> PositionEstimate:
    """World positions for ``nodes``: authored overrides win, else raycast the bbox center."""
    roots = root_bboxes(snapshot)
    positions: dict[str, Vec3] = {}
    depths: dict[str, float] = {}
    unplaced: list[str] = []
    for node in sorted(nodes, key=lambda n: n.id):
        if node.world_pos is not None:
            positions[node.id] = node.world_pos
            continue
        center = roots[node.id].center
        hit = intersect_mesh(pixel_ray(snapshot.head, snapshot.camera, center), snapshot.mesh)
        if hit is None:
            unplaced.append(node.id)
        else:
            positions[node.id] = hit.point
            depths[node.id] = hit.t
    return PositionEstimate(positions, tuple(unplaced), depths)


def gaze_hit_depth(snapshot: SceneSnapshot, gaze_px: tuple[float, float], fallback: float = 2.0) -> float:
    """Camera-frame z of the gaze ray's mesh hit; ``fallback`` when it misses."""
    ray = pixel_ray(snapshot.head, snapshot.camera, gaze_px)
    hit = intersect_mesh(ray, snapshot.mesh)
    if hit is None:
        return fallback
    rel = tuple(p - o for p, o in zip(hit.point, snapshot.head.position))
    depth = quat_rotate(quat_conjugate(snapshot.head.orientation), rel)[2]
    return depth if depth > 0 else fallback
