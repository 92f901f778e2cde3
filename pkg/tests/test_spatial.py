from __future__ import annotations

import math
import random

import pytest

from sceneproxy.geometry import BBox2D, v_cross, v_dot, v_sub
from sceneproxy.scene import CameraIntrinsics, Pose, SceneNode, TriangleMesh
from sceneproxy.session import load_scene
from sceneproxy.spatial import (
    Ray,
    estimate_positions,
    intersect_mesh,
    pixel_ray,
    project_point,
)

IDENTITY = Pose((0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0))
CAM = CameraIntrinsics(1000.0, 1000.0, 500.0, 500.0)


def test_pixel_ray_principal_point():
    ray = pixel_ray(IDENTITY, CAM, (500, 500))
    assert ray.direction == (0.0, 0.0, 1.0)
    assert ray.origin == (0.0, 0.0, 0.0)


def test_pixel_ray_45_degrees():
    ray = pixel_ray(IDENTITY, CAM, (1500, 500))  # (u - cx) / fx = 1
    expected = 1 / math.sqrt(2)
    assert math.isclose(ray.direction[0], expected, rel_tol=1e-12)
    assert ray.direction[1] == 0.0
    assert math.isclose(ray.direction[2], expected, rel_tol=1e-12)


def test_pixel_ray_rotated_head():
    pose = Pose((0.0, 0.0, 0.0), (math.cos(math.pi / 4), 0.0, math.sin(math.pi / 4), 0.0))
    ray = pixel_ray(pose, CAM, (500, 500))
    assert math.isclose(ray.direction[0], 1.0, abs_tol=1e-12)
    assert abs(ray.direction[1]) < 1e-12
    assert abs(ray.direction[2]) < 1e-12


def quad_at_z(z: float) -> TriangleMesh:
    return TriangleMesh(
        ((-1, -1, z), (1, -1, z), (1, 1, z), (-1, 1, z)),
        ((0, 1, 2), (0, 2, 3)),
    )


def test_intersect_quad_front():
    hit = intersect_mesh(Ray((0, 0, 0), (0, 0, 1)), quad_at_z(2.0))
    assert hit is not None
    assert hit.point == (0.0, 0.0, 2.0)
    assert hit.t == 2.0


def test_intersect_behind_is_miss():
    assert intersect_mesh(Ray((0, 0, 0), (0, 0, 1)), quad_at_z(-1.0)) is None


def test_intersect_nearest_of_two_planes():
    near = quad_at_z(2.0)
    far = quad_at_z(3.0)
    mesh = TriangleMesh(near.vertices + far.vertices, near.triangles + tuple((a + 4, b + 4, c + 4) for a, b, c in far.triangles))
    hit = intersect_mesh(Ray((0, 0, 0), (0, 0, 1)), mesh)
    assert hit is not None and hit.point[2] == 2.0


def _oracle_intersect(ray: Ray, mesh: TriangleMesh):
    """Independent scalar check: plane equation plus barycentric dot products."""
    best = None
    for index, (ia, ib, ic) in enumerate(mesh.triangles):
        a, b, c = mesh.vertices[ia], mesh.vertices[ib], mesh.vertices[ic]
        e1, e2 = v_sub(b, a), v_sub(c, a)
        normal = v_cross(e1, e2)
        denom = v_dot(normal, ray.direction)
        if abs(denom) < 1e-12:
            continue
        t = v_dot(normal, v_sub(a, ray.origin)) / denom
        if t < 1e-6:
            continue
        p = tuple(o + t * d for o, d in zip(ray.origin, ray.direction))
        w = v_sub(p, a)
        d11, d12, d22 = v_dot(e1, e1), v_dot(e1, e2), v_dot(e2, e2)
        dw1, dw2 = v_dot(w, e1), v_dot(w, e2)
        det = d11 * d22 - d12 * d12
        if det == 0:
            continue
        u = (d22 * dw1 - d12 * dw2) / det
        v = (d11 * dw2 - d12 * dw1) / det
        if u < 0 or v < 0 or u + v > 1:
            continue
        if best is None or t < best[0] or (t == best[0] and index < best[1]):
            best = (t, index, p)
    return best


def _random_mesh(rng: random.Random, n_tris: int) -> TriangleMesh:
    vertices = []
    triangles = []
    for i in range(n_tris):
        base = (rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.5, 4))
        vertices.append(base)
        vertices.append(tuple(base[k] + rng.uniform(0.2, 1.0) for k in range(3)))
        vertices.append(tuple(base[k] + rng.uniform(-1.0, -0.2) if k < 2 else base[k] + rng.uniform(0.2, 1.0) for k in range(3)))
        triangles.append((3 * i, 3 * i + 1, 3 * i + 2))
    return TriangleMesh(tuple(vertices), tuple(triangles))


def _aimed_ray(rng: random.Random, mesh: TriangleMesh) -> Ray:
    """Ray aimed at a random interior point of a random triangle."""
    ia, ib, ic = mesh.triangles[rng.randrange(len(mesh.triangles))]
    a, b, c = mesh.vertices[ia], mesh.vertices[ib], mesh.vertices[ic]
    u = rng.uniform(0.05, 0.9)
    v = rng.uniform(0.05, 0.9) * (1 - u)
    target = tuple(a[k] + u * (b[k] - a[k]) + v * (c[k] - a[k]) for k in range(3))
    origin = (rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), -1.0)
    direction = v_sub(target, origin)
    norm = math.sqrt(v_dot(direction, direction))
    return Ray(origin, tuple(d / norm for d in direction))


def test_intersect_matches_bruteforce_oracle():
    rng = random.Random(20240811)
    hits = 0
    for trial in range(300):
        mesh = _random_mesh(rng, rng.randint(1, 12))
        if trial % 3 == 0:
            direction = (rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.1, 1))
            norm = math.sqrt(sum(c * c for c in direction))
            ray = Ray((rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0.0), tuple(c / norm for c in direction))
        else:
            ray = _aimed_ray(rng, mesh)
        fast = intersect_mesh(ray, mesh)
        slow = _oracle_intersect(ray, mesh)
        if slow is None:
            assert fast is None
            continue
        hits += 1
        assert fast is not None
        assert fast.triangle_index == slow[1]
        assert math.isclose(fast.t, slow[0], abs_tol=1e-6)
        assert all(math.isclose(fp, sp, abs_tol=1e-6) for fp, sp in zip(fast.point, slow[2]))
    assert hits > 100  # the comparison actually exercised hits


def test_hit_point_on_ray_and_in_triangle():
    rng = random.Random(7)
    for _ in range(200):
        mesh = _random_mesh(rng, 6)
        ray = Ray((0, 0, 0), (rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), 1.0))
        norm = math.sqrt(sum(c * c for c in ray.direction))
        ray = Ray(ray.origin, tuple(c / norm for c in ray.direction))
        hit = intersect_mesh(ray, mesh)
        if hit is None:
            continue
        expected = tuple(o + hit.t * d for o, d in zip(ray.origin, ray.direction))
        assert all(math.isclose(a, b, abs_tol=1e-9) for a, b in zip(hit.point, expected))
        ia, ib, ic = mesh.triangles[hit.triangle_index]
        a, b, c = mesh.vertices[ia], mesh.vertices[ib], mesh.vertices[ic]
        normal = v_cross(v_sub(b, a), v_sub(c, a))
        plane_dist = v_dot(normal, v_sub(hit.point, a)) / math.sqrt(v_dot(normal, normal))
        assert abs(plane_dist) < 1e-6


def test_projection_roundtrip():
    rng = random.Random(99)
    for _ in range(200):
        px = (rng.uniform(0, 1000), rng.uniform(0, 1000))
        ray = pixel_ray(IDENTITY, CAM, px)
        point = tuple(o + 2.5 * d for o, d in zip(ray.origin, ray.direction))
        back = project_point(IDENTITY, CAM, point)
        assert back is not None
        assert math.dist(px, back) < 0.5


def test_project_point_behind_camera():
    assert project_point(IDENTITY, CAM, (0, 0, -1)) is None


def test_estimate_world_pos_override(fixtures_dir):
    snapshot = load_scene(fixtures_dir / "building" / "scene.json").snapshot
    estimate = estimate_positions(snapshot, list(snapshot.nodes))
    assert estimate.positions["1"] == (0.0, 1.5, 30.0)
    assert estimate.unplaced == ()


def test_estimate_office_on_wall(fixtures_dir):
    snapshot = load_scene(fixtures_dir / "office" / "scene.json").snapshot
    estimate = estimate_positions(snapshot, list(snapshot.nodes))
    # every level-1 object sits on the z=2 wall plane
    for pos in estimate.positions.values():
        assert math.isclose(pos[2], 2.0, abs_tol=1e-9)
    assert estimate.depths  # hit distances recorded for outlier flagging


def test_estimate_reports_unplaced():
    from sceneproxy.scene import Config, SceneSnapshot

    node = SceneNode("1", "thing", BBox2D(10, 10, 20, 20), 1)
    snapshot = SceneSnapshot((node,), TriangleMesh((), ()), CAM, IDENTITY, (1000, 1000), Config())
    estimate = estimate_positions(snapshot, [node])
    assert estimate.unplaced == ("1",)
    assert estimate.positions == {}


def test_pixel_ray_always_unit_norm():
    rng = random.Random(31)
    for _ in range(300):
        pose = Pose(
            (rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)),
            (1.0, 0.0, 0.0, 0.0),
        )
        ray = pixel_ray(pose, CAM, (rng.uniform(0, 1000), rng.uniform(0, 1000)))
        assert math.isclose(math.sqrt(sum(d * d for d in ray.direction)), 1.0, rel_tol=1e-12)
