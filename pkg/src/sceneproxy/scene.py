"""Scene data model and the JSON fixture format.

A scene fixture is a single JSON document with the keys ``image_size``,
``camera``, ``head``, ``mesh``, ``config`` and ``nodes``.  Node bounding
boxes are expressed in the pixel frame of their parent's crop; level-1
boxes are in root-image coordinates.  Attribute maps are canonicalized
to sorted key order, so "first attribute key" always means the
alphabetically first one.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, fields, replace

from .geometry import BBox2D, Quat, Vec3, contains, quat_norm, v_cross, v_norm, v_sub
from .jsonutil import canonical_bytes

log = logging.getLogger(__name__)

AttributeValue = str | int | float
AttributeSet = dict[str, AttributeValue]


class SchemaError(ValueError):
    """Raised for malformed fixtures; ``path`` points at the offending item."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message


@dataclass(frozen=True)
class SceneNode:
    id: str
    label: str
    bbox: BBox2D
    level: int
    attributes: AttributeSet = field(default_factory=dict)
    children: tuple["SceneNode", ...] = ()
    world_pos: Vec3 | None = None


@dataclass(frozen=True)
class Pose:
    position: Vec3
    orientation: Quat  # unit quaternion (w, x, y, z)


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float


@dataclass(frozen=True)
class TriangleMesh:
    vertices: tuple[Vec3, ...]
    triangles: tuple[tuple[int, int, int], ...]


@dataclass(frozen=True)
class Config:
    gaze_extension_m: float = 0.20
    iou_dedup_threshold: float = 0.75
    min_bbox_px: float = 24
    min_gap_m: float = 0.005
    proxy_size_m: float = 0.03
    workspace_extent_m: float = 0.30
    tie_tolerance_m: float = 0.02
    follow_threshold_m: float = 0.15
    follow_time_constant_s: float = 0.15
    hold_duration_ms: float = 500
    double_tap_window_ms: float = 300
    zoom_in_ratio: float = 1.4
    zoom_out_ratio: float = 0.7

    def with_overrides(self, overrides: dict[str, float]) -> "Config":
        known = {f.name for f in fields(Config)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise SchemaError(f"unknown config keys: {', '.join(unknown)}", "$.config")
        return replace(self, **overrides)


@dataclass(frozen=True)
class SceneSnapshot:
    nodes: tuple[SceneNode, ...]
    mesh: TriangleMesh
    camera: CameraIntrinsics
    head: Pose
    image_size: tuple[float, float]
    config: Config


@dataclass(frozen=True)
class Violation:
    rule: str
    node_id: str | None
    detail: str


# -- traversal helpers --------------------------------------------------------


def walk(snapshot: SceneSnapshot):
    """Yield ``(node, parent)`` pairs in depth-first fixture order."""

    def _walk(node: SceneNode, parent: SceneNode | None):
        yield node, parent
        for child in node.children:
            yield from _walk(child, node)

    for root in snapshot.nodes:
        yield from _walk(root, None)


def find_node(snapshot: SceneSnapshot, node_id: str) -> SceneNode | None:
    for node, _ in walk(snapshot):
        if node.id == node_id:
            return node
    return None


def root_bboxes(snapshot: SceneSnapshot) -> dict[str, BBox2D]:
    """Map node id to its bbox in root-image coordinates.

    Child boxes are stored crop-relative, so offsets accumulate down the tree.
    """
    out: dict[str, BBox2D] = {}

    def _walk(node: SceneNode, ox: float, oy: float):
        b = BBox2D(node.bbox.x + ox, node.bbox.y + oy, node.bbox.w, node.bbox.h)
        out[node.id] = b
        for child in node.children:
            _walk(child, b.x, b.y)

    for root in snapshot.nodes:
        _walk(root, 0.0, 0.0)
    return out


def nodes_at_level(snapshot: SceneSnapshot, level: int) -> list[SceneNode]:
    return [n for n, _ in walk(snapshot) if n.level == level]


def all_world_pos(snapshot: SceneSnapshot) -> bool:
    """True when every node carries an authored 3D position (digital twin)."""
    nodes = list(walk(snapshot))
    return bool(nodes) and all(n.world_pos is not None for n, _ in nodes)


# -- validation ---------------------------------------------------------------


def _finite(*values: float) -> bool:
    return all(isinstance(v, (int, float)) and math.isfinite(v) for v in values)


def validate_snapshot(s: SceneSnapshot) -> list[Violation]:
    """Collect invariant violations; an empty list means the snapshot is valid."""
    out: list[Violation] = []

    w, h = s.image_size
    if not _finite(w, h) or w <= 0 or h <= 0:
        out.append(Violation("image-size", None, f"image_size must be positive, got {s.image_size}"))
    if not _finite(s.camera.fx, s.camera.fy, s.camera.cx, s.camera.cy) or s.camera.fx <= 0 or s.camera.fy <= 0:
        out.append(Violation("camera-intrinsics", None, "fx and fy must be positive and finite"))
    if not _finite(*s.head.position) or not _finite(*s.head.orientation):
        out.append(Violation("pose-finite", None, "head pose must be finite"))
    elif abs(quat_norm(s.head.orientation) - 1.0) > 1e-6:
        out.append(Violation("pose-quaternion", None, f"quaternion norm {quat_norm(s.head.orientation)!r} not unit"))

    out.extend(_validate_config(s.config))
    out.extend(_validate_mesh(s.mesh))

    seen_ids: set[str] = set()
    for node, parent in walk(s):
        nid = node.id
        if nid in seen_ids:
            out.append(Violation("id-duplicate", nid, f"duplicate node id {nid!r}"))
        seen_ids.add(nid)
        b = node.bbox
        if not _finite(b.x, b.y, b.w, b.h) or b.w <= 0 or b.h <= 0 or b.x < 0 or b.y < 0:
            out.append(Violation("bbox-invalid", nid, f"bbox {b.as_list()} malformed"))
            continue
        if parent is None:
            if node.level != 1:
                out.append(Violation("level-sequence", nid, f"root node level {node.level} != 1"))
            if not contains(BBox2D(0, 0, w, h), b):
                out.append(Violation("bbox-containment", nid, "level-1 bbox outside image"))
        else:
            if node.level != parent.level + 1:
                out.append(Violation("level-sequence", nid, f"level {node.level} != parent level {parent.level} + 1"))
            if not contains(BBox2D(0, 0, parent.bbox.w, parent.bbox.h), b):
                out.append(Violation("bbox-containment", nid, "child bbox outside parent crop"))
        for key, value in node.attributes.items():
            if isinstance(value, (int, float)) and not math.isfinite(value):
                out.append(Violation("attribute-not-finite", nid, f"attribute {key!r} is not finite"))
        if node.world_pos is not None and not _finite(*node.world_pos):
            out.append(Violation("world-pos-finite", nid, "world_pos must be finite"))
    return out


def _validate_config(cfg: Config) -> list[Violation]:
    out: list[Violation] = []
    for f in fields(Config):
        value = getattr(cfg, f.name)
        if not _finite(value) or value <= 0:
            out.append(Violation("config-invalid", None, f"{f.name} must be positive, got {value!r}"))
    if not (cfg.zoom_out_ratio < 1 < cfg.zoom_in_ratio):
        out.append(Violation("config-invalid", None, "need zoom_out_ratio < 1 < zoom_in_ratio"))
    if not (0 < cfg.iou_dedup_threshold <= 1):
        out.append(Violation("config-invalid", None, "iou_dedup_threshold must be in (0, 1]"))
    return out


def _validate_mesh(mesh: TriangleMesh) -> list[Violation]:
    out: list[Violation] = []
    n = len(mesh.vertices)
    for i, v in enumerate(mesh.vertices):
        if not _finite(*v):
            out.append(Violation("mesh-vertex", None, f"vertex {i} not finite"))
    for i, tri in enumerate(mesh.triangles):
        if any(not isinstance(k, int) or k < 0 or k >= n for k in tri):
            out.append(Violation("mesh-index", None, f"triangle {i} index out of range"))
            continue
        a, b, c = (mesh.vertices[k] for k in tri)
        area2 = v_norm(v_cross(v_sub(b, a), v_sub(c, a)))
        if area2 <= 1e-12:
            out.append(Violation("mesh-degenerate", None, f"triangle {i} has zero area"))
    return out


# -- parsing ------------------------------------------------------------------

_NODE_KEYS = {"id", "label", "bbox", "level", "attributes", "children", "world_pos"}
_TOP_KEYS = {"image_size", "camera", "head", "mesh", "config", "nodes"}


def _expect(obj: dict, key: str, path: str):
    if key not in obj:
        raise SchemaError(f"missing required key {key!r}", path)
    return obj[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected a number, got {value!r}", path)
    if not math.isfinite(value):
        raise SchemaError(f"expected a finite number, got {value!r}", path)
    return value


def _vec(value, n: int, path: str) -> tuple:
    if not isinstance(value, list) or len(value) != n:
        raise SchemaError(f"expected a list of {n} numbers", path)
    return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))


def _parse_node(obj, path: str, level: int, seen: set[str], warnings: list[str]) -> SceneNode:
    if not isinstance(obj, dict):
        raise SchemaError("node must be an object", path)
    for key in obj:
        if key not in _NODE_KEYS:
            warnings.append(f"{path}: ignoring unknown node field {key!r}")
    nid = _expect(obj, "id", path)
    if not isinstance(nid, str) or not nid:
        raise SchemaError("id must be a non-empty string", path)
    if nid in seen:
        raise SchemaError(f"duplicate node id {nid!r}", path)
    seen.add(nid)
    label = _expect(obj, "label", path)
    if not isinstance(label, str):
        raise SchemaError("label must be a string", f"{path}.label")
    x, y, w, h = _vec(_expect(obj, "bbox", path), 4, f"{path}.bbox")
    if w <= 0 or h <= 0 or x < 0 or y < 0:
        raise SchemaError(f"malformed bbox {[x, y, w, h]}", f"{path}.bbox")
    declared = _expect(obj, "level", path)
    if declared != level:
        raise SchemaError(f"level {declared!r} != expected {level}", f"{path}.level")
    attrs_obj = obj.get("attributes", {})
    if not isinstance(attrs_obj, dict):
        raise SchemaError("attributes must be an object", f"{path}.attributes")
    attributes: AttributeSet = {}
    for key in sorted(attrs_obj):
        value = attrs_obj[key]
        if isinstance(value, bool) or not isinstance(value, (str, int, float)):
            raise SchemaError(f"attribute {key!r} must be a string or number", f"{path}.attributes")
        if isinstance(value, (int, float)) and not math.isfinite(value):
            raise SchemaError(f"attribute {key!r} must be finite", f"{path}.attributes")
        attributes[key] = value
    world_pos = None
    if obj.get("world_pos") is not None:
        world_pos = _vec(obj["world_pos"], 3, f"{path}.world_pos")
    children = tuple(
        _parse_node(c, f"{path}.children[{i}]", level + 1, seen, warnings)
        for i, c in enumerate(obj.get("children", []))
    )
    return SceneNode(nid, label, BBox2D(x, y, w, h), level, attributes, children, world_pos)


def parse_snapshot_verbose(data: bytes | str) -> tuple[SceneSnapshot, list[str]]:
    """Parse and fully validate a scene fixture; returns ignored-field warnings."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaError("top level must be an object")

    warnings: list[str] = []
    for key in obj:
        if key not in _TOP_KEYS:
            warnings.append(f"$: ignoring unknown field {key!r}")

    image_size = _vec(_expect(obj, "image_size", "$"), 2, "$.image_size")
    cam_obj = _expect(obj, "camera", "$")
    camera = CameraIntrinsics(
        _number(_expect(cam_obj, "fx", "$.camera"), "$.camera.fx"),
        _number(_expect(cam_obj, "fy", "$.camera"), "$.camera.fy"),
        _number(_expect(cam_obj, "cx", "$.camera"), "$.camera.cx"),
        _number(_expect(cam_obj, "cy", "$.camera"), "$.camera.cy"),
    )
    head_obj = _expect(obj, "head", "$")
    head = Pose(
        _vec(_expect(head_obj, "position", "$.head"), 3, "$.head.position"),
        _vec(_expect(head_obj, "quaternion", "$.head"), 4, "$.head.quaternion"),
    )
    mesh_obj = _expect(obj, "mesh", "$")
    vertices = tuple(
        _vec(v, 3, f"$.mesh.vertices[{i}]") for i, v in enumerate(_expect(mesh_obj, "vertices", "$.mesh"))
    )
    triangles = []
    for i, tri in enumerate(_expect(mesh_obj, "triangles", "$.mesh")):
        if not isinstance(tri, list) or len(tri) != 3 or any(not isinstance(k, int) or isinstance(k, bool) for k in tri):
            raise SchemaError("triangle must be a list of 3 vertex indices", f"$.mesh.triangles[{i}]")
        triangles.append(tuple(tri))
    mesh = TriangleMesh(vertices, tuple(triangles))

    cfg_obj = obj.get("config", {})
    if not isinstance(cfg_obj, dict):
        raise SchemaError("config must be an object", "$.config")
    known = {f.name for f in fields(Config)}
    cfg_values = {}
    for key, value in cfg_obj.items():
        if key not in known:
            warnings.append(f"$.config: ignoring unknown field {key!r}")
            continue
        cfg_values[key] = _number(value, f"$.config.{key}")
    config = Config(**cfg_values)

    seen: set[str] = set()
    nodes = tuple(
        _parse_node(n, f"$.nodes[{i}]", 1, seen, warnings)
        for i, n in enumerate(_expect(obj, "nodes", "$"))
    )

    snapshot = SceneSnapshot(nodes, mesh, camera, head, image_size, config)
    violations = validate_snapshot(snapshot)
    if violations:
        first = violations[0]
        raise SchemaError(
            f"{len(violations)} invariant violation(s), first: {first.rule} ({first.detail})",
            first.node_id or "$",
        )
    for message in warnings:
        log.warning("%s", message)
    return snapshot, warnings


def parse_snapshot(data: bytes | str) -> SceneSnapshot:
    snapshot, _ = parse_snapshot_verbose(data)
    return snapshot


# -- serialization ------------------------------------------------------------


def node_to_dict(node: SceneNode) -> dict:
    out = {
        "id": node.id,
        "label": node.label,
        "bbox": node.bbox.as_list(),
        "level": node.level,
        "attributes": dict(node.attributes),
        "children": [node_to_dict(c) for c in node.children],
    }
    if node.world_pos is not None:
        out["world_pos"] = list(node.world_pos)
    return out


def snapshot_to_dict(s: SceneSnapshot) -> dict:
    return {
        "image_size": list(s.image_size),
        "camera": {"fx": s.camera.fx, "fy": s.camera.fy, "cx": s.camera.cx, "cy": s.camera.cy},
        "head": {"position": list(s.head.position), "quaternion": list(s.head.orientation)},
        "mesh": {
            "vertices": [list(v) for v in s.mesh.vertices],
            "triangles": [list(t) for t in s.mesh.triangles],
        },
        "config": {f.name: getattr(s.config, f.name) for f in fields(Config)},
        "nodes": [node_to_dict(n) for n in s.nodes],
    }


def serialize_snapshot(s: SceneSnapshot) -> bytes:
    """Canonical byte encoding; ``parse . serialize`` is the identity."""
    return canonical_bytes(snapshot_to_dict(s))
