"""Gesture-driven interaction state machine.

``process_event`` is a total, deterministic transition over a per-session
``InteractionState``.  Events arrive pre-classified (no gesture
recognition happens here) and every transition returns the feedback
events it produced; replaying a trace twice yields identical feedback.

Dispatch table (documented precedence):

* ``GazeMove``            -- track the gaze pixel.
* ``PinchStart(hand)``    -- if the other hand is already pinching, a
  two-hand session begins; it is a *zoom* session when the midpoint of
  the hands lies on a proxy or container box, otherwise a *brush*
  session.  A single pinch on a selected proxy starts a drag; on any
  other proxy it starts a skim contact; in empty space it activates
  proxies around the gaze when the extended gaze region covers level-1
  objects, else it is a plain contact.
* ``PinchEnd(hand)``      -- ends the two-hand session (an uncommitted
  brush over empty space becomes a group container), confirms the gaze
  target for an activation pinch, issues the drag command, or ends a
  skim contact.
* ``HandMove(hand, p)``   -- brush/zoom updates inside a two-hand
  session; otherwise skim / attribute-filter pointer updates while a
  contact or hold is active.
* ``Tap(p)``              -- clone the tapped proxy into the held
  container (while one is held), else select the tapped proxy.  Two
  taps on the same proxy within ``double_tap_window_ms`` count as a
  double tap.
* ``HoldStart/HoldEnd``   -- holding a container grabs it for cloning;
  holding a proxy for ``hold_duration_ms`` pins its attribute proxies.
* ``DoubleTap(p)``        -- semantic grouping by the proxy's first
  attribute key.
* ``SurfacePathPoint/End``-- lasso selection on the surface projection
  (layout-frame x/y) of the proxy centers.
* ``Tick(dt)``            -- lazy-follow anchor update and hold timing.

Errors that the narrative treats as "feedback only" are emitted as
``Notice`` feedback events and never raise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .geometry import Vec3, boxes_intersect, v_add, v_norm, v_scale, v_sub
from .jsonutil import canonical_json
from .layout import ProxyBox, ProxyLayout, empty_layout, solve_layout
from .perception import GazeOutsideImage, extend_gaze_region
from .scene import Config, SceneNode, SceneSnapshot, find_node, root_bboxes
from .spatial import estimate_positions, gaze_hit_depth

# modes
IDLE = "Idle"
PROXIES_ACTIVE = "ProxiesActive"
SKIMMING = "Skimming"
BRUSHING = "Brushing"
FILTER_PINNED = "FilterPinned"
CONTAINER_PLACING = "ContainerPlacing"
ZOOM_PENDING = "ZoomPending"

SELECT_COLOR = "#ffd400"
GAZE_COLOR = "#80d8ff"
PALETTE = (
    "#e6194b",
    "#3cb44b",
    "#ffe119",
    "#4363d8",
    "#f58231",
    "#911eb4",
    "#46f0f0",
    "#f032e6",
)

HANDS = ("left", "right")

_KNOWN_KINDS = {
    "GazeMove",
    "PinchStart",
    "PinchEnd",
    "HandMove",
    "Tap",
    "HoldStart",
    "HoldEnd",
    "DoubleTap",
    "SurfacePathPoint",
    "SurfacePathEnd",
    "Tick",
}


class UnknownId(KeyError):
    pass


@dataclass(frozen=True)
class GestureEvent:
    t: float
    kind: str
    px: tuple[float, float] | None = None
    hand: str | None = None
    point: tuple[float, ...] | None = None
    dt: float | None = None

    @classmethod
    def from_dict(cls, obj: dict) -> "GestureEvent":
        if not isinstance(obj, dict) or "t" in obj and not isinstance(obj.get("t"), (int, float)):
            raise ValueError(f"malformed gesture event: {obj!r}")
        if "t" not in obj or "kind" not in obj:
            raise ValueError(f"gesture event needs 't' and 'kind': {obj!r}")
        kind = obj["kind"]
        px = tuple(obj["px"]) if obj.get("px") is not None else None
        point = tuple(obj["point"]) if obj.get("point") is not None else None
        hand = obj.get("hand")
        if hand is not None and hand not in HANDS:
            raise ValueError(f"hand must be left or right, got {hand!r}")
        if kind in ("PinchStart", "PinchEnd", "HandMove") and hand is None:
            raise ValueError(f"{kind} requires a hand")
        if kind == "Tick" and not isinstance(obj.get("dt"), (int, float)):
            raise ValueError("Tick requires dt seconds")
        return cls(obj["t"], kind, px, hand, point, obj.get("dt"))

    def to_dict(self) -> dict:
        out: dict = {"t": self.t, "kind": self.kind}
        if self.px is not None:
            out["px"] = list(self.px)
        if self.hand is not None:
            out["hand"] = self.hand
        if self.point is not None:
            out["point"] = list(self.point)
        if self.dt is not None:
            out["dt"] = self.dt
        return out


@dataclass(frozen=True)
class FeedbackEvent:
    t: float
    kind: str
    data: dict

    def to_dict(self) -> dict:
        return {"t": self.t, "kind": self.kind, **self.data}


@dataclass
class GroupContainer:
    id: str
    members: list[str]
    collapsed: bool
    center: Vec3  # layout frame
    half_extent: float
    expanded_half_extent: float


@dataclass(frozen=True)
class AttrProxy:
    id: str
    key: str
    value: object
    center: Vec3
    half_extent: float


@dataclass
class PinnedAttributes:
    node_id: str
    boxes: tuple[AttrProxy, ...]


@dataclass
class PinchState:
    role: str  # activation | contact | drag | twohand
    origin: Vec3 | None


@dataclass
class HoldState:
    point: Vec3
    t0: float
    pin_target: str | None
    committed: bool = False


@dataclass
class TwoHandSession:
    kind: str  # zoom | brush
    d0: float | None
    focus_id: str | None
    consumed: bool = False
    committed: bool = False


@dataclass
class InteractionState:
    snapshot: SceneSnapshot
    mode: str = IDLE
    active_level: int = 1
    visible_ids: list[str] = field(default_factory=list)
    positions: dict[str, Vec3] = field(default_factory=dict)
    unplaced: list[str] = field(default_factory=list)
    layout: ProxyLayout | None = None
    selection: list[str] = field(default_factory=list)
    groups: list[GroupContainer] = field(default_factory=list)
    anchor: Vec3 = (0.0, 0.0, 0.0)
    pinned: PinnedAttributes | None = None
    grouping_key: str | None = None
    # gesture tracking
    gaze_px: tuple[float, float] | None = None
    hands: dict[str, Vec3 | None] = field(default_factory=lambda: {"left": None, "right": None})
    pinches: dict[str, PinchState | None] = field(default_factory=lambda: {"left": None, "right": None})
    hold: HoldState | None = None
    twohand: TwoHandSession | None = None
    panel_target: str | None = None
    last_attr_hit: str | None = None
    last_tap: tuple[float, str] | None = None
    surface_path: list[tuple[float, float]] = field(default_factory=list)
    visible_stack: list[dict] = field(default_factory=list)
    follow_hand: str | None = None
    held_container: str | None = None
    container_seq: int = 0


def new_state(snapshot: SceneSnapshot) -> InteractionState:
    return InteractionState(snapshot=snapshot)


def lazy_follow_tick(anchor: Vec3, hand: Vec3, dt: float, cfg: Config) -> Vec3:
    """Anchor controller: stationary within the follow threshold, exponential pursuit beyond."""
    if dt <= 0:
        return anchor
    offset = v_sub(hand, anchor)
    if v_norm(offset) <= cfg.follow_threshold_m:
        return anchor
    alpha = 1.0 - math.exp(-dt / cfg.follow_time_constant_s)
    return v_add(anchor, v_scale(offset, alpha))


# -- internal helpers ----------------------------------------------------------


def _other(hand: str) -> str:
    return "right" if hand == "left" else "left"


def _box_world_center(state: InteractionState, center: Vec3) -> Vec3:
    return v_add(state.anchor, center)


def _point_in_box(state: InteractionState, p: Vec3, center: Vec3, half: float) -> bool:
    w = _box_world_center(state, center)
    return all(abs(p[k] - w[k]) <= half for k in range(3))


def _is_node_id(state: InteractionState, node_id: str) -> bool:
    return find_node(state.snapshot, node_id) is not None


def _bound_box(state: InteractionState, node_id: str) -> ProxyBox | None:
    return state.layout.box(node_id) if state.layout else None


def _hit_bound_proxy(state: InteractionState, p: Vec3) -> str | None:
    for node_id in state.visible_ids:
        box = _bound_box(state, node_id)
        if box and _point_in_box(state, p, box.center, box.half_extent):
            return node_id
    return None


def _hit_container(state: InteractionState, p: Vec3, collapsed_only: bool = False) -> str | None:
    for c in state.groups:
        if collapsed_only and not c.collapsed:
            continue
        if _point_in_box(state, p, c.center, c.half_extent):
            return c.id
    return None


def _hit_attr_box(state: InteractionState, p: Vec3) -> AttrProxy | None:
    if not state.pinned:
        return None
    for box in state.pinned.boxes:
        if _point_in_box(state, p, box.center, box.half_extent):
            return box
    return None


def _container(state: InteractionState, cid: str) -> GroupContainer:
    for c in state.groups:
        if c.id == cid:
            return c
    raise UnknownId(cid)


def _node(state: InteractionState, node_id: str) -> SceneNode:
    node = find_node(state.snapshot, node_id)
    if node is None:
        raise UnknownId(node_id)
    return node


def _layout_payload(state: InteractionState) -> dict:
    layout = state.layout
    boxes = []
    if layout:
        boxes = [
            {"id": b.id, "center": list(b.center), "half_extent": b.half_extent}
            for b in layout.boxes
        ]
    attribute_boxes = []
    if state.pinned:
        attribute_boxes = [
            {
                "id": b.id,
                "key": b.key,
                "value": b.value,
                "center": list(b.center),
                "half_extent": b.half_extent,
            }
            for b in state.pinned.boxes
        ]
    containers = [
        {
            "id": c.id,
            "center": list(c.center),
            "half_extent": c.half_extent,
            "collapsed": c.collapsed,
            "members": list(c.members),
        }
        for c in state.groups
    ]
    return {
        "anchor": list(layout.anchor if layout else state.anchor),
        "scale_used": layout.scale_used if layout else 1.0,
        "boxes": boxes,
        "attribute_boxes": attribute_boxes,
        "containers": containers,
    }


def _emit_layout(state: InteractionState, t: float, out: list[FeedbackEvent]) -> None:
    out.append(FeedbackEvent(t, "LayoutUpdated", {"layout": _layout_payload(state)}))


def _notice(t: float, code: str, out: list[FeedbackEvent]) -> None:
    out.append(FeedbackEvent(t, "Notice", {"code": code}))


def _valid_selection_ids(state: InteractionState) -> set[str]:
    return set(state.visible_ids) | {c.id for c in state.groups}


def _set_selection(state: InteractionState, ids: list[str], t: float, out: list[FeedbackEvent]) -> None:
    deduped: list[str] = []
    for i in ids:
        if i not in deduped:
            deduped.append(i)
    if deduped == state.selection:
        return
    state.selection = deduped
    out.append(FeedbackEvent(t, "SelectionChanged", {"ids": list(deduped)}))
    for i in deduped:
        out.append(FeedbackEvent(t, "HighlightObject", {"id": i, "color": SELECT_COLOR}))
        out.append(FeedbackEvent(t, "HighlightProxy", {"id": i, "color": SELECT_COLOR}))


def _prune_selection(state: InteractionState, t: float, out: list[FeedbackEvent]) -> None:
    valid = _valid_selection_ids(state)
    kept = [i for i in state.selection if i in valid]
    if kept != state.selection:
        _set_selection(state, kept, t, out)


def _hide_panel(state: InteractionState, t: float, out: list[FeedbackEvent]) -> None:
    if state.panel_target is not None:
        state.panel_target = None
        out.append(FeedbackEvent(t, "HidePanel", {}))


def _unpin(state: InteractionState, t: float, out: list[FeedbackEvent]) -> None:
    if state.pinned is not None:
        state.pinned = None
        state.last_attr_hit = None
        _emit_layout(state, t, out)


def _clear_partition_groups(state: InteractionState) -> None:
    state.groups = [c for c in state.groups if not c.id.startswith("group:")]


def _node_world_point(state: InteractionState, node_id: str) -> Vec3:
    pos = state.positions.get(node_id)
    if pos is not None:
        return pos
    box = _bound_box(state, node_id)
    if box:
        return _box_world_center(state, box.center)
    return state.anchor


def _aggregate_attributes(state: InteractionState, container: GroupContainer) -> dict:
    """Aggregate panel body: member count plus sums of shared numeric keys."""
    out: dict = {"members": len(container.members)}
    for key in _shared_numeric_keys(state, container):
        out[key] = sum(_node(state, m).attributes[key] for m in container.members)
    return out


def _shared_numeric_keys(state: InteractionState, container: GroupContainer) -> list[str]:
    if not container.members:
        return []
    keys: set[str] | None = None
    for member in container.members:
        node = find_node(state.snapshot, member)
        if node is None:
            return []
        numeric = {
            k for k, v in node.attributes.items() if isinstance(v, (int, float)) and not isinstance(v, bool)
        }
        keys = numeric if keys is None else keys & numeric
    return sorted(keys or ())


# -- core operations -----------------------------------------------------------


def _activation_nodes(state: InteractionState, gaze_px: tuple[float, float], cfg: Config) -> list[SceneNode]:
    snapshot = state.snapshot
    depth = gaze_hit_depth(snapshot, gaze_px)
    radius_px = cfg.gaze_extension_m * snapshot.camera.fx / depth
    region = extend_gaze_region(gaze_px, radius_px, snapshot.image_size)
    roots = root_bboxes(snapshot)
    return [n for n in snapshot.nodes if boxes_intersect(roots[n.id], region)]


def _gaze_target(state: InteractionState, out_of: list[str]) -> str | None:
    """Smallest visible node whose root bbox contains the gaze pixel."""
    if state.gaze_px is None:
        return None
    gx, gy = state.gaze_px
    roots = root_bboxes(state.snapshot)
    best: tuple[float, str] | None = None
    for node_id in out_of:
        box = roots.get(node_id)
        if box and box.x <= gx <= box.x + box.w and box.y <= gy <= box.y + box.h:
            key = (box.area, node_id)
            if best is None or key < best:
                best = key
    return best[1] if best else None


def _rebind(
    state: InteractionState,
    ids: list[str],
    positions: dict[str, Vec3],
    unplaced: list[str],
    cfg: Config,
    t: float,
    out: list[FeedbackEvent],
) -> None:
    """Bind a new visible set, re-solve the layout, and restore invariants."""
    state.visible_ids = list(ids)
    state.positions = dict(positions)
    state.unplaced = list(unplaced)
    state.layout = (
        solve_layout(positions, cfg, anchor=state.anchor) if positions else empty_layout(state.anchor)
    )
    _hide_panel(state, t, out)
    if state.pinned is not None:
        state.pinned = None
        state.last_attr_hit = None
    _emit_layout(state, t, out)
    _prune_selection(state, t, out)


def activate_proxies(
    state: InteractionState, gaze_px: tuple[float, float], cfg: Config, t: float, hand: str | None = None
) -> list[FeedbackEvent]:
    """Build proxies for level-1 nodes around the gaze; anchors near the triggering hand."""
    out: list[FeedbackEvent] = []
    try:
        nodes = _activation_nodes(state, gaze_px, cfg)
    except GazeOutsideImage:
        _notice(t, "GazeOutsideImage", out)
        return out
    if not nodes:
        _notice(t, "NoObjectsInRegion", out)
        return out

    hand_pos = state.hands.get(hand) if hand else None
    if hand_pos is not None:
        state.anchor = hand_pos
    elif state.layout is None:
        from .geometry import quat_rotate

        head = state.snapshot.head
        state.anchor = v_add(head.position, quat_rotate(head.orientation, (0.0, 0.0, 0.5)))

    estimate = estimate_positions(state.snapshot, nodes)
    previous_level = state.active_level
    state.active_level = 1
    state.visible_stack = []
    state.grouping_key = None
    _clear_partition_groups(state)
    state.held_container = None
    state.mode = PROXIES_ACTIVE
    state.follow_hand = hand or state.follow_hand
    if previous_level != 1:
        out.append(FeedbackEvent(t, "LevelChanged", {"level": 1}))
    _rebind(state, [n.id for n in nodes], estimate.positions, list(estimate.unplaced), cfg, t, out)

    target = _gaze_target(state, state.visible_ids)
    if target:
        out.append(FeedbackEvent(t, "HighlightObject", {"id": target, "color": GAZE_COLOR}))
        out.append(FeedbackEvent(t, "HighlightProxy", {"id": target, "color": GAZE_COLOR}))
    return out


def _skim_panel(state: InteractionState, target: str, t: float, out: list[FeedbackEvent]) -> None:
    if target == state.panel_target:
        return
    if _is_node_id(state, target):
        node = _node(state, target)
        attributes = dict(node.attributes)
        point = _node_world_point(state, target)
    else:
        container = _container(state, target)
        attributes = _aggregate_attributes(state, container)
        point = _box_world_center(state, container.center)
    state.panel_target = target
    out.append(
        FeedbackEvent(t, "ShowPanel", {"id": target, "attributes": attributes, "point": list(point)})
    )


def _pointer_update(state: InteractionState, p: Vec3, t: float, cfg: Config, out: list[FeedbackEvent]) -> None:
    """Skim / attribute-filter hit logic shared by contact and hold movement."""
    if state.mode == FILTER_PINNED and state.pinned:
        attr_box = _hit_attr_box(state, p)
        if attr_box:
            if attr_box.id != state.last_attr_hit:
                state.last_attr_hit = attr_box.id
                _hide_panel(state, t, out)
                _attribute_filter(state, attr_box, t, out)
            return
        state.last_attr_hit = None
    target = _hit_bound_proxy(state, p)
    if target is None:
        target = _hit_container(state, p, collapsed_only=True)
    if target is None:
        _hide_panel(state, t, out)
        return
    _skim_panel(state, target, t, out)


def _attribute_filter(state: InteractionState, attr_box: AttrProxy, t: float, out: list[FeedbackEvent]) -> None:
    ids = []
    for node_id in state.visible_ids:
        node = find_node(state.snapshot, node_id)
        if node is not None and node.attributes.get(attr_box.key) == attr_box.value:
            ids.append(node_id)
    _set_selection(state, ids, t, out)


def _pin_attributes(state: InteractionState, node_id: str, t: float, cfg: Config, out: list[FeedbackEvent]) -> None:
    node = _node(state, node_id)
    held_box = _bound_box(state, node_id)
    if held_box is None:
        return
    step = cfg.proxy_size_m + cfg.min_gap_m
    boxes = []
    for i, key in enumerate(sorted(node.attributes)):
        center = (held_box.center[0] + (i + 1) * step, held_box.center[1], held_box.center[2])
        boxes.append(AttrProxy(f"attr:{key}", key, node.attributes[key], center, cfg.proxy_size_m / 2))
    state.pinned = PinnedAttributes(node_id, tuple(boxes))
    state.last_attr_hit = None
    state.mode = FILTER_PINNED
    _hide_panel(state, t, out)
    _emit_layout(state, t, out)


def _semantic_group(state: InteractionState, node_id: str, key: str | None, t: float, cfg: Config, out: list[FeedbackEvent]) -> None:
    node = find_node(state.snapshot, node_id)
    if node is None:
        return
    if key is None:
        keys = sorted(node.attributes)
        if not keys:
            return
        key = keys[0]
    state.grouping_key = key

    partitions: list[tuple[str, list[str]]] = []  # (value token, member ids)
    index: dict[str, int] = {}
    for vid in state.visible_ids:
        member = find_node(state.snapshot, vid)
        if member is None:
            continue
        token = canonical_json(member.attributes.get(key))
        if token not in index:
            index[token] = len(partitions)
            partitions.append((token, []))
        partitions[index[token]][1].append(vid)
    if not partitions:
        return

    for i, (_, members) in enumerate(partitions):
        color = PALETTE[i % len(PALETTE)]
        for member in members:
            out.append(FeedbackEvent(t, "HighlightObject", {"id": member, "color": color}))

    rep_positions: dict[str, Vec3] = {}
    group_ids: list[str] = []
    membership: dict[str, list[str]] = {}
    for token, members in partitions:
        gid = f"group:{key}={token}"
        group_ids.append(gid)
        membership[gid] = members
        placed = [state.positions[m] for m in members if m in state.positions]
        if placed:
            rep_positions[gid] = tuple(sum(p[k] for p in placed) / len(placed) for k in range(3))

    _clear_partition_groups(state)
    state.visible_ids = group_ids
    state.positions = rep_positions
    state.unplaced = [g for g in group_ids if g not in rep_positions]
    state.layout = (
        solve_layout(rep_positions, cfg, anchor=state.anchor) if rep_positions else empty_layout(state.anchor)
    )
    for gid in group_ids:
        box = state.layout.box(gid)
        if box is None:
            continue
        state.groups.append(
            GroupContainer(gid, list(membership[gid]), True, box.center, box.half_extent, box.half_extent)
        )
        out.append(FeedbackEvent(t, "GroupUpdated", {"id": gid, "members": list(membership[gid])}))
    _hide_panel(state, t, out)
    if state.pinned is not None:
        state.pinned = None
        state.last_attr_hit = None
    _emit_layout(state, t, out)
    _prune_selection(state, t, out)


def _zoom_in(state: InteractionState, focus_id: str, t: float, cfg: Config, out: list[FeedbackEvent]) -> None:
    if not _is_node_id(state, focus_id):
        container = _container(state, focus_id)
        if container.collapsed:
            container.collapsed = False
            container.half_extent = container.expanded_half_extent
            out.append(FeedbackEvent(t, "GroupUpdated", {"id": container.id, "members": list(container.members)}))
            _emit_layout(state, t, out)
        return
    node = _node(state, focus_id)
    if not node.children:
        _notice(t, "NoChildren", out)
        return
    state.visible_stack.append(
        {
            "level": state.active_level,
            "visible_ids": list(state.visible_ids),
            "positions": dict(state.positions),
            "unplaced": list(state.unplaced),
        }
    )
    _clear_partition_groups(state)
    state.grouping_key = None
    estimate = estimate_positions(state.snapshot, list(node.children))
    state.active_level += 1
    out.append(FeedbackEvent(t, "LevelChanged", {"level": state.active_level}))
    _rebind(state, [c.id for c in node.children], estimate.positions, list(estimate.unplaced), cfg, t, out)


def _zoom_out(state: InteractionState, focus_id: str | None, t: float, cfg: Config, out: list[FeedbackEvent]) -> None:
    if focus_id is not None and not _is_node_id(state, focus_id):
        container = _container(state, focus_id)
        if container.collapsed:
            return
        if not container.members:
            _notice(t, "EmptyContainer", out)
            return
        container.expanded_half_extent = container.half_extent
        container.collapsed = True
        container.half_extent = cfg.proxy_size_m / 2
        out.append(FeedbackEvent(t, "GroupUpdated", {"id": container.id, "members": list(container.members)}))
        _emit_layout(state, t, out)
        return
    if not state.visible_stack:
        _notice(t, "AtRoot", out)
        return
    frame = state.visible_stack.pop()
    _clear_partition_groups(state)
    state.grouping_key = None
    state.active_level = frame["level"]
    out.append(FeedbackEvent(t, "LevelChanged", {"level": state.active_level}))
    _rebind(state, frame["visible_ids"], frame["positions"], frame["unplaced"], cfg, t, out)


def _create_container(
    state: InteractionState, lo: Vec3, hi: Vec3, t: float, cfg: Config, out: list[FeedbackEvent]
) -> None:
    center = tuple((lo[k] + hi[k]) / 2 for k in range(3))
    half = max(max((hi[k] - lo[k]) / 2 for k in range(3)), cfg.proxy_size_m / 2)
    state.container_seq += 1
    cid = f"container:{state.container_seq}"
    state.groups.append(GroupContainer(cid, [], False, center, half, half))
    out.append(FeedbackEvent(t, "GroupCreated", {"id": cid}))
    _emit_layout(state, t, out)


def _add_to_container(state: InteractionState, cid: str, node_id: str, t: float, out: list[FeedbackEvent]) -> None:
    container = _container(state, cid)
    if node_id in container.members:
        return  # cloning is idempotent
    container.members.append(node_id)
    out.append(FeedbackEvent(t, "GroupUpdated", {"id": cid, "members": list(container.members)}))
    for key in _shared_numeric_keys(state, container):
        value = sum(_node(state, m).attributes[key] for m in container.members)
        out.append(FeedbackEvent(t, "AggregateComputed", {"id": cid, "key": key, "value": value}))
    _emit_layout(state, t, out)


def aggregate_group(state: InteractionState, cid: str, key: str, t: float) -> FeedbackEvent:
    """Sum a numeric attribute over a container's members.

    Raises ``NonNumericAttribute`` naming the first offending member.
    """
    container = _container(state, cid)
    total = 0
    for member in container.members:
        value = _node(state, member).attributes.get(key)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise NonNumericAttribute(f"member {member!r} has no numeric attribute {key!r}")
        total += value
    return FeedbackEvent(t, "AggregateComputed", {"id": cid, "key": key, "value": total})


class NonNumericAttribute(ValueError):
    pass


def _point_in_polygon(pt: tuple[float, float], polygon: list[tuple[float, float]]) -> bool:
    """Even-odd rule via horizontal ray casting."""
    x, y = pt
    inside = False
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            x_cross = (x2 - x1) * (y - y1) / (y2 - y1) + x1
            if x < x_cross:
                inside = not inside
    return inside


def _lasso_select(state: InteractionState, path: list[tuple[float, float]], t: float, out: list[FeedbackEvent]) -> None:
    if len(path) < 3 or math.dist(path[0], path[-1]) > 0.01:
        _notice(t, "OpenPath", out)
        return
    ids = []
    for node_id in state.visible_ids:
        box = _bound_box(state, node_id)
        if box and _point_in_polygon((box.center[0], box.center[1]), path):
            ids.append(node_id)
    for c in state.groups:
        if _point_in_polygon((c.center[0], c.center[1]), path):
            ids.append(c.id)
    _set_selection(state, ids, t, out)


# -- two-hand sessions ---------------------------------------------------------


def _hand_distance(state: InteractionState) -> float | None:
    left, right = state.hands["left"], state.hands["right"]
    if left is None or right is None:
        return None
    return v_norm(v_sub(left, right))


def _hand_midpoint(state: InteractionState) -> Vec3 | None:
    left, right = state.hands["left"], state.hands["right"]
    if left is None or right is None:
        return None
    return tuple((left[k] + right[k]) / 2 for k in range(3))


def _begin_twohand(state: InteractionState, t: float, cfg: Config, out: list[FeedbackEvent]) -> None:
    state.hold = None
    _hide_panel(state, t, out)
    if state.mode == FILTER_PINNED:
        _unpin(state, t, out)
    focus = None
    midpoint = _hand_midpoint(state)
    if midpoint is not None:
        focus = _hit_bound_proxy(state, midpoint)
        if focus is None:
            focus = _hit_container(state, midpoint)
    kind = "zoom" if focus else "brush"
    state.twohand = TwoHandSession(kind, _hand_distance(state), focus)
    state.mode = ZOOM_PENDING if kind == "zoom" else BRUSHING
    for hand in HANDS:
        if state.pinches[hand]:
            state.pinches[hand].role = "twohand"


def _current_region(state: InteractionState) -> tuple[Vec3, Vec3] | None:
    left, right = state.hands["left"], state.hands["right"]
    if left is None or right is None:
        return None
    a = v_sub(left, state.anchor)
    b = v_sub(right, state.anchor)
    lo = tuple(min(a[k], b[k]) for k in range(3))
    hi = tuple(max(a[k], b[k]) for k in range(3))
    return lo, hi


def _region_selection(state: InteractionState, region: tuple[Vec3, Vec3]) -> list[str]:
    lo, hi = region

    def hits(center: Vec3, half: float) -> bool:
        return all(lo[k] <= center[k] + half and center[k] - half <= hi[k] for k in range(3))

    ids = []
    for node_id in state.visible_ids:
        box = _bound_box(state, node_id)
        if box and hits(box.center, box.half_extent):
            ids.append(node_id)
    for c in state.groups:
        if hits(c.center, c.half_extent):
            ids.append(c.id)
    return ids


def _twohand_move(state: InteractionState, t: float, cfg: Config, out: list[FeedbackEvent]) -> None:
    session = state.twohand
    if session is None:
        return
    if session.kind == "zoom":
        if session.consumed or session.d0 is None or session.d0 <= 0:
            return
        d = _hand_distance(state)
        if d is None:
            return
        ratio = d / session.d0
        if ratio >= cfg.zoom_in_ratio:
            session.consumed = True
            _zoom_in(state, session.focus_id, t, cfg, out)
        elif ratio <= cfg.zoom_out_ratio:
            session.consumed = True
            _zoom_out(state, session.focus_id, t, cfg, out)
        return
    region = _current_region(state)
    if region is None:
        return
    ids = _region_selection(state, region)
    if ids or session.committed:
        session.committed = session.committed or bool(ids)
        _set_selection(state, ids, t, out)


def _end_twohand(state: InteractionState, t: float, cfg: Config, out: list[FeedbackEvent]) -> None:
    session = state.twohand
    state.twohand = None
    if session and session.kind == "brush":
        region = _current_region(state)
        if region is not None:
            ids = _region_selection(state, region)
            if ids:
                _set_selection(state, ids, t, out)  # a non-empty region falls through to brushing
            elif session.committed:
                _set_selection(state, [], t, out)
            else:
                _create_container(state, region[0], region[1], t, cfg, out)
    if state.mode in (BRUSHING, ZOOM_PENDING):
        state.mode = PROXIES_ACTIVE
    for hand in HANDS:
        pinch = state.pinches[hand]
        if pinch and pinch.role == "twohand":
            pinch.role = "contact"


# -- dispatcher ----------------------------------------------------------------


def _commit_due_pin(state: InteractionState, t: float, cfg: Config, out: list[FeedbackEvent]) -> None:
    hold = state.hold
    if (
        hold
        and hold.pin_target
        and not hold.committed
        and t - hold.t0 >= cfg.hold_duration_ms
    ):
        hold.committed = True
        _pin_attributes(state, hold.pin_target, t, cfg, out)


def process_event(
    state: InteractionState, ev: GestureEvent, cfg: Config
) -> tuple[InteractionState, list[FeedbackEvent]]:
    """Apply one gesture event; unknown kinds are ignored."""
    if ev.kind not in _KNOWN_KINDS:
        return state, []
    out: list[FeedbackEvent] = []
    t = ev.t
    _commit_due_pin(state, t, cfg, out)

    if ev.kind == "GazeMove":
        state.gaze_px = ev.px

    elif ev.kind == "PinchStart":
        hand = ev.hand
        pos = state.hands.get(hand)
        state.pinches[hand] = PinchState("contact", pos)
        if state.pinches[_other(hand)] is not None and state.twohand is None:
            _begin_twohand(state, t, cfg, out)
        elif state.twohand is None:
            target = _hit_bound_proxy(state, pos) if pos else None
            if target is None and pos is not None:
                target = _hit_container(state, pos, collapsed_only=True)
            if target and target in state.selection:
                state.pinches[hand].role = "drag"
            elif target:
                if state.mode == PROXIES_ACTIVE:
                    state.mode = SKIMMING
                _pointer_update(state, pos, t, cfg, out)
            elif state.gaze_px is not None:
                try:
                    has_nodes = bool(_activation_nodes(state, state.gaze_px, cfg))
                except GazeOutsideImage:
                    has_nodes = False
                if has_nodes:
                    state.pinches[hand].role = "activation"
                    out.extend(activate_proxies(state, state.gaze_px, cfg, t, hand))

    elif ev.kind == "PinchEnd":
        hand = ev.hand
        pinch = state.pinches.get(hand)
        state.pinches[hand] = None
        if pinch is None:
            return state, out
        if pinch.role == "twohand":
            _end_twohand(state, t, cfg, out)
        elif pinch.role == "activation":
            _hide_panel(state, t, out)
            target = _gaze_target(state, [i for i in state.visible_ids if _is_node_id(state, i)])
            if target:
                _set_selection(state, [target], t, out)
        elif pinch.role == "drag":
            if not state.selection:
                _notice(t, "EmptySelection", out)
            else:
                current = state.hands.get(hand)
                origin = pinch.origin
                vector = list(v_sub(current, origin)) if current and origin else [0.0, 0.0, 0.0]
                out.append(FeedbackEvent(t, "CommandIssued", {"ids": list(state.selection), "vector": vector}))
        else:  # contact
            _hide_panel(state, t, out)
            if state.mode == SKIMMING:
                state.mode = PROXIES_ACTIVE

    elif ev.kind == "HandMove":
        hand = ev.hand
        p = ev.point
        state.hands[hand] = p
        if state.twohand is not None and state.pinches["left"] and state.pinches["right"]:
            _twohand_move(state, t, cfg, out)
        else:
            if state.hold is not None:
                state.hold.point = p
                if state.hold.pin_target and not state.hold.committed:
                    box = _bound_box(state, state.hold.pin_target)
                    if not (box and _point_in_box(state, p, box.center, box.half_extent)):
                        state.hold.pin_target = None  # slid off before the hold committed
                _pointer_update(state, p, t, cfg, out)
            elif state.pinches.get(hand):
                if state.pinches[hand].role != "drag":
                    _pointer_update(state, p, t, cfg, out)

    elif ev.kind == "Tap":
        p = ev.point
        if state.mode == CONTAINER_PLACING and state.held_container:
            target = _hit_bound_proxy(state, p)
            if target and _is_node_id(state, target):
                _add_to_container(state, state.held_container, target, t, out)
        else:
            target = _hit_bound_proxy(state, p)
            if target is None:
                target = _hit_container(state, p, collapsed_only=True)
            if target is None:
                state.last_tap = None
            elif (
                state.last_tap
                and state.last_tap[1] == target
                and t - state.last_tap[0] <= cfg.double_tap_window_ms
                and _is_node_id(state, target)
            ):
                state.last_tap = None
                _semantic_group(state, target, None, t, cfg, out)
            else:
                state.last_tap = (t, target)
                _set_selection(state, [target], t, out)

    elif ev.kind == "HoldStart":
        p = ev.point
        container = _hit_container(state, p)
        if container:
            state.held_container = container
            state.mode = CONTAINER_PLACING
            if state.pinned is not None:
                _unpin(state, t, out)
            state.hold = HoldState(p, t, None)
        else:
            target = _hit_bound_proxy(state, p)
            pin_target = target if target and _is_node_id(state, target) else None
            state.hold = HoldState(p, t, pin_target)
            _pointer_update(state, p, t, cfg, out)

    elif ev.kind == "HoldEnd":
        state.hold = None
        if state.mode == CONTAINER_PLACING:
            state.held_container = None
            state.mode = PROXIES_ACTIVE
        elif state.mode == SKIMMING:
            _hide_panel(state, t, out)
            state.mode = PROXIES_ACTIVE
        elif state.mode != FILTER_PINNED:
            _hide_panel(state, t, out)

    elif ev.kind == "DoubleTap":
        target = _hit_bound_proxy(state, ev.point)
        if target and _is_node_id(state, target):
            _semantic_group(state, target, None, t, cfg, out)

    elif ev.kind == "SurfacePathPoint":
        state.surface_path.append((ev.point[0], ev.point[1]))

    elif ev.kind == "SurfacePathEnd":
        path = state.surface_path
        state.surface_path = []
        _lasso_select(state, path, t, out)

    elif ev.kind == "Tick":
        if state.follow_hand and state.layout is not None:
            hand_pos = state.hands.get(state.follow_hand)
            if hand_pos is not None:
                moved = lazy_follow_tick(state.anchor, hand_pos, ev.dt, cfg)
                if moved != state.anchor:
                    state.anchor = moved
                    state.layout = replace(state.layout, anchor=moved)
                    _emit_layout(state, t, out)

    return state, out


# -- state (de)serialization ----------------------------------------------------


def state_to_dict(state: InteractionState) -> dict:
    """JSON-encodable engine state (scene excluded; the session stores it)."""
    return {
        "mode": state.mode,
        "active_level": state.active_level,
        "visible_ids": list(state.visible_ids),
        "positions": {k: list(v) for k, v in state.positions.items()},
        "unplaced": list(state.unplaced),
        "layout": None
        if state.layout is None
        else {
            "anchor": list(state.layout.anchor),
            "scale_used": state.layout.scale_used,
            "boxes": [
                {"id": b.id, "center": list(b.center), "half_extent": b.half_extent}
                for b in state.layout.boxes
            ],
            "separation_axis": {f"{a}|{b}": axis for (a, b), axis in state.layout.separation_axis.items()},
        },
        "selection": list(state.selection),
        "groups": [
            {
                "id": c.id,
                "members": list(c.members),
                "collapsed": c.collapsed,
                "center": list(c.center),
                "half_extent": c.half_extent,
                "expanded_half_extent": c.expanded_half_extent,
            }
            for c in state.groups
        ],
        "anchor": list(state.anchor),
        "pinned": None
        if state.pinned is None
        else {
            "node_id": state.pinned.node_id,
            "boxes": [
                {
                    "id": b.id,
                    "key": b.key,
                    "value": b.value,
                    "center": list(b.center),
                    "half_extent": b.half_extent,
                }
                for b in state.pinned.boxes
            ],
        },
        "grouping_key": state.grouping_key,
        "gaze_px": list(state.gaze_px) if state.gaze_px else None,
        "hands": {h: (list(p) if p else None) for h, p in state.hands.items()},
        "pinches": {
            h: (None if p is None else {"role": p.role, "origin": list(p.origin) if p.origin else None})
            for h, p in state.pinches.items()
        },
        "hold": None
        if state.hold is None
        else {
            "point": list(state.hold.point),
            "t0": state.hold.t0,
            "pin_target": state.hold.pin_target,
            "committed": state.hold.committed,
        },
        "twohand": None
        if state.twohand is None
        else {
            "kind": state.twohand.kind,
            "d0": state.twohand.d0,
            "focus_id": state.twohand.focus_id,
            "consumed": state.twohand.consumed,
            "committed": state.twohand.committed,
        },
        "panel_target": state.panel_target,
        "last_attr_hit": state.last_attr_hit,
        "last_tap": list(state.last_tap) if state.last_tap else None,
        "surface_path": [list(p) for p in state.surface_path],
        "visible_stack": [
            {
                "level": f["level"],
                "visible_ids": list(f["visible_ids"]),
                "positions": {k: list(v) for k, v in f["positions"].items()},
                "unplaced": list(f["unplaced"]),
            }
            for f in state.visible_stack
        ],
        "follow_hand": state.follow_hand,
        "held_container": state.held_container,
        "container_seq": state.container_seq,
    }


def state_from_dict(snapshot: SceneSnapshot, obj: dict) -> InteractionState:
    from .scene import SchemaError

    try:
        layout = None
        if obj.get("layout") is not None:
            lob = obj["layout"]
            layout = ProxyLayout(
                tuple(ProxyBox(b["id"], tuple(b["center"]), b["half_extent"]) for b in lob["boxes"]),
                tuple(lob["anchor"]),
                lob["scale_used"],
                {tuple(k.split("|", 1)): v for k, v in lob.get("separation_axis", {}).items()},
            )
        pinned = None
        if obj.get("pinned") is not None:
            pob = obj["pinned"]
            pinned = PinnedAttributes(
                pob["node_id"],
                tuple(
                    AttrProxy(b["id"], b["key"], b["value"], tuple(b["center"]), b["half_extent"])
                    for b in pob["boxes"]
                ),
            )
        hold = None
        if obj.get("hold") is not None:
            hob = obj["hold"]
            hold = HoldState(tuple(hob["point"]), hob["t0"], hob["pin_target"], hob["committed"])
        twohand = None
        if obj.get("twohand") is not None:
            tob = obj["twohand"]
            twohand = TwoHandSession(tob["kind"], tob["d0"], tob["focus_id"], tob["consumed"], tob["committed"])
        state = InteractionState(
            snapshot=snapshot,
            mode=obj["mode"],
            active_level=obj["active_level"],
            visible_ids=list(obj["visible_ids"]),
            positions={k: tuple(v) for k, v in obj["positions"].items()},
            unplaced=list(obj["unplaced"]),
            layout=layout,
            selection=list(obj["selection"]),
            groups=[
                GroupContainer(
                    c["id"],
                    list(c["members"]),
                    c["collapsed"],
                    tuple(c["center"]),
                    c["half_extent"],
                    c["expanded_half_extent"],
                )
                for c in obj["groups"]
            ],
            anchor=tuple(obj["anchor"]),
            pinned=pinned,
            grouping_key=obj.get("grouping_key"),
            gaze_px=tuple(obj["gaze_px"]) if obj.get("gaze_px") else None,
            hands={h: (tuple(p) if p else None) for h, p in obj["hands"].items()},
            pinches={
                h: (None if p is None else PinchState(p["role"], tuple(p["origin"]) if p["origin"] else None))
                for h, p in obj["pinches"].items()
            },
            hold=hold,
            twohand=twohand,
            panel_target=obj.get("panel_target"),
            last_attr_hit=obj.get("last_attr_hit"),
            last_tap=tuple(obj["last_tap"]) if obj.get("last_tap") else None,
            surface_path=[tuple(p) for p in obj.get("surface_path", [])],
            visible_stack=[
                {
                    "level": f["level"],
                    "visible_ids": list(f["visible_ids"]),
                    "positions": {k: tuple(v) for k, v in f["positions"].items()},
                    "unplaced": list(f["unplaced"]),
                }
                for f in obj.get("visible_stack", [])
            ],
            follow_hand=obj.get("follow_hand"),
            held_container=obj.get("held_container"),
            container_seq=obj.get("container_seq", 0),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"corrupted engine state: {exc}") from exc
    return state
