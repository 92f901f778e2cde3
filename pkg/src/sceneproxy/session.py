"""Scene loading, deterministic trace replay, and session persistence.

Gesture traces are line-delimited JSON, one event per line; feedback
logs are line-delimited JSON, one feedback event per line.  Both use
canonical encoding (sorted keys, no whitespace), so golden comparisons
are byte-exact.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .engine import (
    FeedbackEvent,
    GestureEvent,
    InteractionState,
    new_state,
    process_event,
    state_from_dict,
    state_to_dict,
)
from .jsonutil import canonical_bytes, json_line
from .perception import (
    FixtureAnnotatorSource,
    FixtureDetectionSource,
    build_hierarchy,
    enrich_attributes,
)
from .scene import (
    Config,
    SceneSnapshot,
    SchemaError,
    all_world_pos,
    parse_snapshot_verbose,
    validate_snapshot,
)

FIXTURE_DIR_ENV = "PROXY_FIXTURE_DIR"


class TraceError(ValueError):
    pass


def resolve_fixture_path(path: str | Path) -> Path:
    """Absolute paths pass through; relative ones resolve under $PROXY_FIXTURE_DIR."""
    p = Path(path)
    if p.is_absolute():
        return p
    root = os.environ.get(FIXTURE_DIR_ENV)
    if root:
        candidate = Path(root) / p
        if candidate.exists():
            return candidate
    return p


@dataclass(frozen=True)
class TraceRecord:
    scene: str
    trace: str
    detections: str | None = None
    annotations: str | None = None
    expected: str | None = None


@dataclass(frozen=True)
class LoadResult:
    snapshot: SceneSnapshot
    warnings: tuple[str, ...]
    spatializer_bypassed: bool
    enrich_failed: tuple[str, ...] = ()


def load_scene(
    scene: str | Path,
    detections: str | Path | None = None,
    annotations: str | Path | None = None,
    config_overrides: dict[str, float] | None = None,
    detection_source=None,
    annotator_source=None,
) -> LoadResult:
    """Parse a scene fixture; optionally rebuild its node tree from detections.

    When a detection source is given (a fixture path or any
    ``DetectionSource``, e.g. an external HTTP one), the hierarchy is
    re-detected over the full image and optionally enriched with
    annotated attributes, replacing the authored nodes.
    """
    scene_path = resolve_fixture_path(scene)
    try:
        raw = scene_path.read_bytes()
    except OSError as exc:
        raise SchemaError(f"cannot read scene fixture: {exc}", str(scene_path)) from exc
    snapshot, warnings = parse_snapshot_verbose(raw)
    if config_overrides:
        snapshot = SceneSnapshot(
            snapshot.nodes,
            snapshot.mesh,
            snapshot.camera,
            snapshot.head,
            snapshot.image_size,
            snapshot.config.with_overrides(config_overrides),
        )

    if detection_source is None and detections is not None:
        detection_source = FixtureDetectionSource.from_file(resolve_fixture_path(detections))
    if annotator_source is None and annotations is not None:
        annotator_source = FixtureAnnotatorSource.from_file(resolve_fixture_path(annotations))

    enrich_failed: tuple[str, ...] = ()
    if detection_source is not None:
        from .geometry import BBox2D

        w, h = snapshot.image_size
        nodes = build_hierarchy(detection_source, BBox2D(0, 0, w, h), snapshot.config)
        if annotator_source is not None:
            nodes, report = enrich_attributes(nodes, annotator_source)
            enrich_failed = report.failed_ids
        snapshot = SceneSnapshot(
            tuple(nodes), snapshot.mesh, snapshot.camera, snapshot.head, snapshot.image_size, snapshot.config
        )
        violations = validate_snapshot(snapshot)
        if violations:
            first = violations[0]
            raise SchemaError(f"built hierarchy violates {first.rule}: {first.detail}", first.node_id or "$")

    return LoadResult(snapshot, tuple(warnings), all_world_pos(snapshot), enrich_failed)


# -- trace IO -------------------------------------------------------------------


def parse_trace(text: str, path: str = "<trace>") -> list[GestureEvent]:
    events: list[GestureEvent] = []
    last_t: float | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        import json

        try:
            obj = json.loads(line)
            ev = GestureEvent.from_dict(obj)
        except (ValueError, TypeError) as exc:
            raise TraceError(f"{path}:{lineno}: {exc}") from exc
        if last_t is not None and ev.t < last_t:
            raise TraceError(f"{path}:{lineno}: timestamp {ev.t} decreases (previous {last_t})")
        last_t = ev.t
        events.append(ev)
    return events


def read_trace(path: str | Path) -> list[GestureEvent]:
    p = resolve_fixture_path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise TraceError(f"cannot read trace {p}: {exc}") from exc
    return parse_trace(text, str(p))


def feedback_lines(events: list[FeedbackEvent]) -> str:
    return "".join(json_line(ev.to_dict()) for ev in events)


def iter_replay(snapshot: SceneSnapshot, events: list[GestureEvent], cfg: Config | None = None):
    """Yield ``(state, event, feedback)`` per event; handy for invariant checks."""
    cfg = cfg or snapshot.config
    state = new_state(snapshot)
    for ev in events:
        state, feedback = process_event(state, ev, cfg)
        yield state, ev, feedback


@dataclass(frozen=True)
class ReplayResult:
    log: str
    passed: bool | None  # None when no expected log was given
    mismatch: str | None = None


def replay_trace(record: TraceRecord, out_path: str | Path | None = None) -> ReplayResult:
    loaded = load_scene(record.scene, record.detections, record.annotations)
    events = read_trace(record.trace)
    chunks: list[str] = []
    for _, _, feedback in iter_replay(loaded.snapshot, events):
        chunks.append(feedback_lines(feedback))
    log = "".join(chunks)
    if out_path is not None:
        Path(out_path).write_text(log, encoding="utf-8")
    passed: bool | None = None
    mismatch: str | None = None
    if record.expected is not None:
        expected = resolve_fixture_path(record.expected).read_text(encoding="utf-8")
        passed = expected == log
        if not passed:
            mismatch = _first_mismatch(expected, log)
    return ReplayResult(log, passed, mismatch)


def _first_mismatch(expected: str, got: str) -> str:
    exp_lines = expected.splitlines()
    got_lines = got.splitlines()
    for i, (a, b) in enumerate(zip(exp_lines, got_lines), start=1):
        if a != b:
            return f"line {i}: expected {a!r}, got {b!r}"
    if len(exp_lines) != len(got_lines):
        return f"length differs: expected {len(exp_lines)} lines, got {len(got_lines)}"
    return "identical"


def export_layout(
    snapshot: SceneSnapshot,
    gaze_px: tuple[float, float] | None = None,
    anchor: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> dict:
    """Layout export document for a scene: activation at ``gaze_px`` or all level-1 nodes."""
    from .engine import InteractionState, _activation_nodes
    from .layout import empty_layout, layout_export_dict, solve_layout
    from .spatial import estimate_positions

    if gaze_px is not None:
        nodes = _activation_nodes(InteractionState(snapshot=snapshot), gaze_px, snapshot.config)
    else:
        nodes = list(snapshot.nodes)
    estimate = estimate_positions(snapshot, nodes)
    layout = (
        solve_layout(estimate.positions, snapshot.config, anchor=anchor)
        if estimate.positions
        else empty_layout(anchor)
    )
    out = layout_export_dict(layout)
    out["unplaced"] = list(estimate.unplaced)
    return out


# -- live sessions ---------------------------------------------------------------


@dataclass
class EngineSession:
    """One interaction session: a snapshot, its config, and engine state."""

    snapshot: SceneSnapshot
    config: Config
    state: InteractionState = field(init=False)

    def __post_init__(self):
        self.state = new_state(self.snapshot)

    def handle(self, ev: GestureEvent) -> list[FeedbackEvent]:
        self.state, feedback = process_event(self.state, ev, self.config)
        return feedback

    def configure(self, overrides: dict[str, float]) -> Config:
        self.config = self.config.with_overrides(overrides)
        return self.config


def snapshot_export(session: EngineSession) -> bytes:
    """Serialize the whole session (scene included) to a restorable document."""
    from dataclasses import fields as dc_fields

    from .scene import snapshot_to_dict

    return canonical_bytes(
        {
            "scene": snapshot_to_dict(session.snapshot),
            "config": {f.name: getattr(session.config, f.name) for f in dc_fields(Config)},
            "engine": state_to_dict(session.state),
        }
    )


def snapshot_restore(data: bytes | str) -> EngineSession:
    import json

    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"corrupted session export: {exc}") from exc
    if not isinstance(obj, dict) or "scene" not in obj or "engine" not in obj:
        raise SchemaError("corrupted session export: missing scene/engine sections")
    from .scene import parse_snapshot

    snapshot = parse_snapshot(canonical_bytes(obj["scene"]))
    session = EngineSession(snapshot, Config(**obj.get("config", {})))
    session.state = state_from_dict(snapshot, obj["engine"])
    return session
