"""FastAPI service: REST wrappers over the core package plus the live
WebSocket session protocol.

Wire protocol (per connection, JSON text frames):

* Every message is an envelope ``{"seq": n, "kind": k, "payload": {...}}``;
  ``seq`` starts at 1 and increases strictly per direction.
* Client kinds: ``LoadScene`` ``{scene, detections?, annotations?, config?}``,
  ``Gesture`` ``{event}``, ``Configure`` ``{config}``.
* Server kinds: ``Snapshot``, ``Layout``, ``Feedback`` (one engine feedback
  event each), ``Configure`` (acknowledgement), ``Error``.
* Malformed input yields an ``Error`` envelope and the connection stays up.

Sessions are per-connection and fully isolated.
"""

from __future__ import annotations

import json
import logging
from dataclasses import fields as dc_fields
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from pydantic import BaseModel

from .engine import GestureEvent
from .jsonutil import canonical_json
from .perception import SourceError
from .scene import Config, SchemaError, snapshot_to_dict, walk
from .session import (
    EngineSession,
    LoadResult,
    TraceError,
    TraceRecord,
    export_layout,
    load_scene,
    replay_trace,
)
from .spatial import estimate_positions

log = logging.getLogger(__name__)

CLIENT_KINDS = {"LoadScene", "Gesture", "Configure"}


class ValidateRequest(BaseModel):
    scene: str
    detections: str | None = None
    annotations: str | None = None


class ValidateResponse(BaseModel):
    ok: bool
    violations: int
    error: str | None = None
    warnings: list[str] = []
    spatializer_bypassed: bool = False


class ReplayRequest(BaseModel):
    scene: str
    trace: str
    detections: str | None = None
    annotations: str | None = None
    expected: str | None = None


class ReplayResponse(BaseModel):
    log: str
    passed: bool | None = None
    mismatch: str | None = None


class ExportLayoutRequest(BaseModel):
    scene: str
    gaze: tuple[float, float] | None = None
    anchor: tuple[float, float, float] = (0.0, 0.0, 0.0)
    config: dict[str, float] | None = None


class ExportLayoutResponse(BaseModel):
    layout: dict


def _snapshot_payload(loaded: LoadResult) -> dict:
    """Scene document plus server-side 3D estimates for every node."""
    snapshot = loaded.snapshot
    estimate = estimate_positions(snapshot, [n for n, _ in walk(snapshot)])
    return {
        "scene": snapshot_to_dict(snapshot),
        "positions": {k: list(v) for k, v in estimate.positions.items()},
        "unplaced": list(estimate.unplaced),
        "spatializer_bypassed": loaded.spatializer_bypassed,
        "warnings": list(loaded.warnings),
    }


class _Connection:
    def __init__(self):
        self.session: EngineSession | None = None
        self.last_client_seq = 0
        self.server_seq = 0

    def envelope(self, kind: str, payload: dict) -> dict:
        self.server_seq += 1
        return {"seq": self.server_seq, "kind": kind, "payload": payload}


def create_app(frontend_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="sceneproxy", version="0.1.0")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/scene/validate", response_model=ValidateResponse)
    def validate(req: ValidateRequest) -> ValidateResponse:
        try:
            loaded = load_scene(req.scene, req.detections, req.annotations)
        except Exception as exc:  # noqa: BLE001 - report, never crash
            return ValidateResponse(ok=False, violations=-1, error=str(exc))
        return ValidateResponse(
            ok=True,
            violations=0,
            warnings=list(loaded.warnings),
            spatializer_bypassed=loaded.spatializer_bypassed,
        )

    @app.post("/trace/replay", response_model=ReplayResponse)
    def replay(req: ReplayRequest) -> ReplayResponse:
        record = TraceRecord(req.scene, req.trace, req.detections, req.annotations, req.expected)
        result = replay_trace(record)
        return ReplayResponse(log=result.log, passed=result.passed, mismatch=result.mismatch)

    @app.post("/layout/export", response_model=ExportLayoutResponse)
    def layout(req: ExportLayoutRequest) -> ExportLayoutResponse:
        loaded = load_scene(req.scene, config_overrides=req.config)
        return ExportLayoutResponse(layout=export_layout(loaded.snapshot, req.gaze, tuple(req.anchor)))

    @app.websocket("/session")
    async def session_socket(ws: WebSocket) -> None:
        await ws.accept()
        conn = _Connection()
        try:
            while True:
                raw = await ws.receive_text()
                for reply in handle_message(conn, raw):
                    await ws.send_text(canonical_json(reply))
        except WebSocketDisconnect:
            return

    if frontend_dir and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app


def handle_message(conn: _Connection, raw: str) -> list[dict]:
    """Process one client frame; always returns envelopes, never raises."""
    try:
        return _handle(conn, raw)
    except Exception as exc:  # noqa: BLE001 - total: any failure becomes an Error envelope
        log.exception("unhandled session error")
        return [conn.envelope("Error", {"reason": f"internal: {exc}"})]


def _handle(conn: _Connection, raw: str) -> list[dict]:
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as exc:
        return [conn.envelope("Error", {"reason": f"invalid JSON: {exc}"})]
    if not isinstance(msg, dict):
        return [conn.envelope("Error", {"reason": "envelope must be an object"})]

    seq = msg.get("seq")
    if not isinstance(seq, int) or seq <= conn.last_client_seq:
        return [
            conn.envelope(
                "Error",
                {"reason": f"seq must be an integer > {conn.last_client_seq}", "ref_seq": seq},
            )
        ]
    conn.last_client_seq = seq

    kind = msg.get("kind")
    payload = msg.get("payload")
    if kind not in CLIENT_KINDS:
        return [conn.envelope("Error", {"reason": f"unknown kind {kind!r}", "ref_seq": seq})]
    if not isinstance(payload, dict):
        return [conn.envelope("Error", {"reason": "payload must be an object", "ref_seq": seq})]

    if kind == "LoadScene":
        if payload.get("restore"):
            from .session import resolve_fixture_path, snapshot_restore

            try:
                conn.session = snapshot_restore(resolve_fixture_path(payload["restore"]).read_bytes())
            except (SchemaError, OSError) as exc:
                return [conn.envelope("Error", {"reason": str(exc), "ref_seq": seq})]
            from .scene import all_world_pos

            loaded = LoadResult(conn.session.snapshot, (), all_world_pos(conn.session.snapshot))
            return [conn.envelope("Snapshot", _snapshot_payload(loaded))]
        detection_source = annotator_source = None
        if payload.get("source_mode") == "external":
            from .perception import HttpAnnotatorSource, HttpDetectionSource

            if payload.get("detect_url"):
                detection_source = HttpDetectionSource(payload["detect_url"])
            if payload.get("annotate_url"):
                annotator_source = HttpAnnotatorSource(payload["annotate_url"])
        try:
            loaded = load_scene(
                payload.get("scene", ""),
                payload.get("detections"),
                payload.get("annotations"),
                payload.get("config"),
                detection_source=detection_source,
                annotator_source=annotator_source,
            )
        except (SchemaError, TraceError, OSError, SourceError) as exc:
            return [conn.envelope("Error", {"reason": str(exc), "ref_seq": seq})]
        conn.session = EngineSession(loaded.snapshot, loaded.snapshot.config)
        return [conn.envelope("Snapshot", _snapshot_payload(loaded))]

    if conn.session is None:
        return [conn.envelope("Error", {"reason": "no scene loaded", "ref_seq": seq})]

    if kind == "Configure":
        try:
            applied = conn.session.configure(payload.get("config", {}))
        except SchemaError as exc:
            return [conn.envelope("Error", {"reason": str(exc), "ref_seq": seq})]
        ack = {"applied": {f.name: getattr(applied, f.name) for f in dc_fields(Config)}}
        if payload.get("persist"):
            from .session import resolve_fixture_path, snapshot_export

            target = resolve_fixture_path(payload["persist"])
            try:
                target.write_bytes(snapshot_export(conn.session))
            except OSError as exc:
                return [conn.envelope("Error", {"reason": f"persist failed: {exc}", "ref_seq": seq})]
            ack["persisted"] = str(target)
        return [conn.envelope("Configure", ack)]

    # Gesture
    try:
        event = GestureEvent.from_dict(payload.get("event", {}))
    except (ValueError, TypeError) as exc:
        return [conn.envelope("Error", {"reason": f"bad gesture event: {exc}", "ref_seq": seq})]
    feedback = conn.session.handle(event)
    replies = [conn.envelope("Feedback", {"event": fb.to_dict()}) for fb in feedback]
    layout_updates = [fb for fb in feedback if fb.kind == "LayoutUpdated"]
    if layout_updates:
        replies.append(conn.envelope("Layout", {"layout": layout_updates[-1].data["layout"]}))
    return replies


app = create_app()
