"""Thin command-line client.

Verbs run against the in-process core by default; ``--server URL``
routes ``validate``, ``replay``, and ``export-layout`` through a
running service instead.  ``serve`` starts the FastAPI service.
"""

from __future__ import annotations

import argparse
import sys

from .jsonutil import canonical_json
from .scene import SchemaError
from .session import TraceError, TraceRecord, export_layout, load_scene, replay_trace


def _config_overrides(pairs: list[str]) -> dict[str, float]:
    out: dict[str, float] = {}
    for pair in pairs:
        if "=" not in pair:
            raise SystemExit(f"--config expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        try:
            out[key] = float(value)
        except ValueError:
            raise SystemExit(f"--config {key}: {value!r} is not a number") from None
    return out


def _post(server: str, path: str, body: dict) -> dict:
    import httpx

    response = httpx.post(server.rstrip("/") + path, json=body, timeout=60.0)
    response.raise_for_status()
    return response.json()


def cmd_validate(args: argparse.Namespace) -> int:
    if args.server:
        result = _post(
            args.server,
            "/scene/validate",
            {"scene": args.scene, "detections": args.detections, "annotations": args.annotations},
        )
        if not result["ok"]:
            print(f"invalid: {result['error']}", file=sys.stderr)
            return 2
        print("0 violations")
        if result["spatializer_bypassed"]:
            print("spatializer bypassed (authored world positions everywhere)")
        return 0
    try:
        loaded = load_scene(args.scene, args.detections, args.annotations, _config_overrides(args.config))
    except (SchemaError, OSError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 2
    for warning in loaded.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print("0 violations")
    if loaded.spatializer_bypassed:
        print("spatializer bypassed (authored world positions everywhere)")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    if args.server:
        result = _post(
            args.server,
            "/trace/replay",
            {
                "scene": args.scene,
                "trace": args.trace,
                "detections": args.detections,
                "annotations": args.annotations,
                "expected": args.expected,
            },
        )
        log, passed, mismatch = result["log"], result["passed"], result.get("mismatch")
    else:
        record = TraceRecord(args.scene, args.trace, args.detections, args.annotations, args.expected)
        try:
            result = replay_trace(record, args.out)
        except (SchemaError, TraceError, OSError) as exc:
            print(f"replay failed: {exc}", file=sys.stderr)
            return 2
        log, passed, mismatch = result.log, result.passed, result.mismatch
    if args.out and args.server:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(log)
    if passed is None:
        sys.stdout.write(log)
        return 0
    if passed:
        print("pass")
        return 0
    print(f"fail: {mismatch}", file=sys.stderr)
    return 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning" if args.quiet else "info")
    return 0


def cmd_export_layout(args: argparse.Namespace) -> int:
    gaze = tuple(float(v) for v in args.gaze.split(",")) if args.gaze else None
    anchor = tuple(float(v) for v in args.hand.split(",")) if args.hand else (0.0, 0.0, 0.0)
    if args.server:
        result = _post(
            args.server,
            "/layout/export",
            {"scene": args.scene, "gaze": gaze, "anchor": anchor, "config": _config_overrides(args.config)},
        )
        document = result["layout"]
    else:
        try:
            loaded = load_scene(args.scene, config_overrides=_config_overrides(args.config))
        except (SchemaError, OSError) as exc:
            print(f"export failed: {exc}", file=sys.stderr)
            return 2
        document = export_layout(loaded.snapshot, gaze, anchor)
    text = canonical_json(document) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sceneproxy", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, trace: bool = False):
        p.add_argument("--scene", required=True, help="scene fixture path")
        p.add_argument("--detections", help="detection fixture path")
        p.add_argument("--annotations", help="annotation fixture path")
        p.add_argument("--config", action="append", default=[], metavar="k=v", help="config override")
        p.add_argument("--server", help="route through a running service at this URL")
        if trace:
            p.add_argument("--trace", required=True, help="gesture trace (JSONL)")
            p.add_argument("--expected", help="expected feedback log for comparison")
            p.add_argument("--out", help="write the feedback log here")

    p_validate = sub.add_parser("validate", help="parse and validate a scene fixture")
    common(p_validate)
    p_validate.set_defaults(func=cmd_validate)

    p_replay = sub.add_parser("replay", help="replay a gesture trace deterministically")
    common(p_replay, trace=True)
    p_replay.set_defaults(func=cmd_replay)

    p_serve = sub.add_parser("serve", help="start the session service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--frontend", help="serve this directory as the web client")
    p_serve.add_argument("--quiet", action="store_true")
    p_serve.set_defaults(func=cmd_serve)

    p_export = sub.add_parser("export-layout", help="write a proxy layout document")
    common(p_export)
    p_export.add_argument("--gaze", metavar="u,v", help="activate around this gaze pixel")
    p_export.add_argument("--hand", metavar="x,y,z", help="anchor the layout here")
    p_export.add_argument("--out", help="output path (stdout by default)")
    p_export.set_defaults(func=cmd_export_layout)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
