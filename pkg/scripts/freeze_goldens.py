#!/usr/bin/env python3
"""Freeze golden feedback logs from the shipped traces.

Run only after the semantic checks in tests/test_acceptance.py pass:
the goldens pin byte-exact replay output, the tests pin its meaning.
"""

from __future__ import annotations

from pathlib import Path

from sceneproxy.session import TraceRecord, replay_trace

ROOT = Path(__file__).resolve().parents[1] / "fixtures"

GOLDENS = {
    "office-01": "office",
    "kitchen-01": "kitchen",
    "building-01": "building",
    "drone-01": "drone",
}


def main() -> None:
    for name, scene in GOLDENS.items():
        record = TraceRecord(
            str(ROOT / scene / "scene.json"), str(ROOT / "traces" / f"{name}.trace.jsonl")
        )
        out = ROOT / "traces" / f"{name}.golden.jsonl"
        result = replay_trace(record, out)
        print(f"froze {out} ({len(result.log.splitlines())} lines)")


if __name__ == "__main__":
    main()
