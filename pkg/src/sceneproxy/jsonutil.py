"""Canonical JSON helpers shared by fixtures, logs, and wire payloads."""

from __future__ import annotations

import json
from typing import Any


def canonical_json(obj: Any) -> str:
    """Serialize with sorted keys and no whitespace; NaN/Inf are rejected."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def canonical_bytes(obj: Any) -> bytes:
    return canonical_json(obj).encode("utf-8")


def json_line(obj: Any) -> str:
    return canonical_json(obj) + "\n"
