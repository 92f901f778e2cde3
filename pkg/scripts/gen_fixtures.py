#!/usr/bin/env python3
"""Regenerate the scene/detection/annotation fixtures under fixtures/.

Maintainer tool: fixture JSON is checked in; rerun after editing the
tables below.
"""

from __future__ import annotations

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1] / "fixtures"

FULL_CONFIG = {
    "gaze_extension_m": 0.20,
    "iou_dedup_threshold": 0.75,
    "min_bbox_px": 24,
    "min_gap_m": 0.005,
    "proxy_size_m": 0.03,
    "workspace_extent_m": 0.30,
    "tie_tolerance_m": 0.02,
    "follow_threshold_m": 0.15,
    "follow_time_constant_s": 0.15,
    "hold_duration_ms": 500,
    "double_tap_window_ms": 300,
    "zoom_in_ratio": 1.4,
    "zoom_out_ratio": 0.7,
}

CAMERA = {"fx": 1000, "fy": 1000, "cx": 500, "cy": 500}
HEAD = {"position": [0.0, 0.0, 0.0], "quaternion": [1.0, 0.0, 0.0, 0.0]}


def wall_mesh(z: float, half_w: float = 2.0, half_h: float = 1.5) -> dict:
    return {
        "vertices": [
            [-half_w, -half_h, z],
            [half_w, -half_h, z],
            [half_w, half_h, z],
            [-half_w, half_h, z],
        ],
        "triangles": [[0, 1, 2], [0, 2, 3]],
    }


def node(nid, label, bbox, level, attributes=None, children=None, world_pos=None):
    out = {
        "id": nid,
        "label": label,
        "bbox": list(bbox),
        "level": level,
        "attributes": attributes or {},
        "children": children or [],
    }
    if world_pos is not None:
        out["world_pos"] = list(world_pos)
    return out


# -- office --------------------------------------------------------------------

BOOKS = [
    # (color, price, topic)
    ("red", 49, "XR"),
    ("blue", 59, "XR"),
    ("red", 39, "AI"),
    ("green", 45, "HCI"),
    ("blue", 79, "XR"),
    ("red", 29, "AI"),
    ("blue", 65, "ML"),
    ("green", 55, "HCI"),
]

NOTES = [
    "two XR books, first row left",
    "return headset to rack",
    "lab meeting 3pm",
]


def office_scene() -> dict:
    books = [
        node(
            f"1.{i + 1}",
            "book",
            [8 + 44 * i, 120, 40, 160],
            2,
            {"color": color, "price": price, "topic": topic},
        )
        for i, (color, price, topic) in enumerate(BOOKS)
    ]
    notes = [
        node(f"2.{i + 1}", "sticky note", [20 + 90 * i, 30, 60, 60], 2, {"text": text})
        for i, text in enumerate(NOTES)
    ]
    rack_items = [
        node("3.1", "headset", [10, 40, 100, 120], 2, {"price": 299}),
        node("3.2", "controller", [15, 200, 90, 100], 2, {"price": 129}),
    ]
    return {
        "image_size": [1000, 1000],
        "camera": CAMERA,
        "head": HEAD,
        "mesh": wall_mesh(2.0),
        "config": FULL_CONFIG,
        "nodes": [
            node("1", "bookshelf", [80, 300, 360, 400], 1, {"material": "wood"}, books),
            node("2", "whiteboard", [520, 260, 300, 220], 1, {"surface": "glass"}, notes),
            node("3", "rack", [860, 320, 120, 360], 1, {"material": "steel"}, rack_items),
        ],
    }


def office_detections() -> dict:
    return {
        "root": [
            {"bbox": [80, 300, 360, 400], "label": "bookshelf", "score": 0.95},
            {"bbox": [520, 260, 300, 220], "label": "whiteboard", "score": 0.9},
            {"bbox": [860, 320, 120, 360], "label": "rack", "score": 0.88},
        ],
        "1": [
            {"bbox": [8 + 44 * i, 120, 40, 160], "label": "book", "score": round(0.98 - 0.01 * i, 2)}
            for i in range(8)
        ],
        "2": [
            {"bbox": [20 + 90 * i, 30, 60, 60], "label": "sticky note", "score": round(0.97 - 0.01 * i, 2)}
            for i in range(3)
        ],
        "3": [
            {"bbox": [10, 40, 100, 120], "label": "headset", "score": 0.9},
            {"bbox": [15, 200, 90, 100], "label": "controller", "score": 0.85},
        ],
    }


def office_annotations() -> dict:
    out = {
        "1": {"material": "wood"},
        "2": {"surface": "glass"},
        "3": {"material": "steel"},
        "3.1": {"price": 299},
        "3.2": {"price": 129},
    }
    for i, (color, price, topic) in enumerate(BOOKS):
        out[f"1.{i + 1}"] = {"color": color, "price": price, "topic": topic}
    for i, text in enumerate(NOTES):
        out[f"2.{i + 1}"] = {"text": text}
    return out


# -- kitchen --------------------------------------------------------------------


def kitchen_scene() -> dict:
    buttons = [
        node("1.2.1", "button", [10, 20, 60, 30], 3, {"action": "start"}),
        node("1.2.2", "button", [10, 60, 60, 30], 3, {"action": "stop"}),
        node("1.2.3", "button", [10, 100, 60, 30], 3, {"action": "clock"}),
    ]
    return {
        "image_size": [1000, 1000],
        "camera": CAMERA,
        "head": HEAD,
        "mesh": wall_mesh(1.5),
        "config": FULL_CONFIG,
        "nodes": [
            node(
                "1",
                "microwave",
                [380, 360, 240, 220],
                1,
                {"brand": "Acme", "watts": 900},
                [
                    node("1.1", "door", [20, 30, 120, 170], 2, {"part": "door"}),
                    node("1.2", "control panel", [150, 30, 80, 170], 2, {"part": "panel"}, buttons),
                ],
            ),
            node("2", "kettle", [280, 480, 100, 140], 1, {"brand": "Boil"}),
            node("3", "toaster", [600, 480, 110, 120], 1, {"brand": "Crisp"}),
        ],
    }


# -- building digital twin --------------------------------------------------------

FLOOR1_ROOMS = [
    ("Robotics", "Aerial Lab", -6.0),
    ("HCI", "UX Studio", -2.0),
    ("Robotics", "Drone Cage", 2.0),
    ("Vision", "Optics Lab", 6.0),
]
FLOOR2_ROOMS = [
    ("HCI", "Haptics Lab", -6.0),
    ("Vision", "Imaging Suite", -2.0),
    ("Robotics", "Arm Lab", 2.0),
    ("HCI", "Field Studio", 6.0),
]


def building_scene() -> dict:
    def rooms(prefix: str, table, y: float):
        return [
            node(
                f"{prefix}.{i + 1}",
                "room",
                [10 + 100 * i, 20, 80, 100],
                2,
                {"department": dept, "name": name},
                world_pos=[x, y, 30.0],
            )
            for i, (dept, name, x) in enumerate(table)
        ]

    return {
        "image_size": [1000, 1000],
        "camera": CAMERA,
        "head": HEAD,
        "mesh": {"vertices": [], "triangles": []},
        "config": FULL_CONFIG,
        "nodes": [
            node(
                "1",
                "floor 1",
                [300, 500, 400, 140],
                1,
                {"level_name": "F1"},
                rooms("1", FLOOR1_ROOMS, 1.5),
                world_pos=[0.0, 1.5, 30.0],
            ),
            node(
                "2",
                "floor 2",
                [300, 340, 400, 140],
                1,
                {"level_name": "F2"},
                rooms("2", FLOOR2_ROOMS, 4.5),
                world_pos=[0.0, 4.5, 30.0],
            ),
        ],
    }


# -- drone fleet digital twin ------------------------------------------------------

DRONES = [
    # (bbox, world_pos, battery, model)
    ([400, 455, 40, 30], [-1.5, 0.0, 4.0], "full", "A"),
    ([440, 515, 40, 30], [-1.0, 0.3, 4.5], "full", "B"),
    ([480, 465, 40, 30], [-0.6, -0.2, 5.0], "low", "A"),
    ([520, 505, 40, 30], [0.6, 0.0, 4.2], "full", "B"),
    ([560, 455, 40, 30], [1.1, 0.2, 4.8], "low", "A"),
    ([590, 525, 40, 30], [1.6, -0.1, 4.4], "full", "B"),
]


def drone_scene() -> dict:
    return {
        "image_size": [1000, 1000],
        "camera": CAMERA,
        "head": HEAD,
        "mesh": {"vertices": [], "triangles": []},
        "config": FULL_CONFIG,
        "nodes": [
            node(str(i + 1), "drone", bbox, 1, {"battery": battery, "model": model}, world_pos=wp)
            for i, (bbox, wp, battery, model) in enumerate(DRONES)
        ],
    }


def main() -> None:
    files = {
        "office/scene.json": office_scene(),
        "office/detections.json": office_detections(),
        "office/annotations.json": office_annotations(),
        "kitchen/scene.json": kitchen_scene(),
        "building/scene.json": building_scene(),
        "drone/scene.json": drone_scene(),
    }
    for rel, doc in files.items():
        path = ROOT / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
