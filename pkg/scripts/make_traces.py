#!/usr/bin/env python3
"""Author the shipped gesture traces.

A driver advances a live engine while composing each trace so that
event coordinates land exactly on the proxy boxes they target.  Traces
are inputs; feedback goldens are frozen separately (freeze_goldens.py)
after the semantic checks in the test suite pass.
"""

from __future__ import annotations

from pathlib import Path

from sceneproxy.engine import GestureEvent, new_state, process_event
from sceneproxy.jsonutil import json_line
from sceneproxy.session import load_scene

ROOT = Path(__file__).resolve().parents[1] / "fixtures"
TRACES = ROOT / "traces"

# Float twin of the web client's proxy-panel transform (frontend/src/gestures.ts).
# Pointer steps authored here replay through the TS mapper to bit-identical
# world coordinates, which keeps the UI walkthrough byte-equal to the golden.
PANEL_CX = 320.0
PANEL_CY = 240.0
PANEL_SCALE = 512.0


class Driver:
    def __init__(self, scene: str):
        loaded = load_scene(ROOT / scene / "scene.json")
        self.cfg = loaded.snapshot.config
        self.state = new_state(loaded.snapshot)
        self.events: list[GestureEvent] = []
        self.steps: list[dict] = []  # pointer-script mirror of the trace
        self.t = 0  # integer milliseconds: survives a JS number round-trip

    def emit(self, kind: str, dt_ms: int = 40, **fields):
        self.t += dt_ms
        ev = GestureEvent.from_dict({"t": self.t, "kind": kind, **fields})
        self.events.append(ev)
        self.state, feedback = process_event(self.state, ev, self.cfg)
        return feedback

    # -- pointer-script emitters (gesture + step pairs through the panel twin)

    def _panel_world(self, x: float, y: float, elev: float) -> list[float]:
        a = self.state.anchor
        return [a[0] + (x - PANEL_CX) / PANEL_SCALE, a[1] + elev / PANEL_SCALE, a[2] + (y - PANEL_CY) / PANEL_SCALE]

    def _panel_coords(self, target: list[float]) -> tuple[float, float, float]:
        a = self.state.anchor
        return (
            (target[0] - a[0]) * PANEL_SCALE + PANEL_CX,
            (target[2] - a[2]) * PANEL_SCALE + PANEL_CY,
            (target[1] - a[1]) * PANEL_SCALE,
        )

    def _step(self, step: dict):
        self.steps.append({**step, "t": self.t})

    def gaze(self, u: float, v: float):
        self.emit("GazeMove", px=[u, v])
        self._step({"type": "gaze", "u": u, "v": v})

    def pointer_move(self, hand: str, target: list[float]):
        x, y, elev = self._panel_coords(target)
        self.emit("HandMove", hand=hand, point=self._panel_world(x, y, elev))
        self._step({"type": "move", "hand": hand, "x": x, "y": y, "elev": elev})

    def down(self, hand: str):
        self.emit("PinchStart", hand=hand)
        self._step({"type": "down", "hand": hand})

    def up(self, hand: str):
        self.emit("PinchEnd", hand=hand)
        self._step({"type": "up", "hand": hand})

    def press(self, target: list[float]):
        x, y, elev = self._panel_coords(target)
        self.emit("HoldStart", point=self._panel_world(x, y, elev))
        self._step({"type": "press", "x": x, "y": y, "elev": elev})

    def release(self):
        self.emit("HoldEnd")
        self._step({"type": "release"})

    def tap(self, target: list[float]):
        x, y, elev = self._panel_coords(target)
        self.emit("Tap", point=self._panel_world(x, y, elev))
        self._step({"type": "tap", "x": x, "y": y, "elev": elev})

    def dbl(self, target: list[float]):
        x, y, elev = self._panel_coords(target)
        self.emit("DoubleTap", point=self._panel_world(x, y, elev))
        self._step({"type": "dbl", "x": x, "y": y, "elev": elev})

    def path_point(self, sx: float, sy: float):
        x = sx * PANEL_SCALE + PANEL_CX
        y = sy * PANEL_SCALE + PANEL_CY
        self.emit("SurfacePathPoint", point=[(x - PANEL_CX) / PANEL_SCALE, (y - PANEL_CY) / PANEL_SCALE])
        self._step({"type": "path", "x": x, "y": y})

    def path_end(self):
        self.emit("SurfacePathEnd")
        self._step({"type": "pathend"})

    def tick(self, dt: float, dt_ms: float = 40):
        self.emit("Tick", dt=dt, dt_ms=dt_ms)
        self._step({"type": "tick", "dt": dt})

    # -- live-state coordinate helpers

    def box_world(self, node_id: str, dx=0.0, dy=0.0, dz=0.0) -> list[float]:
        box = self.state.layout.box(node_id)
        if box is None:
            raise KeyError(f"{node_id} has no proxy box")
        a = self.state.anchor
        return [a[0] + box.center[0] + dx, a[1] + box.center[1] + dy, a[2] + box.center[2] + dz]

    def container_world(self, cid: str, dx=0.0, dy=0.0, dz=0.0) -> list[float]:
        for c in self.state.groups:
            if c.id == cid:
                a = self.state.anchor
                return [a[0] + c.center[0] + dx, a[1] + c.center[1] + dy, a[2] + c.center[2] + dz]
        raise KeyError(cid)

    def attr_box_world(self, key: str) -> list[float]:
        for b in self.state.pinned.boxes:
            if b.key == key:
                a = self.state.anchor
                return [a[0] + b.center[0], a[1] + b.center[1], a[2] + b.center[2]]
        raise KeyError(key)

    def anchor_rel(self, dx: float, dy: float, dz: float) -> list[float]:
        a = self.state.anchor
        return [a[0] + dx, a[1] + dy, a[2] + dz]

    def write(self, name: str, pointer_script: bool = False):
        import json

        TRACES.mkdir(parents=True, exist_ok=True)
        path = TRACES / f"{name}.trace.jsonl"
        path.write_text("".join(json_line(ev.to_dict()) for ev in self.events), encoding="utf-8")
        print(f"wrote {path} ({len(self.events)} events)")
        if pointer_script:
            script = TRACES / f"{name}.pointer.json"
            script.write_text(json.dumps(self.steps, indent=1) + "\n", encoding="utf-8")
            print(f"wrote {script} ({len(self.steps)} steps)")


def office_01():
    d = Driver("office")
    # activate over the bookshelf, confirm the gazed shelf
    d.gaze(260, 500)
    d.pointer_move("right", [0.1, -0.1, 0.6])
    d.down("right")
    d.tick(0.05)  # hand rests at the anchor: no follow movement
    d.up("right")
    # two-hand zoom on the shelf proxy: descend to the book level
    d.pointer_move("left", d.box_world("1", dx=-0.01))
    d.pointer_move("right", d.box_world("1", dx=+0.01))
    d.down("left")
    d.down("right")
    d.pointer_move("left", d.box_world("1", dx=-0.015))
    d.pointer_move("right", d.box_world("1", dx=+0.015))
    d.up("left")
    d.up("right")
    # skim three books
    d.pointer_move("right", d.box_world("1.1"))
    d.down("right")
    d.pointer_move("right", d.box_world("1.2"))
    d.pointer_move("right", d.box_world("1.3"))
    d.up("right")
    # pin the first book's attributes, slide to the topic filter
    d.press(d.box_world("1.1", dx=0.01))
    d.tick(0.5, dt_ms=500)
    d.pointer_move("right", d.attr_box_world("topic"))
    d.release()
    # two-hand brush: grow over three books, retrace back to two
    d.gaze(500, 950)
    d.pointer_move("left", d.anchor_rel(-0.18, -0.05, -0.05))
    d.pointer_move("right", d.anchor_rel(-0.17, 0.05, 0.05))
    d.down("left")
    d.down("right")
    d.pointer_move("right", d.anchor_rel(-0.075, 0.05, 0.05))
    d.pointer_move("right", d.anchor_rel(-0.095, 0.05, 0.05))
    d.up("left")
    d.up("right")
    # empty-space brush becomes a persistent container
    d.pointer_move("left", d.anchor_rel(0.20, -0.05, -0.05))
    d.pointer_move("right", d.anchor_rel(0.30, 0.05, 0.05))
    d.down("left")
    d.down("right")
    d.pointer_move("right", d.anchor_rel(0.30, 0.05, 0.05))
    d.up("left")
    d.up("right")
    # grab the container, clone the two selected books in
    d.pointer_move("right", d.container_world("container:1"))
    d.press(d.container_world("container:1"))
    d.tap(d.box_world("1.1"))
    d.tap(d.box_world("1.2"))
    d.release()
    # collapse the container with a two-hand squeeze
    d.pointer_move("left", d.container_world("container:1", dx=-0.02))
    d.pointer_move("right", d.container_world("container:1", dx=+0.02))
    d.down("left")
    d.down("right")
    d.pointer_move("left", d.container_world("container:1", dx=-0.005))
    d.pointer_move("right", d.container_world("container:1", dx=+0.005))
    d.up("left")
    d.up("right")
    # skim the collapsed container: aggregate panel
    d.pointer_move("right", d.container_world("container:1"))
    d.down("right")
    d.up("right")
    # lasso books 4 and 5 on the surface projection
    for sx, sy in [(-0.06, -0.04), (0.06, -0.04), (0.06, 0.04), (-0.06, 0.04), (-0.06, -0.04)]:
        d.path_point(sx, sy)
    d.path_end()
    # double-tap a book: semantic grouping by its first attribute (color)
    d.dbl(d.box_world("1.6"))
    d.write("office-01", pointer_script=True)


def kitchen_01():
    d = Driver("kitchen")
    d.emit("GazeMove", px=[500, 500])
    d.emit("HandMove", hand="right", point=[0.05, 0.0, 0.4])
    d.emit("PinchStart", hand="right")
    d.emit("PinchEnd", hand="right")
    # zoom into the microwave: door / control-panel level
    d.emit("HandMove", hand="left", point=d.box_world("1", dx=-0.01))
    d.emit("HandMove", hand="right", point=d.box_world("1", dx=+0.01))
    d.emit("PinchStart", hand="left")
    d.emit("PinchStart", hand="right")
    d.emit("HandMove", hand="left", point=d.box_world("1", dx=-0.015))
    d.emit("HandMove", hand="right", point=d.box_world("1", dx=+0.015))
    d.emit("PinchEnd", hand="left")
    d.emit("PinchEnd", hand="right")
    # skim the door at the new level
    d.emit("HandMove", hand="right", point=d.box_world("1.1"))
    d.emit("PinchStart", hand="right")
    d.emit("PinchEnd", hand="right")
    d.write("kitchen-01")


def building_01():
    d = Driver("building")
    d.emit("GazeMove", px=[500, 450])
    d.emit("HandMove", hand="right", point=[0.0, -0.05, 0.45])
    d.emit("PinchStart", hand="right")
    d.emit("PinchEnd", hand="right")
    # zoom into floor 1
    d.emit("HandMove", hand="left", point=d.box_world("1", dx=-0.01))
    d.emit("HandMove", hand="right", point=d.box_world("1", dx=+0.01))
    d.emit("PinchStart", hand="left")
    d.emit("PinchStart", hand="right")
    d.emit("HandMove", hand="left", point=d.box_world("1", dx=-0.015))
    d.emit("HandMove", hand="right", point=d.box_world("1", dx=+0.015))
    d.emit("PinchEnd", hand="left")
    d.emit("PinchEnd", hand="right")
    # double-tap a room: group rooms by department
    d.emit("DoubleTap", point=d.box_world("1.1"))
    d.write("building-01")


def drone_01():
    d = Driver("drone")
    d.emit("GazeMove", px=[530, 515])
    d.emit("HandMove", hand="right", point=[0.0, 0.0, 0.5])
    d.emit("PinchStart", hand="right")
    # skim two drones while the activation pinch is held
    d.emit("HandMove", hand="right", point=d.box_world("1"))
    d.emit("HandMove", hand="right", point=d.box_world("2"))
    d.emit("PinchEnd", hand="right")
    # pin drone 4's attributes and filter for full batteries
    d.emit("HandMove", hand="right", point=d.box_world("4"))
    d.emit("HoldStart", point=d.box_world("4"))
    d.emit("Tick", dt=0.5, dt_ms=500)
    d.emit("HandMove", hand="right", point=d.attr_box_world("battery"))
    d.emit("HoldEnd")
    # brush the left half of the fleet
    d.emit("GazeMove", px=[200, 800])
    d.emit("HandMove", hand="left", point=d.anchor_rel(-0.20, -0.1, -0.1))
    d.emit("HandMove", hand="right", point=d.anchor_rel(-0.04, 0.1, 0.1))
    d.emit("PinchStart", hand="left")
    d.emit("PinchStart", hand="right")
    d.emit("HandMove", hand="right", point=d.anchor_rel(-0.04, 0.1, 0.1))
    d.emit("PinchEnd", hand="left")
    d.emit("PinchEnd", hand="right")
    # drag the selection forward: issue the move command
    d.emit("HandMove", hand="right", point=d.box_world("1"))
    d.emit("PinchStart", hand="right")
    start = d.box_world("1")
    d.emit("HandMove", hand="right", point=[start[0], start[1], start[2] + 0.125])
    d.emit("PinchEnd", hand="right")
    d.write("drone-01")


if __name__ == "__main__":
    office_01()
    kitchen_01()
    building_01()
    drone_01()
