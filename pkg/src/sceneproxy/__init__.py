"""Proxy-based interaction engine for real-world scenes.

The package turns a detected (or authored) scene into a hierarchy of
objects, estimates their 3D positions, lays out compact hand-anchored
proxy boxes, and runs a deterministic gesture state machine whose
feedback stream can be replayed, golden-tested, and served live over a
WebSocket session protocol.
"""

__version__ = "0.1.0"
