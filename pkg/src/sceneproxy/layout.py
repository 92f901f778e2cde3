"""Order-preserving, minimum-gap proxy layout.

World positions are centered on their centroid, scaled into the
workspace, and then pushed apart by a per-axis forward pass over
difference constraints: processing ids in ascending world coordinate,
each coordinate is the maximum of its scaled target and the gap lower
bounds from already-placed ids that separate from it along that axis.
The pass always yields the componentwise-minimal feasible solution at
or above the scaled targets, so when the scaled positions already
satisfy every gap the layout equals them exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import Vec3
from .scene import Config

AXES = ("X", "Y", "Z")
_SCALE_CAP = 10.0


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class OrderingConstraint:
    axis: str
    before: str
    after: str
    world_delta: float


@dataclass(frozen=True)
class ProxyBox:
    id: str
    center: Vec3
    half_extent: float


@dataclass(frozen=True)
class ProxyLayout:
    boxes: tuple[ProxyBox, ...]
    anchor: Vec3
    scale_used: float
    separation_axis: dict[tuple[str, str], str] = field(default_factory=dict)

    def box(self, node_id: str) -> ProxyBox | None:
        for b in self.boxes:
            if b.id == node_id:
                return b
        return None

    def ids(self) -> list[str]:
        return [b.id for b in self.boxes]


def empty_layout(anchor: Vec3) -> ProxyLayout:
    return ProxyLayout((), anchor, 1.0, {})


def derive_constraints(positions: dict[str, Vec3], cfg: Config) -> list[OrderingConstraint]:
    """One constraint per pair and axis whose separation exceeds the tie tolerance."""
    if not positions:
        raise EmptyInput("no positions")
    ids = sorted(positions)
    out: list[OrderingConstraint] = []
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            for axis_idx, axis in enumerate(AXES):
                delta = positions[b][axis_idx] - positions[a][axis_idx]
                if abs(delta) > cfg.tie_tolerance_m:
                    before, after = (a, b) if delta > 0 else (b, a)
                    out.append(OrderingConstraint(axis, before, after, abs(delta)))
    return out


def assign_separation_axes(positions: dict[str, Vec3], cfg: Config) -> dict[tuple[str, str], str]:
    """Each unordered pair gets the axis of its largest displacement (ties X > Y > Z)."""
    ids = sorted(positions)
    out: dict[tuple[str, str], str] = {}
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            deltas = [abs(positions[b][k] - positions[a][k]) for k in range(3)]
            best = max(range(3), key=lambda k: (deltas[k], -k))
            out[(a, b)] = AXES[best]
    return out


def solve_layout(positions: dict[str, Vec3], cfg: Config, anchor: Vec3 = (0.0, 0.0, 0.0)) -> ProxyLayout:
    if not positions:
        raise EmptyInput("no positions")
    ids = sorted(positions)
    n = len(ids)

    centroid = tuple(sum(positions[i][k] for i in ids) / n for k in range(3))
    centered = {i: tuple(positions[i][k] - centroid[k] for k in range(3)) for i in ids}

    extent = max(
        (max(centered[i][k] for i in ids) - min(centered[i][k] for i in ids)) for k in range(3)
    )
    scale = min(cfg.workspace_extent_m / max(extent, 1e-6), _SCALE_CAP)

    sep = assign_separation_axes(positions, cfg) if n > 1 else {}
    min_step = cfg.proxy_size_m + cfg.min_gap_m

    coords: dict[str, list[float]] = {i: [0.0, 0.0, 0.0] for i in ids}
    for axis_idx, axis in enumerate(AXES):
        order = sorted(ids, key=lambda i: (centered[i][axis_idx], i))
        placed: list[str] = []
        for i in order:
            coord = scale * centered[i][axis_idx]
            for p in placed:
                pair = (p, i) if p < i else (i, p)
                if sep.get(pair) == axis:
                    coord = max(coord, coords[p][axis_idx] + min_step)
            coords[i][axis_idx] = coord
            placed.append(i)

    boxes = tuple(ProxyBox(i, tuple(coords[i]), cfg.proxy_size_m / 2) for i in ids)
    return ProxyLayout(boxes, anchor, scale, sep)


def layout_export_dict(layout: ProxyLayout) -> dict:
    """The layout export file body: anchor, scale, and boxes only."""
    return {
        "anchor": list(layout.anchor),
        "scale_used": layout.scale_used,
        "boxes": [
            {"id": b.id, "center": list(b.center), "half_extent": b.half_extent}
            for b in layout.boxes
        ],
    }
