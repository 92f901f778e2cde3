from __future__ import annotations

import math
import random

import pytest

from sceneproxy.layout import (
    AXES,
    EmptyInput,
    assign_separation_axes,
    derive_constraints,
    layout_export_dict,
    solve_layout,
)
from sceneproxy.scene import Config

CFG = Config()
MIN_STEP = CFG.proxy_size_m + CFG.min_gap_m


def test_constraints_single_object():
    assert derive_constraints({"a": (0, 0, 2)}, CFG) == []


def test_constraints_one_axis():
    out = derive_constraints({"a": (0, 0, 2), "b": (0.5, 0, 2)}, CFG)
    assert len(out) == 1
    c = out[0]
    assert (c.axis, c.before, c.after) == ("X", "a", "b")
    assert math.isclose(c.world_delta, 0.5)


def test_constraints_all_within_tolerance():
    assert derive_constraints({"a": (0, 0, 0), "b": (0.01, 0.01, 0.01)}, CFG) == []


def test_separation_axis_max_delta():
    axes = assign_separation_axes({"a": (0, 0, 0), "b": (0.5, 0.1, 0.0)}, CFG)
    assert axes[("a", "b")] == "X"


def test_separation_axis_tiebreak_x_first():
    axes = assign_separation_axes({"a": (0, 0, 0), "b": (0.2, 0.2, 0.1)}, CFG)
    assert axes[("a", "b")] == "X"


def test_separation_axis_collinear_z():
    positions = {"a": (0, 0, 1), "b": (0, 0, 2), "c": (0, 0, 3.5)}
    axes = assign_separation_axes(positions, CFG)
    assert set(axes.values()) == {"Z"}


def test_solve_single_object_at_origin():
    layout = solve_layout({"a": (4, 5, 6)}, CFG)
    assert layout.boxes[0].center == (0.0, 0.0, 0.0)
    assert layout.boxes[0].half_extent == CFG.proxy_size_m / 2


def test_solve_two_objects_fill_workspace():
    layout = solve_layout({"a": (0, 0, 2), "b": (1, 0, 2)}, CFG)
    ax = layout.box("a").center[0]
    bx = layout.box("b").center[0]
    assert math.isclose(ax, -0.15, abs_tol=1e-12)
    assert math.isclose(bx, 0.15, abs_tol=1e-12)
    assert math.isclose(layout.scale_used, 0.3, abs_tol=1e-12)
    assert bx - ax >= MIN_STEP


def test_solve_coincident_separated_by_id():
    layout = solve_layout({"a": (1, 1, 1), "b": (1, 1, 1)}, CFG)
    ax = layout.box("a").center[0]
    bx = layout.box("b").center[0]
    assert ax == 0.0
    assert math.isclose(bx - ax, MIN_STEP, abs_tol=1e-15)
    assert layout.separation_axis[("a", "b")] == "X"


def test_solve_empty_raises():
    with pytest.raises(EmptyInput):
        solve_layout({}, CFG)


def test_export_dict_shape():
    doc = layout_export_dict(solve_layout({"a": (0, 0, 2)}, CFG, anchor=(1, 2, 3)))
    assert doc["anchor"] == [1, 2, 3]
    assert doc["boxes"][0]["id"] == "a"
    assert set(doc) == {"anchor", "scale_used", "boxes"}


def _random_positions(rng: random.Random, n: int) -> dict:
    positions = {}
    for i in range(n):
        if positions and rng.random() < 0.25:
            # duplicate an existing point to exercise the gap lower bounds
            positions[f"n{i:02d}"] = positions[rng.choice(sorted(positions))]
        else:
            positions[f"n{i:02d}"] = (rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))
    return positions


def _axis_index(axis: str) -> int:
    return AXES.index(axis)


def test_random_scene_invariants():
    rng = random.Random(1234)
    for _ in range(300):
        n = rng.randint(1, 20)
        positions = _random_positions(rng, n)
        layout = solve_layout(positions, CFG)
        ids = sorted(positions)
        coords = {b.id: b.center for b in layout.boxes}
        # minimum separation along the assigned axis
        for (a, b), axis in layout.separation_axis.items():
            k = _axis_index(axis)
            assert abs(coords[a][k] - coords[b][k]) >= MIN_STEP - 1e-12
        # order preservation on separation axes
        for c in derive_constraints(positions, CFG):
            if layout.separation_axis.get(tuple(sorted((c.before, c.after)))) == c.axis:
                k = _axis_index(c.axis)
                assert coords[c.before][k] < coords[c.after][k]
        # boundedness
        bound = CFG.workspace_extent_m / 2 + n * MIN_STEP
        for b in layout.boxes:
            assert all(abs(v) <= bound for v in b.center)
        # determinism (bitwise)
        again = solve_layout(positions, CFG)
        assert again == layout
        del ids


def test_fidelity_when_gaps_already_satisfied():
    # objects 1 m apart scale to 0.1 m spacing, far beyond the minimum gap
    positions = {"a": (0, 0, 2), "b": (1, 0, 2), "c": (3, 0, 2)}
    layout = solve_layout(positions, CFG)
    scale = layout.scale_used
    centroid = (4 / 3, 0, 2)
    for b in layout.boxes:
        expected = tuple(scale * (positions[b.id][k] - centroid[k]) for k in range(3))
        assert b.center == expected  # exact: zero deviation from the scaled targets
