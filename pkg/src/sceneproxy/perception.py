"""Detection-to-hierarchy pipeline.

Detection and annotation sources are pluggable; the fixture-backed
implementations read JSON files so the whole pipeline stays
deterministic and replayable.  A detection fixture maps a region key
("root" or a node id) to a list of ``{bbox, label, score}`` records
whose boxes are relative to that region's crop.  An annotation fixture
maps node ids to attribute objects.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Protocol

from .geometry import BBox2D, contains, iou
from .scene import AttributeSet, Config, SceneNode


class SourceError(RuntimeError):
    """A detection or annotation source failed."""


class GazeOutsideImage(ValueError):
    pass


@dataclass(frozen=True)
class Detection:
    bbox: BBox2D
    label: str
    score: float


class DetectionSource(Protocol):
    def detect(self, region: BBox2D, depth: int, key: str) -> list[Detection]:
        """Detections inside ``region``; boxes are region-crop relative.

        ``key`` addresses the crop being queried ("root" for the initial
        region, otherwise the parent node id); file-backed sources index
        by it, live sources may ignore it.
        """
        ...


class AnnotatorSource(Protocol):
    def annotate(self, node_id: str, label: str) -> AttributeSet:
        ...


class FixtureDetectionSource:
    """Detections from a JSON fixture keyed by region key."""

    def __init__(self, table: dict[str, list[Detection]]):
        self._table = table

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureDetectionSource":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise SourceError(f"cannot read detection fixture {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise SourceError(f"detection fixture {path} must be a JSON object")
        table: dict[str, list[Detection]] = {}
        for key, items in raw.items():
            dets = []
            for i, d in enumerate(items):
                try:
                    x, y, w, h = d["bbox"]
                    dets.append(Detection(BBox2D(x, y, w, h), d["label"], d.get("score", 1.0)))
                except (KeyError, TypeError, ValueError) as exc:
                    raise SourceError(f"{path}: bad detection {key}[{i}]: {exc}") from exc
            table[key] = dets
        return cls(table)

    def detect(self, region: BBox2D, depth: int, key: str) -> list[Detection]:
        dets = self._table.get(key, [])
        crop = BBox2D(0, 0, region.w, region.h)
        for d in dets:
            if not (0 <= d.score <= 1):
                raise SourceError(f"detection score {d.score!r} for {key!r} outside [0, 1]")
            if not contains(crop, d.bbox, slack_px=1e-9):
                raise SourceError(f"detection {d.label!r} for {key!r} escapes its region crop")
        return list(dets)


class HttpDetectionSource:
    """Detections from a remote endpoint: POST {region, depth} -> {detections}.

    Disabled unless explicitly constructed; ``client`` is anything with a
    ``post(url, json=...)`` returning a response with ``.json()`` (an
    ``httpx.Client`` in production, a test client in tests).
    """

    def __init__(self, url: str, client=None):
        if client is None:
            import httpx

            client = httpx.Client(timeout=10.0)
        self._url = url
        self._client = client

    def detect(self, region: BBox2D, depth: int, key: str) -> list[Detection]:
        try:
            response = self._client.post(
                self._url, json={"region": region.as_list(), "depth": depth}
            )
            body = response.json()
            return [
                Detection(BBox2D(*d["bbox"]), d["label"], d.get("score", 1.0))
                for d in body["detections"]
            ]
        except Exception as exc:  # noqa: BLE001 - network and schema failures alike
            raise SourceError(f"detection endpoint {self._url}: {exc}") from exc


class HttpAnnotatorSource:
    """Attributes from a remote endpoint: POST {id, label} -> {attributes}."""

    def __init__(self, url: str, client=None):
        if client is None:
            import httpx

            client = httpx.Client(timeout=10.0)
        self._url = url
        self._client = client

    def annotate(self, node_id: str, label: str) -> AttributeSet:
        try:
            response = self._client.post(self._url, json={"id": node_id, "label": label})
            return dict(response.json()["attributes"])
        except Exception as exc:  # noqa: BLE001
            raise SourceError(f"annotation endpoint {self._url}: {exc}") from exc


class FixtureAnnotatorSource:
    """Attributes from a JSON fixture keyed by node id; missing ids yield {}."""

    def __init__(self, table: dict[str, AttributeSet]):
        self._table = table

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureAnnotatorSource":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise SourceError(f"cannot read annotation fixture {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise SourceError(f"annotation fixture {path} must be a JSON object")
        return cls({k: dict(v) for k, v in raw.items()})

    def annotate(self, node_id: str, label: str) -> AttributeSet:
        return dict(self._table.get(node_id, {}))


# -- operations ---------------------------------------------------------------


def extend_gaze_region(
    gaze_px: tuple[float, float], radius_px: float, image_size: tuple[float, float]
) -> BBox2D:
    """Square region of half-size ``radius_px`` around the gaze, clamped to the image."""
    gx, gy = gaze_px
    w, h = image_size
    if not (0 <= gx <= w and 0 <= gy <= h):
        raise GazeOutsideImage(f"gaze {gaze_px} outside image {image_size}")
    if radius_px <= 0 or not math.isfinite(radius_px):
        raise ValueError(f"radius_px must be positive, got {radius_px!r}")
    x0 = max(0.0, gx - radius_px)
    y0 = max(0.0, gy - radius_px)
    x1 = min(w, gx + radius_px)
    y1 = min(h, gy + radius_px)
    return BBox2D(x0, y0, x1 - x0, y1 - y0)


def dedup_detections(detections: list[Detection], threshold: float) -> list[Detection]:
    """Largest-first suppression: drop any box overlapping a kept one past ``threshold``.

    Area ties break by (score desc, label asc, input index asc) so the
    result is a total order and replays are stable.
    """
    indexed = sorted(
        enumerate(detections),
        key=lambda item: (-item[1].bbox.area, -item[1].score, item[1].label, item[0]),
    )
    kept: list[Detection] = []
    for _, det in indexed:
        if all(iou(det.bbox, k.bbox) <= threshold for k in kept):
            kept.append(det)
    return kept


_MAX_DEPTH = 4  # safety stop past the bbox-size rule


def build_hierarchy(src: DetectionSource, region: BBox2D, cfg: Config) -> list[SceneNode]:
    """Recursively detect and nest objects under ``region``.

    Level-1 boxes are returned in root-image coordinates; deeper boxes
    stay relative to the parent crop.  Ids are level-path strings
    ("1", "1.3", "1.3.2") assigned in deduplicated size order.
    Recursion into a node stops once min(w, h) drops below
    ``cfg.min_bbox_px`` or the depth cap is hit.
    """

    def _build(key: str, crop: BBox2D, depth: int, prefix: str, offset: tuple[float, float]) -> list[SceneNode]:
        detections = dedup_detections(src.detect(crop, depth, key), cfg.iou_dedup_threshold)
        nodes = []
        for i, det in enumerate(detections, start=1):
            node_id = f"{prefix}{i}"
            bbox = BBox2D(det.bbox.x + offset[0], det.bbox.y + offset[1], det.bbox.w, det.bbox.h)
            children: tuple[SceneNode, ...] = ()
            if min(det.bbox.w, det.bbox.h) >= cfg.min_bbox_px and depth < _MAX_DEPTH:
                children = tuple(
                    _build(node_id, BBox2D(0, 0, det.bbox.w, det.bbox.h), depth + 1, f"{node_id}.", (0, 0))
                )
            nodes.append(SceneNode(node_id, det.label, bbox, depth, {}, children))
        return nodes

    # level-1 boxes are shifted by the region origin into the root frame
    return _build("root", region, 1, "", (region.x, region.y))


@dataclass(frozen=True)
class EnrichReport:
    failed_ids: tuple[str, ...]


def enrich_attributes(
    nodes: list[SceneNode], annotator: AnnotatorSource
) -> tuple[list[SceneNode], EnrichReport]:
    """Merge annotator output into every node's attributes (annotator wins).

    A failing annotation leaves that node untouched and records its id;
    the tree shape never changes.
    """
    failed: list[str] = []

    def _enrich(node: SceneNode) -> SceneNode:
        attributes = dict(node.attributes)
        try:
            extra = annotator.annotate(node.id, node.label)
        except SourceError:
            failed.append(node.id)
            extra = {}
        attributes.update(extra)
        attributes = {k: attributes[k] for k in sorted(attributes)}
        return replace(node, attributes=attributes, children=tuple(_enrich(c) for c in node.children))

    enriched = [_enrich(n) for n in nodes]
    return enriched, EnrichReport(tuple(failed))
