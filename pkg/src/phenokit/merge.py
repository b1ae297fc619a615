"""Fuse per-tile detections into one global set.

Detections below the confidence threshold are dropped, survivors are
remapped to global coordinates, and duplicates from overlapping tiles
are removed by class-aware greedy NMS. Fecal and no-fecal holes can
co-occur at close range, so boxes never suppress across classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

from ._io import atomic_write_json, read_json
from .core import BBox, Detection, HoleClass, iou, require_fraction
from .errors import ShapeError, ValidationError
from .tiler import TileGrid, tile_to_global

DEFAULT_CONF_THRESHOLD = 0.6
DEFAULT_NMS_IOU = 0.5


@dataclass(frozen=True)
class MergeConfig:
    """Thresholds applied while fusing tiles.

    box_quality_threshold is an optional secondary filter for backends
    that flag low-quality localisations; detections without the flag
    always pass.
    """

    conf_threshold: float = DEFAULT_CONF_THRESHOLD
    nms_iou: float = DEFAULT_NMS_IOU
    box_quality_threshold: float | None = None

    def __post_init__(self):
        require_fraction(self.conf_threshold, "conf_threshold", low_open=True)
        require_fraction(self.nms_iou, "nms_iou", low_open=True)


def _rank(det: Detection) -> tuple:
    # Confidence descending; geometry breaks ties so output order is
    # reproducible across runs and platforms.
    box = det.box
    return (-det.confidence, box.x_min, box.y_min, box.x_max, box.y_max,
            box.class_id)


def nms(detections: Sequence[Detection], iou_thresh: float) -> list[Detection]:
    """Greedy class-aware non-maximum suppression.

    Repeatedly keeps the highest-ranked remaining detection and removes
    every same-class detection overlapping it with IoU >= iou_thresh.
    Output is confidence-descending with the same deterministic ties.
    """
    require_fraction(iou_thresh, "iou_thresh", low_open=True)
    ordered = sorted(detections, key=_rank)
    kept: list[Detection] = []
    suppressed = [False] * len(ordered)
    for i, det in enumerate(ordered):
        if suppressed[i]:
            continue
        kept.append(det)
        for j in range(i + 1, len(ordered)):
            if suppressed[j]:
                continue
            other = ordered[j]
            if other.class_id != det.class_id:
                continue
            if iou(det.box, other.box) >= iou_thresh:
                suppressed[j] = True
    return kept


def merge_tiles(per_tile: Sequence[Sequence[Detection]], grid: TileGrid,
                cfg: MergeConfig = MergeConfig()) -> list[Detection]:
    """Merge tile-local detections (aligned with grid order) globally."""
    if len(per_tile) != len(grid.tiles):
        raise ShapeError(
            f"{len(per_tile)} detection lists for {len(grid.tiles)} tiles"
        )
    remapped: list[Detection] = []
    for tile, detections in zip(grid.tiles, per_tile):
        for det in detections:
            if det.confidence < cfg.conf_threshold:
                continue
            if (cfg.box_quality_threshold is not None
                    and det.box_quality is not None
                    and det.box_quality < cfg.box_quality_threshold):
                continue
            remapped.append(tile_to_global(det, tile))
    return nms(remapped, cfg.nms_iou)


def count_by_class(detections: Sequence[Detection]) -> dict[HoleClass, int]:
    """Exact per-class multiplicities; both classes always present."""
    counts = {HoleClass.FECAL: 0, HoleClass.NO_FECAL: 0}
    for det in detections:
        cls = HoleClass(det.class_id)
        counts[cls] += 1
    return counts


def detection_to_json(det: Detection, image: str | None = None) -> dict[str, Any]:
    record: dict[str, Any] = {}
    if image is not None:
        record["image"] = image
    record.update({
        "class": det.class_id,
        "confidence": det.confidence,
        "x_min": det.box.x_min,
        "y_min": det.box.y_min,
        "x_max": det.box.x_max,
        "y_max": det.box.y_max,
    })
    return record


def detection_from_json(record: Mapping[str, Any]) -> Detection:
    try:
        box = BBox(
            record["x_min"], record["y_min"],
            record["x_max"], record["y_max"],
            int(record["class"]),
        )
        return Detection(box, float(record.get("confidence", 1.0)))
    except KeyError as exc:
        raise ValidationError(f"detection record missing field {exc}") from None


def write_detections(detections_by_image: Mapping[str, Sequence[Detection]],
                     path: str | Path) -> None:
    """Write merged detections as a JSON array, confidence-descending."""
    records = []
    for image in detections_by_image:
        for det in sorted(detections_by_image[image], key=_rank):
            records.append(detection_to_json(det, image))
    atomic_write_json(path, records)


def read_detections(path: str | Path) -> dict[str, list[Detection]]:
    """Read a merged-detections JSON array grouped by image."""
    records = read_json(path)
    if not isinstance(records, list):
        raise ValidationError("detections file must be a JSON array")
    grouped: dict[str, list[Detection]] = {}
    for record in records:
        grouped.setdefault(record.get("image", ""), []).append(
            detection_from_json(record)
        )
    return grouped
