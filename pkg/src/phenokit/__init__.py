"""Weevil damage assessment toolkit.

Pipelines for converting point annotations to detection labels, masking
root images onto black backgrounds, slicing into overlapping tiles,
merging per-tile detections, counting feeding holes per root, curating
and splitting plot datasets, and scoring both the detection and the
severity-classification tasks.
"""

from .annotate import (
    PointAnnotation,
    point_to_box,
    read_labels,
    severity_from_fraction,
    write_labels,
)
from .backends import (
    ClassifierBackend,
    DetectorBackend,
    PerturbConfig,
    PlotPair,
    TilePatch,
    blob_detector,
    perturbed_detector,
    replay_classifier,
    replay_detector,
)
from .core import (
    BBox,
    Detection,
    HoleClass,
    ImageRecord,
    SeverityScore,
    iou,
)
from .curate import (
    PlotRecord,
    RootDamageRecord,
    SplitManifest,
    aggregate_root_damage,
    drop_class,
    group_plots,
    make_pairs,
    stratified_split,
    undersample,
)
from .mask import BinaryMask, apply_mask, mask_bbox
from .merge import MergeConfig, count_by_class, merge_tiles, nms
from .metrics import (
    average_precision,
    class_report,
    confusion_matrix,
    evaluate_detections,
    map50,
    match_detections,
)
from .tiler import TileGrid, TileSpec, clip_annotations, filter_empty, plan_tiles, tile_to_global

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "BinaryMask",
    "ClassifierBackend",
    "Detection",
    "DetectorBackend",
    "HoleClass",
    "ImageRecord",
    "MergeConfig",
    "PerturbConfig",
    "PlotPair",
    "PlotRecord",
    "PointAnnotation",
    "RootDamageRecord",
    "SeverityScore",
    "SplitManifest",
    "TileGrid",
    "TilePatch",
    "TileSpec",
    "aggregate_root_damage",
    "apply_mask",
    "average_precision",
    "blob_detector",
    "class_report",
    "clip_annotations",
    "confusion_matrix",
    "count_by_class",
    "drop_class",
    "evaluate_detections",
    "filter_empty",
    "group_plots",
    "iou",
    "make_pairs",
    "map50",
    "mask_bbox",
    "match_detections",
    "merge_tiles",
    "nms",
    "perturbed_detector",
    "plan_tiles",
    "point_to_box",
    "read_labels",
    "replay_classifier",
    "replay_detector",
    "severity_from_fraction",
    "stratified_split",
    "tile_to_global",
    "undersample",
    "write_labels",
]
