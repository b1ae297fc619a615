"""Evaluation suites: severity classification and detection.

Classification reports mirror the per-class precision/recall/F1/support
layout; detection evaluation uses greedy confidence-ordered matching at
a fixed IoU threshold and all-point (continuous) interpolation for AP,
with mAP@0.5 as the unweighted mean over classes.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .core import BBox, Detection, iou, require_fraction
from .errors import EmptyInputError, ValidationError


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[i][j] = samples with true class i predicted as class j."""

    classes: tuple[Hashable, ...]
    counts: tuple[tuple[int, ...], ...]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def support(self, index: int) -> int:
        return sum(self.counts[index])


@dataclass(frozen=True)
class ClassMetrics:
    label: Hashable
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ClassReport:
    rows: tuple[ClassMetrics, ...]
    accuracy: float
    total: int
    # Names of metrics whose denominator was zero and were reported as 0.
    degenerate: tuple[str, ...] = ()


def confusion_matrix(pairs: Iterable[tuple[Hashable, Hashable]],
                     classes: Sequence[Hashable]) -> ConfusionMatrix:
    """Count (true, predicted) label pairs over an ordered class list."""
    index = {label: i for i, label in enumerate(classes)}
    counts = [[0] * len(classes) for _ in classes]
    for true, predicted in pairs:
        if true not in index:
            raise ValidationError(f"unknown true label {true!r}")
        if predicted not in index:
            raise ValidationError(f"unknown predicted label {predicted!r}")
        counts[index[true]][index[predicted]] += 1
    return ConfusionMatrix(tuple(classes), tuple(tuple(row) for row in counts))


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def class_report(cm: ConfusionMatrix) -> ClassReport:
    """Per-class precision/recall/F1/support plus overall accuracy.

    Zero-denominator metrics are reported as 0 and named in the
    report's degenerate tuple rather than emitted as NaN.
    """
    if cm.total == 0:
        raise EmptyInputError("confusion matrix has no samples")
    rows = []
    degenerate: list[str] = []
    for i, label in enumerate(cm.classes):
        tp = cm.counts[i][i]
        support = cm.support(i)
        predicted = sum(cm.counts[r][i] for r in range(len(cm.classes)))
        if predicted == 0:
            precision = 0.0
            degenerate.append(f"precision[{label}]")
        else:
            precision = tp / predicted
        if support == 0:
            recall = 0.0
            degenerate.append(f"recall[{label}]")
        else:
            recall = tp / support
        rows.append(ClassMetrics(
            label, precision, recall, f1_score(precision, recall), support,
        ))
    accuracy = sum(cm.counts[i][i] for i in range(len(cm.classes))) / cm.total
    return ClassReport(tuple(rows), accuracy, cm.total, tuple(degenerate))


def match_detections(predictions: Sequence[Detection],
                     ground_truths: Sequence[BBox],
                     iou_thresh: float = 0.5) -> tuple[list[bool], list[bool]]:
    """Greedy TP/FP assignment for one image.

    Predictions are processed confidence-descending (stable on ties);
    each claims the unmatched same-class ground truth of highest IoU,
    provided that IoU reaches the threshold. Equal IoUs resolve to the
    earlier ground truth. Returns per-prediction TP flags aligned with
    the input order and per-ground-truth matched flags.
    """
    require_fraction(iou_thresh, "iou_thresh", low_open=True)
    order = sorted(range(len(predictions)),
                   key=lambda i: -predictions[i].confidence)
    tp_flags = [False] * len(predictions)
    gt_matched = [False] * len(ground_truths)
    for i in order:
        pred = predictions[i]
        best_iou = 0.0
        best_gt = -1
        for g, gt in enumerate(ground_truths):
            if gt_matched[g] or gt.class_id != pred.class_id:
                continue
            overlap = iou(pred.box, gt)
            if overlap > best_iou:
                best_iou = overlap
                best_gt = g
        if best_gt >= 0 and best_iou >= iou_thresh:
            tp_flags[i] = True
            gt_matched[best_gt] = True
    return tp_flags, gt_matched


@dataclass(frozen=True)
class APResult:
    """AP value plus whether it is defined (some GT or prediction exists)."""

    ap: float
    defined: bool = True


def average_precision(flags: Sequence[bool], n_gt: int) -> APResult:
    """Area under the precision-recall envelope (all-point interpolation).

    flags are TP/FP indicators in confidence-descending order. With no
    ground truth and no predictions the AP is undefined and reported as
    0 with defined=False.
    """
    if n_gt < 0:
        raise ValidationError(f"n_gt must be >= 0, got {n_gt}")
    if n_gt == 0:
        return APResult(0.0, defined=len(flags) > 0)
    if not flags:
        return APResult(0.0)
    tp = np.cumsum(np.asarray(flags, dtype=bool))
    ranks = np.arange(1, len(flags) + 1)
    recall = np.concatenate(([0.0], tp / n_gt))
    precision = np.concatenate(([1.0], tp / ranks))
    # Monotone non-increasing precision envelope, built from the right.
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    ap = float(np.sum((recall[1:] - recall[:-1]) * envelope[1:]))
    return APResult(ap)


def map50(aps: Iterable[APResult | float]) -> float:
    """Unweighted mean of the defined per-class APs."""
    values = []
    for ap in aps:
        if isinstance(ap, APResult):
            if ap.defined:
                values.append(ap.ap)
        else:
            values.append(float(ap))
    if not values:
        raise EmptyInputError("no class has a defined AP")
    return sum(values) / len(values)


@dataclass(frozen=True)
class ClassDetectionMetrics:
    class_id: int
    precision: float
    recall: float
    ap: float
    n_gt: int
    n_pred: int
    defined: bool = True


@dataclass(frozen=True)
class DetectionReport:
    rows: tuple[ClassDetectionMetrics, ...]
    map50: float
    degenerate: tuple[str, ...] = ()


def evaluate_detections(
        predictions_by_image: Mapping[str, Sequence[Detection]],
        truths_by_image: Mapping[str, Sequence[BBox]],
        iou_thresh: float = 0.5,
        classes: Sequence[int] | None = None) -> DetectionReport:
    """Full detection evaluation over a set of images.

    Matching runs per image; the resulting flags are pooled per class in
    globally confidence-sorted order before computing AP. Precision and
    recall are totals over all supplied predictions.
    """
    images = sorted(set(predictions_by_image) | set(truths_by_image))
    scored: dict[int, list[tuple[float, bool]]] = {}
    gt_counts: dict[int, int] = {}
    for image in images:
        preds = list(predictions_by_image.get(image, ()))
        gts = list(truths_by_image.get(image, ()))
        tp_flags, _ = match_detections(preds, gts, iou_thresh)
        for pred, flag in zip(preds, tp_flags):
            scored.setdefault(pred.class_id, []).append(
                (pred.confidence, flag)
            )
        for gt in gts:
            gt_counts[gt.class_id] = gt_counts.get(gt.class_id, 0) + 1
    if classes is None:
        classes = sorted(set(scored) | set(gt_counts))
    rows = []
    degenerate: list[str] = []
    for class_id in classes:
        entries = scored.get(class_id, [])
        entries.sort(key=lambda item: -item[0])
        flags = [flag for _, flag in entries]
        n_gt = gt_counts.get(class_id, 0)
        tp = sum(flags)
        if entries:
            precision = tp / len(entries)
        else:
            precision = 0.0
            degenerate.append(f"precision[{class_id}]")
        if n_gt > 0:
            recall = tp / n_gt
        else:
            recall = 0.0
            degenerate.append(f"recall[{class_id}]")
        result = average_precision(flags, n_gt)
        rows.append(ClassDetectionMetrics(
            class_id, precision, recall, result.ap,
            n_gt, len(entries), result.defined,
        ))
    overall = map50(APResult(row.ap, row.defined) for row in rows)
    return DetectionReport(tuple(rows), overall, tuple(degenerate))


def class_report_csv(report: ClassReport) -> str:
    """Render a classification report: one row per class + summary."""
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["class", "precision", "recall", "f1", "support"])
    for row in report.rows:
        writer.writerow([
            str(row.label), f"{row.precision:.4f}", f"{row.recall:.4f}",
            f"{row.f1:.4f}", row.support,
        ])
    writer.writerow(["accuracy", "", "", f"{report.accuracy:.4f}", report.total])
    return buffer.getvalue()


def class_report_json(report: ClassReport) -> dict[str, Any]:
    return {
        "classes": [
            {
                "class": str(row.label),
                "precision": row.precision,
                "recall": row.recall,
                "f1": row.f1,
                "support": row.support,
            }
            for row in report.rows
        ],
        "accuracy": report.accuracy,
        "total": report.total,
        "degenerate": list(report.degenerate),
    }


def detection_report_csv(report: DetectionReport) -> str:
    """Render a detection report: one row per class + mAP summary."""
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["class", "precision", "recall", "ap50", "n_gt", "n_pred"])
    for row in report.rows:
        writer.writerow([
            row.class_id, f"{row.precision:.4f}", f"{row.recall:.4f}",
            f"{row.ap:.4f}", row.n_gt, row.n_pred,
        ])
    writer.writerow(["mAP50", "", "", f"{report.map50:.4f}", "", ""])
    return buffer.getvalue()


def detection_report_json(report: DetectionReport) -> dict[str, Any]:
    return {
        "classes": [
            {
                "class": row.class_id,
                "precision": row.precision,
                "recall": row.recall,
                "ap50": row.ap,
                "n_gt": row.n_gt,
                "n_pred": row.n_pred,
                "defined": row.defined,
            }
            for row in report.rows
        ],
        "map50": report.map50,
        "degenerate": list(report.degenerate),
    }
