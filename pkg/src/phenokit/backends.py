"""Pluggable detector and classifier backends.

Three concrete detectors cover everything the pipeline needs without an
ML runtime: replay of stored predictions, controlled perturbation of
ground truth (for validating the metric suite), and an intensity-blob
baseline. Trained models plug in behind the same interfaces.

All backends are deterministic given their configuration and safe to
call concurrently: the perturbation backend derives an independent RNG
per tile from (seed, tile key), so scheduling order never changes
results.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Protocol, Sequence

import numpy as np
from scipy import ndimage

from ._io import read_json
from .core import BBox, Detection, SeverityScore, require_fraction
from .errors import (
    InvalidParameterError,
    MissingPredictionError,
    ShapeError,
    ValidationError,
)
from .merge import detection_from_json, detection_to_json

EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


@dataclass(frozen=True)
class TilePatch:
    """Input to a detector: tile pixels plus identity.

    pixels may be None for backends that do not look at the raster
    (replay, perturbation); key is the manifest tile key.
    """

    key: str
    width: int
    height: int
    pixels: np.ndarray | None = None


@dataclass(frozen=True)
class PlotPair:
    """Input to a classifier: the plot's image pair plus identity."""

    plot_id: str
    first: np.ndarray | None = None
    second: np.ndarray | None = None


class DetectorBackend(Protocol):
    def detect(self, patch: TilePatch) -> list[Detection]:
        """Return tile-local detections for one tile."""
        ...


class ClassifierBackend(Protocol):
    def classify(self, pair: PlotPair) -> tuple[SeverityScore, float]:
        """Return (severity score, confidence) for one plot."""
        ...


@dataclass(frozen=True)
class PerturbConfig:
    """Controls for the ground-truth perturbation harness."""

    drop_prob: float = 0.0
    jitter_px: float = 0.0
    false_positive_rate: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        require_fraction(self.drop_prob, "drop_prob")
        if self.jitter_px < 0:
            raise InvalidParameterError(
                f"jitter_px must be >= 0, got {self.jitter_px}"
            )
        if self.false_positive_rate < 0:
            raise InvalidParameterError(
                f"false_positive_rate must be >= 0, got {self.false_positive_rate}"
            )


class ReplayDetector:
    """Serves detections verbatim from a stored prediction manifest."""

    def __init__(self, manifest: Mapping[str, Sequence[Detection]]):
        self._manifest = {key: list(dets) for key, dets in manifest.items()}

    def detect(self, patch: TilePatch) -> list[Detection]:
        if patch.key not in self._manifest:
            raise MissingPredictionError(patch.key)
        return list(self._manifest[patch.key])


def replay_detector(manifest: Mapping[str, Sequence[Detection]]) -> ReplayDetector:
    return ReplayDetector(manifest)


def _tile_rng(seed: int, key: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{key}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


class PerturbedDetector:
    """Emits ground truth degraded in controlled, measurable ways.

    Each truth box is dropped with probability drop_prob, survivors are
    translated by a uniform offset in [-jitter_px, +jitter_px] (clamped
    inside the tile), and spurious boxes are injected with a per-tile
    Poisson count of mean false_positive_rate.
    """

    _FP_SIDE = (8.0, 40.0)

    def __init__(self, truth: Mapping[str, Sequence[BBox]], cfg: PerturbConfig):
        self._truth = {key: list(boxes) for key, boxes in truth.items()}
        self._cfg = cfg

    def detect(self, patch: TilePatch) -> list[Detection]:
        cfg = self._cfg
        rng = _tile_rng(cfg.rng_seed, patch.key)
        out: list[Detection] = []
        for box in self._truth.get(patch.key, []):
            if cfg.drop_prob > 0 and rng.random() < cfg.drop_prob:
                continue
            moved = box
            if cfg.jitter_px > 0:
                dx, dy = rng.uniform(-cfg.jitter_px, cfg.jitter_px, size=2)
                moved = _shift_within(box, dx, dy, patch.width, patch.height)
            out.append(Detection(moved, confidence=rng.uniform(0.6, 1.0)))
        for _ in range(rng.poisson(cfg.false_positive_rate)):
            out.append(Detection(
                _random_box(rng, patch.width, patch.height, self._FP_SIDE),
                confidence=rng.uniform(0.6, 1.0),
            ))
        return out


def _shift_within(box: BBox, dx: float, dy: float,
                  width: int, height: int) -> BBox:
    dx = min(max(dx, -box.x_min), width - box.x_max)
    dy = min(max(dy, -box.y_min), height - box.y_max)
    return box.translate(dx, dy)


def _random_box(rng: np.random.Generator, width: int, height: int,
                side_range: tuple[float, float], class_id: int | None = None) -> BBox:
    w = min(rng.uniform(*side_range), width)
    h = min(rng.uniform(*side_range), height)
    x = rng.uniform(0, width - w)
    y = rng.uniform(0, height - h)
    if class_id is None:
        class_id = int(rng.integers(0, 2))
    return BBox(x, y, x + w, y + h, class_id)


def perturbed_detector(truth: Mapping[str, Sequence[BBox]],
                       cfg: PerturbConfig) -> PerturbedDetector:
    return PerturbedDetector(truth, cfg)


class BlobDetector:
    """Dark-region baseline: thresholds the tile and boxes the blobs.

    Exact-black pixels are the mask fill, never holes, so they are
    excluded before thresholding. Confidence grows with blob area:
    area / max_area clamped to [0.5, 1.0].
    """

    def __init__(self, intensity_threshold: int, min_area: int, max_area: int,
                 class_id: int = 1):
        if not 0 <= intensity_threshold <= 255:
            raise InvalidParameterError(
                f"intensity_threshold must be in [0, 255], got {intensity_threshold}"
            )
        if not 0 < min_area < max_area:
            raise InvalidParameterError(
                f"need 0 < min_area < max_area, got {min_area}, {max_area}"
            )
        self.intensity_threshold = intensity_threshold
        self.min_area = min_area
        self.max_area = max_area
        self.class_id = class_id

    def detect(self, patch: TilePatch) -> list[Detection]:
        if patch.pixels is None:
            raise ValidationError("blob detector needs tile pixels")
        pixels = patch.pixels
        if pixels.ndim == 3:
            gray = pixels.mean(axis=2)
            background = (pixels == 0).all(axis=2)
        elif pixels.ndim == 2:
            gray = pixels.astype(float)
            background = pixels == 0
        else:
            raise ShapeError(f"expected HxW or HxWx3 tile, got {pixels.shape}")
        candidates = (gray < self.intensity_threshold) & ~background
        labels, count = ndimage.label(candidates, structure=EIGHT_CONNECTED)
        detections: list[Detection] = []
        for index, bounds in enumerate(ndimage.find_objects(labels), start=1):
            if bounds is None:
                continue
            area = int((labels[bounds] == index).sum())
            if not self.min_area <= area <= self.max_area:
                continue
            ys, xs = bounds
            box = BBox(
                float(xs.start), float(ys.start),
                float(xs.stop), float(ys.stop),
                self.class_id,
            )
            confidence = min(1.0, max(0.5, area / self.max_area))
            detections.append(Detection(box, confidence))
        return detections


def blob_detector(intensity_threshold: int, min_area: int,
                  max_area: int, class_id: int = 1) -> BlobDetector:
    return BlobDetector(intensity_threshold, min_area, max_area, class_id)


#: Scores a field classifier may emit; S9 plots are excluded upstream.
FIELD_SCORES = (SeverityScore.S1, SeverityScore.S3, SeverityScore.S5,
                SeverityScore.S7)


class ReplayClassifier:
    """Serves (score, confidence) pairs from a stored manifest."""

    def __init__(self, manifest: Mapping[str, tuple[SeverityScore, float]],
                 allowed: Sequence[SeverityScore] = FIELD_SCORES):
        allowed_set = set(allowed)
        for plot_id, (score, confidence) in manifest.items():
            if score not in allowed_set:
                raise ValidationError(
                    f"plot {plot_id}: score {score} not in {sorted(allowed_set)}"
                )
            require_fraction(confidence, f"confidence for plot {plot_id}")
        self._manifest = dict(manifest)

    def classify(self, pair: PlotPair) -> tuple[SeverityScore, float]:
        if pair.plot_id not in self._manifest:
            raise MissingPredictionError(pair.plot_id)
        return self._manifest[pair.plot_id]


def replay_classifier(manifest: Mapping[str, tuple[SeverityScore, float]],
                      allowed: Sequence[SeverityScore] = FIELD_SCORES) -> ReplayClassifier:
    return ReplayClassifier(manifest, allowed)


def read_prediction_manifest(path: str | Path) -> dict[str, list[Detection]]:
    """Load a detector prediction manifest: tile key -> detection list."""
    payload = read_json(path)
    if not isinstance(payload, dict):
        raise ValidationError("prediction manifest must be a JSON object")
    return {
        key: [detection_from_json(record) for record in records]
        for key, records in payload.items()
    }


def prediction_manifest_json(
        predictions: Mapping[str, Sequence[Detection]]) -> dict[str, Any]:
    return {
        key: [detection_to_json(det) for det in dets]
        for key, dets in predictions.items()
    }


def read_score_manifest(path: str | Path) -> dict[str, tuple[SeverityScore, float]]:
    """Load a classifier manifest: plot id -> score (optionally + confidence)."""
    payload = read_json(path)
    if not isinstance(payload, dict):
        raise ValidationError("score manifest must be a JSON object")
    manifest: dict[str, tuple[SeverityScore, float]] = {}
    for plot_id, value in payload.items():
        if isinstance(value, dict):
            score, confidence = value.get("score"), value.get("confidence", 1.0)
        else:
            score, confidence = value, 1.0
        try:
            manifest[plot_id] = (SeverityScore(int(score)), float(confidence))
        except ValueError:
            raise ValidationError(
                f"plot {plot_id}: invalid severity score {score!r}"
            ) from None
    return manifest
