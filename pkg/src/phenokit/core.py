"""Shared geometric and identity types plus the IoU primitive.

Boxes are closed-open pixel intervals in continuous coordinates:
a box (x_min, y_min, x_max, y_max) covers [x_min, x_max) x [y_min, y_max)
and has area (x_max - x_min) * (y_max - y_min). Zero-area boxes are
rejected at construction so IoU never divides by zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

from .errors import InvalidParameterError, ValidationError

VALID_SECTIONS = ("A", "B", "C", "D")


class HoleClass(IntEnum):
    """Feeding-hole category: with or without fecal matter in the cavity."""

    FECAL = 0
    NO_FECAL = 1

    def __str__(self) -> str:
        return str(self.value)

    @property
    def label(self) -> str:
        return self.name.lower()


class SeverityScore(IntEnum):
    """Adapted 5-point plot damage scale; only odd scores 1..9 exist."""

    S1 = 1
    S3 = 3
    S5 = 5
    S7 = 7
    S9 = 9

    def __str__(self) -> str:
        return str(self.value)


#: Scale definition: fraction of damaged roots in the plot per score.
SEVERITY_BANDS: dict[SeverityScore, str] = {
    SeverityScore.S1: "no visible damage",
    SeverityScore.S3: "under 5% of roots damaged",
    SeverityScore.S5: "16-33% of roots damaged",
    SeverityScore.S7: "67-99% of roots damaged",
    SeverityScore.S9: "all roots damaged",
}


@dataclass(frozen=True, order=True)
class BBox:
    """Axis-aligned pixel box with a class id.

    Coordinates may be global or tile-local depending on context; they
    are always non-negative with x_min < x_max and y_min < y_max.
    """

    x_min: float
    y_min: float
    x_max: float
    y_max: float
    class_id: int = 0

    def __post_init__(self):
        if self.x_min < 0 or self.y_min < 0:
            raise ValidationError(f"box coordinates must be >= 0: {self}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValidationError(
                f"box must have positive extent on both axes: {self}"
            )

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def translate(self, dx: float, dy: float) -> BBox:
        """Return the box shifted by (dx, dy)."""
        return BBox(
            self.x_min + dx, self.y_min + dy,
            self.x_max + dx, self.y_max + dy,
            self.class_id,
        )

    def intersection_area(self, other: BBox) -> float:
        iw = min(self.x_max, other.x_max) - max(self.x_min, other.x_min)
        ih = min(self.y_max, other.y_max) - max(self.y_min, other.y_min)
        if iw <= 0 or ih <= 0:
            return 0.0
        return iw * ih


@dataclass(frozen=True, order=True)
class Detection:
    """A box plus model confidence in [0, 1].

    box_quality is optional backend metadata (some detectors flag
    low-quality localisations); it is ignored unless a merge config
    opts in to filtering on it.
    """

    box: BBox
    confidence: float
    box_quality: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(
                f"confidence must be in [0, 1], got {self.confidence}"
            )
        if self.box_quality is not None and not 0.0 <= self.box_quality <= 1.0:
            raise ValidationError(
                f"box_quality must be in [0, 1], got {self.box_quality}"
            )

    @property
    def class_id(self) -> int:
        return self.box.class_id


@dataclass(frozen=True)
class ImageRecord:
    """One source image with its identity metadata.

    plot_id doubles as the genotype identifier for lab images; section
    (A-D) and replication are lab-only, severity is field-only.
    """

    path: str
    width: int
    height: int
    plot_id: str | None = None
    section: str | None = None
    replication: int | None = None
    severity: SeverityScore | None = None
    mask_path: str | None = None
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValidationError(
                f"image dimensions must be positive: {self.width}x{self.height}"
            )
        if self.section is not None and self.section not in VALID_SECTIONS:
            raise ValidationError(
                f"section must be one of {VALID_SECTIONS}, got {self.section!r}"
            )


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes.

    Symmetric, in [0, 1]; 0 when the interiors are disjoint and 1 only
    for identical boxes.
    """
    inter = a.intersection_area(b)
    if inter == 0.0:
        return 0.0
    return inter / (a.area + b.area - inter)


def require_fraction(value: float, name: str, *,
                     low: float = 0.0, high: float = 1.0,
                     low_open: bool = False, high_open: bool = False) -> float:
    """Validate that value lies in the given interval, else raise."""
    above = value > low if low_open else value >= low
    below = value < high if high_open else value <= high
    if not (above and below):
        lo, hi = ("(" if low_open else "["), (")" if high_open else "]")
        raise InvalidParameterError(
            f"{name} must be in {lo}{low}, {high}{hi}, got {value}"
        )
    return value
