"""Point-to-box conversion, severity banding, and label-file I/O.

Label files are UTF-8 text, one object per line:
``class_id cx cy w h`` with center/size normalized to [0, 1] by the
image dimensions and written as 6-decimal fixed point.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .core import BBox, HoleClass, SeverityScore
from .errors import (
    DegenerateAnnotationError,
    InvalidParameterError,
    LabelParseError,
)


class ClampedBoxWarning(UserWarning):
    """A converted box was trimmed against the image border."""


@dataclass(frozen=True)
class PointAnnotation:
    """A labelled point marking the centre of a feeding hole."""

    x: float
    y: float
    hole_class: HoleClass


def point_to_box(point: PointAnnotation, pad: float,
                 dims: tuple[int, int]) -> BBox:
    """Expand a centre point into a box with half-width ``pad``.

    The box (x-pad, y-pad, x+pad, y+pad) is clamped to the image; a
    clamped-but-nonempty box emits ClampedBoxWarning (border holes are
    real data), while one that collapses to zero area is an error.

    Args:
        point: annotation, nominally with 0 <= x < width and
            0 <= y < height; slightly out-of-bounds points are
            tolerated as long as the clamped box keeps area.
        pad: half-width in pixels, > 0. The default annotation
            protocol uses 18, giving 36x36 boxes.
        dims: (width, height) of the source image.
    """
    if pad <= 0:
        raise InvalidParameterError(f"pad must be > 0, got {pad}")
    width, height = dims
    x_min = max(0.0, point.x - pad)
    y_min = max(0.0, point.y - pad)
    x_max = min(float(width), point.x + pad)
    y_max = min(float(height), point.y + pad)
    if x_min >= x_max or y_min >= y_max:
        raise DegenerateAnnotationError(
            f"box around ({point.x}, {point.y}) collapsed to zero area"
        )
    clamped = (x_min != point.x - pad or y_min != point.y - pad
               or x_max != point.x + pad or y_max != point.y + pad)
    if clamped:
        warnings.warn(
            f"box around ({point.x}, {point.y}) clamped to image border",
            ClampedBoxWarning,
            stacklevel=2,
        )
    return BBox(x_min, y_min, x_max, y_max, int(point.hole_class))


# Band edges for the damaged-root fraction. The scoring scale's
# explicit bands leave gaps at (5%, 16%) and (33%, 67%); adjacent
# bands extend to the gap midpoints (10.5% and 50%) so the mapping
# is total.
_S3_UPPER = 0.105
_S5_UPPER = 0.50


def severity_from_fraction(fraction: float) -> SeverityScore:
    """Map the fraction of damaged roots in a plot to a severity score."""
    if not 0.0 <= fraction <= 1.0:
        raise InvalidParameterError(
            f"damaged fraction must be in [0, 1], got {fraction}"
        )
    if fraction == 0.0:
        return SeverityScore.S1
    if fraction <= _S3_UPPER:
        return SeverityScore.S3
    if fraction <= _S5_UPPER:
        return SeverityScore.S5
    if fraction < 1.0:
        return SeverityScore.S7
    return SeverityScore.S9


def format_labels(boxes: Iterable[BBox], dims: tuple[int, int]) -> str:
    """Render boxes as normalized label-file text."""
    width, height = dims
    if width <= 0 or height <= 0:
        raise InvalidParameterError(f"dims must be positive, got {dims}")
    lines = []
    for box in boxes:
        cx = (box.x_min + box.x_max) / 2.0 / width
        cy = (box.y_min + box.y_max) / 2.0 / height
        w = box.width / width
        h = box.height / height
        lines.append(f"{box.class_id} {cx:.6f} {cy:.6f} {w:.6f} {h:.6f}")
    return "".join(line + "\n" for line in lines)


def parse_labels(text: str, dims: tuple[int, int]) -> list[BBox]:
    """Parse label-file text back into pixel-coordinate boxes.

    Raises LabelParseError (with the line number) on malformed lines
    and on values outside [0, 1] / non-positive sizes.
    """
    width, height = dims
    if width <= 0 or height <= 0:
        raise InvalidParameterError(f"dims must be positive, got {dims}")
    boxes: list[BBox] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise LabelParseError(
                f"expected 5 fields, got {len(parts)}: {line!r}", number
            )
        try:
            class_id = int(parts[0])
            cx, cy, w, h = (float(p) for p in parts[1:])
        except ValueError as exc:
            raise LabelParseError(f"{exc}: {line!r}", number) from None
        for name, value in (("cx", cx), ("cy", cy), ("w", w), ("h", h)):
            if not 0.0 <= value <= 1.0:
                raise LabelParseError(
                    f"{name}={value} outside [0, 1]", number
                )
        if w <= 0 or h <= 0:
            raise LabelParseError(f"non-positive size w={w} h={h}", number)
        # Clamp the last-decimal rounding slack so border boxes written
        # at exactly 0 or 1 still satisfy the BBox invariants.
        x_min = max(0.0, (cx - w / 2.0) * width)
        y_min = max(0.0, (cy - h / 2.0) * height)
        x_max = min(float(width), (cx + w / 2.0) * width)
        y_max = min(float(height), (cy + h / 2.0) * height)
        boxes.append(BBox(x_min, y_min, x_max, y_max, class_id))
    return boxes


def write_labels(boxes: Sequence[BBox], dims: tuple[int, int],
                 path: str | Path) -> None:
    """Write boxes to a label file."""
    Path(path).write_text(format_labels(boxes, dims), encoding="utf-8")


def read_labels(path: str | Path, dims: tuple[int, int]) -> list[BBox]:
    """Read a label file into pixel-coordinate boxes."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise LabelParseError(f"not valid UTF-8: {exc}") from None
    return parse_labels(text, dims)
