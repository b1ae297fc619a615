"""Background removal: composite root images onto uniform black.

Masks arrive as single-channel image files produced by any external
segmentation source; pixels brighter than 127 count as foreground.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._io import load_grayscale
from .core import BBox
from .errors import EmptyForegroundError, ShapeError

FOREGROUND_THRESHOLD = 127


@dataclass(frozen=True)
class BinaryMask:
    """Per-pixel foreground bitmap matching a paired image exactly."""

    data: np.ndarray  # bool array of shape (H, W)

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ShapeError(f"mask must be 2-D, got shape {self.data.shape}")
        if self.data.dtype != np.bool_:
            object.__setattr__(self, "data", self.data.astype(bool))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_array(cls, array: np.ndarray) -> BinaryMask:
        """Threshold a grayscale array: values > 127 are foreground."""
        if array.ndim == 3:
            array = array.mean(axis=2)
        return cls(array > FOREGROUND_THRESHOLD)


def load_mask(path: str | Path) -> BinaryMask:
    """Load a mask image file and threshold it to a bitmap."""
    return BinaryMask.from_array(load_grayscale(path))


def apply_mask(image: np.ndarray, mask: BinaryMask) -> np.ndarray:
    """Keep pixels where the mask is set; everything else becomes (0,0,0).

    Grayscale inputs are promoted to RGB so the output contract is a
    single shape. Idempotent: masking a masked image changes nothing.
    """
    if image.ndim == 2:
        image = np.stack([image] * 3, axis=2)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ShapeError(f"expected HxW or HxWx3 image, got {image.shape}")
    if image.shape[:2] != mask.data.shape:
        raise ShapeError(
            f"image {image.shape[:2]} and mask {mask.data.shape} differ"
        )
    return np.where(mask.data[:, :, None], image, np.uint8(0))


def mask_bbox(mask: BinaryMask) -> BBox:
    """Tight closed-open bounds of the foreground pixels."""
    rows = np.flatnonzero(mask.data.any(axis=1))
    cols = np.flatnonzero(mask.data.any(axis=0))
    if rows.size == 0:
        raise EmptyForegroundError("mask has no foreground pixels")
    return BBox(
        float(cols[0]), float(rows[0]),
        float(cols[-1] + 1), float(rows[-1] + 1),
    )
