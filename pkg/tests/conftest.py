"""Shared fixture builders for synthetic root scenes."""

import numpy as np

from phenokit.core import BBox, HoleClass


def build_blob_scene(width=2000, height=1500, n_blobs=12, blob_side=10,
                     seed=101, n_decoys=4):
    """Synthetic root image for end-to-end runs.

    A bright rectangular "root" region sits inside the frame; dark
    square holes are planted inside it with generous spacing, and dark
    decoys are planted outside the region so masking provably removes
    them. Returns (image, mask_bitmap, planted_boxes).
    """
    rng = np.random.default_rng(seed)
    image = np.full((height, width, 3), 120, dtype=np.uint8)
    mask = np.zeros((height, width), dtype=bool)
    top, bottom = height // 6, height - height // 6
    left, right = width // 6, width - width // 6
    mask[top:bottom, left:right] = True
    image[mask] = 190

    planted = []
    margin = 30
    attempts = 0
    while len(planted) < n_blobs:
        attempts += 1
        assert attempts < 10_000, "could not place blobs"
        x = int(rng.integers(left + margin, right - margin - blob_side))
        y = int(rng.integers(top + margin, bottom - margin - blob_side))
        candidate = BBox(x, y, x + blob_side, y + blob_side,
                         int(HoleClass.NO_FECAL))
        if any(abs(candidate.x_min - b.x_min) < 4 * blob_side
               and abs(candidate.y_min - b.y_min) < 4 * blob_side
               for b in planted):
            continue
        planted.append(candidate)
        image[y:y + blob_side, x:x + blob_side] = 30

    # dark decoys outside the root region: masking must erase them
    for i in range(n_decoys):
        x = 10 + i * (blob_side + 20)
        y = 10
        image[y:y + blob_side, x:x + blob_side] = 25

    return image, mask, planted
