"""Deterministic slicing of large images into overlapping fixed-size tiles.

Stride is floor(tile_size * (1 - overlap_ratio)); the final tile on each
axis is clamped to end exactly at the image edge (coverage is duplicated
rather than padded with black). Tiles are ordered row-major from the
top-left corner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from ._io import atomic_write_json, read_json
from .core import BBox, Detection, require_fraction
from .errors import (
    InvalidParameterError,
    OutOfBoundsError,
    ShapeError,
    ValidationError,
)

DEFAULT_TILE_SIZE = 384
DEFAULT_OVERLAP_RATIO = 0.2
DEFAULT_MIN_VISIBILITY = 0.5


@dataclass(frozen=True)
class TileSpec:
    """One tile: grid index, global pixel offset, and extent."""

    row: int
    col: int
    ox: int
    oy: int
    width: int
    height: int

    def __post_init__(self):
        if self.ox < 0 or self.oy < 0:
            raise ValidationError(f"tile offsets must be >= 0: {self}")
        if self.width <= 0 or self.height <= 0:
            raise ValidationError(f"tile extent must be positive: {self}")


@dataclass(frozen=True)
class TileGrid:
    """The slicing plan for one image."""

    image_width: int
    image_height: int
    tile_size: int
    overlap_ratio: float
    tiles: tuple[TileSpec, ...]


def _axis_offsets(dim: int, tile: int, stride: int) -> list[int]:
    offsets = []
    position = 0
    while True:
        if position + tile >= dim:
            offsets.append(min(position, dim - tile))
            return offsets
        offsets.append(position)
        position += stride


def plan_tiles(dims: tuple[int, int], tile_size: int = DEFAULT_TILE_SIZE,
               overlap_ratio: float = DEFAULT_OVERLAP_RATIO) -> TileGrid:
    """Plan the overlapping tile grid for an image.

    Offsets advance by the stride until a tile would cross the image
    edge; that tile is clamped so it ends exactly at the edge. Images
    smaller than tile_size on an axis get a single tile shrunk to the
    image extent on that axis.
    """
    width, height = dims
    if width < 1 or height < 1:
        raise InvalidParameterError(f"dims must be >= 1x1, got {dims}")
    if tile_size <= 0:
        raise InvalidParameterError(f"tile_size must be > 0, got {tile_size}")
    require_fraction(overlap_ratio, "overlap_ratio", high_open=True)
    stride = max(1, math.floor(tile_size * (1.0 - overlap_ratio)))
    tile_w = min(tile_size, width)
    tile_h = min(tile_size, height)
    xs = _axis_offsets(width, tile_w, stride)
    ys = _axis_offsets(height, tile_h, stride)
    tiles = tuple(
        TileSpec(row, col, ox, oy, tile_w, tile_h)
        for row, oy in enumerate(ys)
        for col, ox in enumerate(xs)
    )
    return TileGrid(width, height, tile_size, overlap_ratio, tiles)


def clip_annotations(boxes: Sequence[BBox], tile: TileSpec,
                     min_visibility: float = DEFAULT_MIN_VISIBILITY) -> list[BBox]:
    """Intersect global boxes with a tile and shift them tile-local.

    Boxes keeping less than min_visibility of their original area after
    clipping are dropped (a hole mostly outside the tile is not a
    usable training example there).
    """
    require_fraction(min_visibility, "min_visibility", low_open=True)
    clipped: list[BBox] = []
    for box in boxes:
        x_min = max(box.x_min, tile.ox)
        y_min = max(box.y_min, tile.oy)
        x_max = min(box.x_max, tile.ox + tile.width)
        y_max = min(box.y_max, tile.oy + tile.height)
        if x_min >= x_max or y_min >= y_max:
            continue
        visible = (x_max - x_min) * (y_max - y_min) / box.area
        if visible < min_visibility:
            continue
        clipped.append(BBox(
            x_min - tile.ox, y_min - tile.oy,
            x_max - tile.ox, y_max - tile.oy,
            box.class_id,
        ))
    return clipped


def filter_empty(grid: TileGrid,
                 annotations: Sequence[Sequence[BBox]]) -> TileGrid:
    """Restrict the grid to tiles that carry at least one annotation.

    Tile indices and order are preserved so tile keys stay stable.
    """
    if len(annotations) != len(grid.tiles):
        raise ShapeError(
            f"{len(annotations)} annotation lists for {len(grid.tiles)} tiles"
        )
    kept = tuple(
        tile for tile, boxes in zip(grid.tiles, annotations) if len(boxes) > 0
    )
    return replace(grid, tiles=kept)


def tile_to_global(detection: Detection, tile: TileSpec) -> Detection:
    """Remap a tile-local detection into global image coordinates."""
    box = detection.box
    if box.x_max > tile.width or box.y_max > tile.height:
        raise OutOfBoundsError(
            f"box {box} exceeds tile extent {tile.width}x{tile.height}"
        )
    return replace(detection, box=box.translate(tile.ox, tile.oy))


def crop_tile(image: np.ndarray, tile: TileSpec) -> np.ndarray:
    """Extract the tile's pixels from the full image."""
    if image.shape[0] < tile.oy + tile.height or image.shape[1] < tile.ox + tile.width:
        raise ShapeError(
            f"image {image.shape[:2]} too small for tile {tile}"
        )
    return image[tile.oy:tile.oy + tile.height, tile.ox:tile.ox + tile.width]


def tile_key(source_image: str, row: int, col: int) -> str:
    """Stable identifier used by prediction manifests: image#r<row>c<col>."""
    return f"{source_image}#r{row}c{col}"


def tile_name(stem: str, row: int, col: int) -> str:
    """File name convention for tile rasters."""
    return f"{stem}_r{row}_c{col}.png"


def manifest_entry(source_image: str, tile: TileSpec,
                   tile_path: str | None = None,
                   label_path: str | None = None) -> dict[str, Any]:
    """One tile manifest record."""
    return {
        "source_image": source_image,
        "row": tile.row,
        "col": tile.col,
        "ox": tile.ox,
        "oy": tile.oy,
        "w": tile.width,
        "h": tile.height,
        "tile_path": tile_path,
        "label_path": label_path,
    }


def entry_tile(entry: dict[str, Any]) -> TileSpec:
    return TileSpec(
        entry["row"], entry["col"], entry["ox"], entry["oy"],
        entry["w"], entry["h"],
    )


def entry_key(entry: dict[str, Any]) -> str:
    return tile_key(entry["source_image"], entry["row"], entry["col"])


def write_tile_manifest(entries: Sequence[dict[str, Any]],
                        path: str | Path) -> None:
    atomic_write_json(path, list(entries))


def read_tile_manifest(path: str | Path) -> list[dict[str, Any]]:
    entries = read_json(path)
    if not isinstance(entries, list):
        raise ValidationError("tile manifest must be a JSON array")
    return entries
