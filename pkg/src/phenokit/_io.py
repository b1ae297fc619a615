"""File helpers: image loading/saving and atomic writes.

Output files are written to a temporary sibling then renamed, so an
interrupted run never leaves a truncated manifest or report behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any

import numpy as np
from PIL import Image

RASTER_SUFFIXES = (".png", ".jpg", ".jpeg")


def load_image(path: str | Path) -> np.ndarray:
    """Load a PNG/JPEG as an RGB uint8 array of shape (H, W, 3)."""
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def load_grayscale(path: str | Path) -> np.ndarray:
    """Load an image as a single-channel uint8 array of shape (H, W)."""
    with Image.open(path) as img:
        return np.asarray(img.convert("L"))


def save_image(array: np.ndarray, path: str | Path) -> None:
    """Save a uint8 array (HxW or HxWx3) atomically as PNG/JPEG."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=path.suffix)
    os.close(fd)
    try:
        Image.fromarray(array).save(tmp, format=_format_for(path))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _format_for(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix in (".jpg", ".jpeg"):
        return "JPEG"
    return "PNG"


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(path: str | Path, payload: Any) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def read_json(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)
