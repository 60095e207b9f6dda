"""8-bit grayscale PNG export for images, masks and explanation heatmaps."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def to_uint8(values: np.ndarray, normalize: bool = False) -> np.ndarray:
    """Linear map of [0, 1] to [0, 255]; ``normalize`` divides by the max first."""
    arr = np.asarray(values, dtype=np.float64)
    if normalize:
        peak = np.abs(arr).max() if arr.size else 0.0
        arr = np.abs(arr) / peak if peak > 0 else np.zeros_like(arr)
    return np.round(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_png(values: np.ndarray, path, normalize: bool = False) -> Path:
    path = Path(path)
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
    Image.fromarray(to_uint8(arr, normalize), mode="L").save(path)
    return path
