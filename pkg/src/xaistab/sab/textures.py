"""Procedural background textures.

Every generator returns a float64 array of shape ``(height, width)`` with
values in [0, 1] and is a pure function of its spec and seed.  The
``directory`` family loads grayscale crops from user-supplied image files
instead, so that real texture photographs can be plugged in.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from xaistab.errors import ConfigurationError

FAMILIES = ("grating", "value_noise", "checker", "directory", "mixed")
PROCEDURAL = ("grating", "value_noise", "checker")
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".gif")


@dataclass(frozen=True)
class TextureSpec:
    """Texture family plus its parameters.

    Parameters left as ``None`` are drawn from the seed, which is how the
    ``mixed`` family varies backgrounds from sample to sample.
    """

    family: str = "mixed"
    period: float | None = None
    angle: float | None = None
    cell: int | None = None
    directory: str | None = None
    params: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(
                f"unknown texture family {self.family!r}; expected one of {FAMILIES}"
            )
        if self.family == "directory" and not self.directory:
            raise ConfigurationError("texture family 'directory' needs a directory path")
        if self.period is not None and self.period <= 0:
            raise ConfigurationError("texture period must be positive")
        if self.cell is not None and self.cell < 1:
            raise ConfigurationError("value-noise cell size must be >= 1")

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "period": self.period,
            "angle": self.angle,
            "cell": self.cell,
            "directory": self.directory,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TextureSpec":
        known = {"family", "period", "angle", "cell", "directory"}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown texture keys: {sorted(unknown)}")
        return cls(**data)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def grating(width: int, height: int, period: float, angle: float, phase: float) -> np.ndarray:
    rows, cols = np.mgrid[0:height, 0:width]
    proj = cols * math.cos(angle) + rows * math.sin(angle)
    return 0.5 + 0.5 * np.sin(2.0 * math.pi * proj / period + phase)


def value_noise(width: int, height: int, cell: int, rng: np.random.Generator) -> np.ndarray:
    """Lattice of uniform values, bilinearly interpolated between knots."""
    gh = height // cell + 2
    gw = width // cell + 2
    knots = rng.random((gh, gw))
    ys = np.arange(height) / cell
    xs = np.arange(width) / cell
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    a = knots[np.ix_(y0, x0)]
    b = knots[np.ix_(y0, x0 + 1)]
    c = knots[np.ix_(y0 + 1, x0)]
    d = knots[np.ix_(y0 + 1, x0 + 1)]
    top = a * (1 - fx) + b * fx
    bottom = c * (1 - fx) + d * fx
    return top * (1 - fy) + bottom * fy


def checker(width: int, height: int, period: int) -> np.ndarray:
    rows, cols = np.mgrid[0:height, 0:width]
    parity = (rows // period + cols // period) % 2
    return np.where(parity == 0, 0.25, 0.75)


@functools.lru_cache(maxsize=8)
def _directory_images(directory: str) -> tuple[np.ndarray, ...]:
    from PIL import Image

    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"texture directory not found: {directory}")
    files = sorted(p for p in root.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise FileNotFoundError(f"no image files in texture directory: {directory}")
    images = []
    for path in files:
        with Image.open(path) as im:
            images.append(np.asarray(im.convert("L"), dtype=np.float64) / 255.0)
    return tuple(images)


def from_directory(width: int, height: int, directory: str, rng: np.random.Generator) -> np.ndarray:
    """Random crop from a random image in ``directory`` (resized up if too small)."""
    images = _directory_images(str(directory))
    img = images[int(rng.integers(len(images)))]
    h, w = img.shape
    if h < height or w < width:
        from PIL import Image

        scale = max(height / h, width / w)
        size = (max(width, math.ceil(w * scale)), max(height, math.ceil(h * scale)))
        pil = Image.fromarray(np.round(img * 255).astype(np.uint8)).resize(size, Image.BILINEAR)
        img = np.asarray(pil, dtype=np.float64) / 255.0
        h, w = img.shape
    r0 = int(rng.integers(h - height + 1))
    c0 = int(rng.integers(w - width + 1))
    return img[r0 : r0 + height, c0 : c0 + width].copy()


def generate_texture(width: int, height: int, spec: TextureSpec, seed) -> np.ndarray:
    """Render one texture of shape ``(height, width)`` with values in [0, 1]."""
    if width < 8 or height < 8:
        raise ConfigurationError("texture width and height must be >= 8")
    rng = _rng(seed)
    family = spec.family
    if family == "mixed":
        family = PROCEDURAL[int(rng.integers(len(PROCEDURAL)))]

    if family == "grating":
        period = spec.period if spec.period is not None else float(rng.uniform(3.0, 8.0))
        angle = spec.angle if spec.angle is not None else float(rng.uniform(0.0, math.pi))
        phase = float(rng.uniform(0.0, 2.0 * math.pi))
        out = grating(width, height, period, angle, phase)
    elif family == "value_noise":
        cell = spec.cell if spec.cell is not None else int(rng.choice([2, 3, 4]))
        out = value_noise(width, height, cell, rng)
    elif family == "checker":
        period = int(spec.period) if spec.period is not None else int(rng.choice([2, 3, 4]))
        out = checker(width, height, period)
    elif family == "directory":
        out = from_directory(width, height, spec.directory, rng)
    else:  # pragma: no cover - guarded by TextureSpec
        raise ConfigurationError(f"unknown texture family {family!r}")
    return np.clip(out, 0.0, 1.0)
