"""Scene composition: quantized texture background plus geometric patterns.

Layout: the image holds a grid of square slots, one row per pattern kind
and ``max_count`` slots per row.  A sample with ``c`` squares fills ``c``
randomly chosen slots of the square row, each shape jittered inside its
slot.  Kind-dedicated rows keep the counting task learnable by an
axis-aligned tree at desk scale; the slot grid makes placements
non-overlapping by construction.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from xaistab.errors import ConfigurationError, GenerationError
from xaistab.sab.textures import TextureSpec, generate_texture


class PatternKind(enum.IntEnum):
    SQUARE = 1
    CROSS = 2
    CIRCLE = 3


BACKGROUND = 0
KINDS = tuple(PatternKind)


def square_raster(side: int) -> np.ndarray:
    return np.ones((side, side), dtype=bool)


def cross_raster(arm: int) -> np.ndarray:
    """Diagonal cross (an X) in an ``arm x arm`` box."""
    out = np.zeros((arm, arm), dtype=bool)
    idx = np.arange(arm)
    out[idx, idx] = True
    out[idx, arm - 1 - idx] = True
    return out


def circle_raster(radius: int) -> np.ndarray:
    r = np.arange(-radius, radius + 1)
    return (r[:, None] ** 2 + r[None, :] ** 2) <= radius * radius


@dataclass(frozen=True)
class ImageSpec:
    width: int = 16
    height: int = 16
    max_count: int = 3
    slot: int = 5
    jitter: bool = True
    square_side: int = 4
    cross_arm: int = 4
    circle_radius: int = 2
    foreground: float = 1.0
    # None keeps the texture continuous (affinely mapped into [0.1, 0.6]).
    background_levels: tuple[float, ...] | None = (0.1, 0.4)
    texture: TextureSpec = field(default_factory=TextureSpec)

    def __post_init__(self):
        if self.width < 8 or self.height < 8:
            raise ConfigurationError("image width and height must be >= 8")
        if self.max_count < 1:
            raise ConfigurationError("max_count must be >= 1")
        if self.slot < 1:
            raise ConfigurationError("slot size must be >= 1")
        for name, size in self.shape_sizes().items():
            if size > self.slot:
                raise ConfigurationError(f"{name} extent {size} exceeds slot size {self.slot}")
        if len(KINDS) * self.slot > self.height or self.max_count * self.slot > self.width:
            raise ConfigurationError(
                f"slot grid {len(KINDS)}x{self.max_count} of {self.slot}px does not fit "
                f"a {self.width}x{self.height} image"
            )
        levels = self.background_levels
        if levels is not None:
            if not levels or any(not 0.0 <= v < self.foreground for v in levels):
                raise ConfigurationError("background levels must lie in [0, foreground)")
            object.__setattr__(self, "background_levels", tuple(float(v) for v in levels))
        if not 0.6 < self.foreground <= 1.0:
            raise ConfigurationError("foreground intensity must lie in (0.6, 1]")

    @property
    def n_features(self) -> int:
        return self.width * self.height

    def shape_sizes(self) -> dict[str, int]:
        return {
            "square": self.square_side,
            "cross": self.cross_arm,
            "circle": 2 * self.circle_radius + 1,
        }

    def raster(self, kind: PatternKind) -> np.ndarray:
        if kind == PatternKind.SQUARE:
            return square_raster(self.square_side)
        if kind == PatternKind.CROSS:
            return cross_raster(self.cross_arm)
        return circle_raster(self.circle_radius)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "max_count": self.max_count,
            "slot": self.slot,
            "jitter": self.jitter,
            "square_side": self.square_side,
            "cross_arm": self.cross_arm,
            "circle_radius": self.circle_radius,
            "foreground": self.foreground,
            "background_levels": None if self.background_levels is None else list(self.background_levels),
            "texture": self.texture.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ImageSpec":
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown image keys: {sorted(unknown)}")
        if "texture" in data:
            data["texture"] = TextureSpec.from_dict(data["texture"])
        if data.get("background_levels") is not None:
            data["background_levels"] = tuple(data["background_levels"])
        return cls(**data)


def palette_margin(levels, foreground: float) -> float:
    """Smallest gap between a pixel level and any midpoint of two levels.

    Tree thresholds are midpoints of observed values, so on images whose
    pixels take only these levels, an L-inf perturbation smaller than this
    margin can never move a pixel across a split threshold.
    """
    values = sorted(set(float(v) for v in levels) | {float(foreground)})
    mids = [(a + b) / 2 for a, b in itertools.combinations(values, 2)]
    if not mids:
        return float("inf")
    return min(abs(m - v) for m in mids for v in values)


def compose_background(texture: np.ndarray, spec: ImageSpec) -> np.ndarray:
    """Map a [0, 1] texture onto the background intensity range."""
    levels = spec.background_levels
    if levels is None:
        out = 0.1 + 0.5 * texture
    else:
        bins = np.minimum((texture * len(levels)).astype(int), len(levels) - 1)
        out = np.asarray(levels, dtype=np.float64)[bins]
    return out.astype(np.float32)


def blank_kind_mask(spec: ImageSpec) -> np.ndarray:
    return np.zeros((spec.height, spec.width), dtype=np.int8)


def place_patterns(base: np.ndarray, requested_counts, seed, spec: ImageSpec | None = None):
    """Draw the requested number of each pattern onto a copy of ``base``.

    Returns ``(image, kind_mask)``; the mask is 0 on background and
    ``PatternKind`` values on pattern pixels.
    """
    spec = spec or ImageSpec(width=base.shape[1], height=base.shape[0])
    counts = [int(c) for c in requested_counts]
    if len(counts) != len(KINDS):
        raise ConfigurationError(f"expected {len(KINDS)} counts, got {len(counts)}")
    if base.shape != (spec.height, spec.width):
        raise ConfigurationError(f"base image shape {base.shape} does not match spec")
    if any(c < 0 or c > spec.max_count for c in counts):
        raise GenerationError(f"counts {counts} outside [0, {spec.max_count}]")

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    image = np.array(base, dtype=np.float32, copy=True)
    mask = blank_kind_mask(spec)
    for row, (kind, count) in enumerate(zip(KINDS, counts)):
        if count == 0:
            continue
        raster = spec.raster(kind)
        h, w = raster.shape
        slots = np.sort(rng.permutation(spec.max_count)[:count])
        for col in slots:
            dr = int(rng.integers(spec.slot - h + 1)) if spec.jitter else 0
            dc = int(rng.integers(spec.slot - w + 1)) if spec.jitter else 0
            r0 = row * spec.slot + dr
            c0 = int(col) * spec.slot + dc
            region = mask[r0 : r0 + h, c0 : c0 + w]
            if (region[raster] != BACKGROUND).any():
                raise GenerationError("pattern placement overlaps an existing pattern")
            region[raster] = int(kind)
            image[r0 : r0 + h, c0 : c0 + w][raster] = spec.foreground
    return image, mask


def render_scene(counts, spec: ImageSpec, rng: np.random.Generator):
    texture = generate_texture(spec.width, spec.height, spec.texture, rng)
    base = compose_background(texture, spec)
    return place_patterns(base, counts, rng, spec)
