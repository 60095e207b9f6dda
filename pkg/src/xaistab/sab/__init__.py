"""Synthetic attribution benchmark: textured scenes with known labels and attributions."""

from xaistab.sab.attribution import (
    LINEAR,
    SSIN,
    SSIN_WEIGHTS,
    AttributionFunction,
    gt_attribution_mask,
    ssin,
)
from xaistab.sab.dataset import (
    Dataset,
    SceneSample,
    flatten,
    generate_dataset,
    generate_sample,
    load_dataset,
    save_dataset,
    unflatten,
)
from xaistab.sab.scene import (
    BACKGROUND,
    ImageSpec,
    PatternKind,
    compose_background,
    palette_margin,
    place_patterns,
)
from xaistab.sab.textures import TextureSpec, generate_texture

__all__ = [
    "AttributionFunction",
    "BACKGROUND",
    "Dataset",
    "ImageSpec",
    "LINEAR",
    "PatternKind",
    "SSIN",
    "SSIN_WEIGHTS",
    "SceneSample",
    "TextureSpec",
    "compose_background",
    "flatten",
    "generate_dataset",
    "generate_sample",
    "generate_texture",
    "gt_attribution_mask",
    "load_dataset",
    "palette_margin",
    "place_patterns",
    "save_dataset",
    "ssin",
    "unflatten",
]
