"""Attribution functions: labels of the form ``sum_j w_j * g_j`` transformed.

Patterns are ordered square, cross, circle, so ``weights[0]`` belongs to
squares.  ``g_j`` is the normalized count of pattern ``j`` in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from xaistab.errors import DomainError, InconsistencyError

SSIN_WEIGHTS = (0.55, 0.27, 0.18)


@dataclass(frozen=True)
class AttributionFunction:
    name: str
    weights: tuple[float, ...]

    def __post_init__(self):
        if self.name not in ("ssin", "linear"):
            raise DomainError(f"unknown attribution function {self.name!r}")
        if not self.weights or any(w <= 0 for w in self.weights):
            raise DomainError("attribution weights must be strictly positive")

    def terms(self, g) -> np.ndarray:
        """Per-pattern contributions; they sum to the label."""
        g = _check_unit(g, len(self.weights))
        w = np.asarray(self.weights, dtype=np.float64)
        if self.name == "ssin":
            return w * np.sin(0.5 * math.pi * g)
        return w * g

    def __call__(self, g):
        t = self.terms(g)
        return float(t.sum()) if t.ndim == 1 else t.sum(axis=-1)

    def to_dict(self) -> dict:
        return {"name": self.name, "weights": list(self.weights)}

    @classmethod
    def from_dict(cls, data: dict) -> "AttributionFunction":
        return cls(name=data["name"], weights=tuple(float(w) for w in data["weights"]))


SSIN = AttributionFunction("ssin", SSIN_WEIGHTS)
LINEAR = AttributionFunction("linear", SSIN_WEIGHTS)


def _check_unit(g, n: int) -> np.ndarray:
    g = np.asarray(g, dtype=np.float64)
    if g.shape[-1:] != (n,):
        raise DomainError(f"expected {n} normalized counts, got shape {g.shape}")
    if np.isnan(g).any() or (g < 0).any() or (g > 1).any():
        raise DomainError("normalized counts must lie in [0, 1]")
    return g


def ssin(g) -> float | np.ndarray:
    """``sum_j w_j sin(pi/2 * g_j)`` with weights 0.55, 0.27, 0.18.

    Accepts a length-3 vector or a ``(..., 3)`` array.

    >>> ssin([1.0, 0.0, 0.0])
    0.55
    """
    return SSIN(g)


def gt_attribution_mask(kind_mask: np.ndarray, normalized_counts, fn: AttributionFunction = SSIN) -> np.ndarray:
    """Spread each pattern's term uniformly over the pixels drawn for it.

    ``kind_mask`` holds 0 for background and ``j + 1`` for pattern ``j``.
    The mask restricted to pattern ``j`` sums to ``fn.terms(g)[j]``.
    """
    terms = fn.terms(normalized_counts)
    g = np.asarray(normalized_counts, dtype=np.float64)
    out = np.zeros(kind_mask.shape, dtype=np.float64)
    for j, term in enumerate(terms):
        pixels = kind_mask == j + 1
        n_j = int(pixels.sum())
        if g[j] > 0 and n_j == 0:
            raise InconsistencyError(f"pattern {j} has count > 0 but no pixels in the mask")
        if g[j] == 0 and n_j > 0:
            raise InconsistencyError(f"pattern {j} has pixels in the mask but a zero count")
        if n_j:
            out[pixels] = term / n_j
    return out
