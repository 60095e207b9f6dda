"""Synthetic attribution benchmark datasets and their on-disk format.

File layout (little-endian): magic ``SAB1``, u32 n_samples, u32 width,
u32 height, then float32 images (n*h*w), float32 targets (n), float32
attribution masks (n*h*w).  A JSON manifest next to the file records the
generating spec, seed and per-sample counts.
"""

from __future__ import annotations

import hashlib
import json
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from xaistab.errors import ConfigurationError, DomainError
from xaistab.sab.attribution import SSIN, AttributionFunction, gt_attribution_mask
from xaistab.sab.scene import KINDS, ImageSpec, render_scene

MAGIC = b"SAB1"
HEADER = struct.Struct("<4sIII")
MANIFEST_SUFFIX = ".json"


@dataclass
class SceneSample:
    image: np.ndarray  # (h, w) float32
    counts: tuple[int, ...]
    normalized_counts: np.ndarray
    target: float
    gt_attribution: np.ndarray  # (h, w) float64
    kind_mask: np.ndarray  # (h, w) int8


@dataclass
class Dataset:
    """Stacked arrays of one split, as read back from disk."""

    images: np.ndarray  # (n, h, w) float32
    targets: np.ndarray  # (n,) float32
    masks: np.ndarray  # (n, h, w) float32
    counts: np.ndarray | None = None  # (n, 3) int
    manifest: dict | None = None

    def __len__(self) -> int:
        return len(self.images)

    @property
    def width(self) -> int:
        return self.images.shape[2]

    @property
    def height(self) -> int:
        return self.images.shape[1]

    def features(self) -> np.ndarray:
        """Row-major flattened images as float64, shape ``(n, h*w)``."""
        return self.images.reshape(len(self.images), -1).astype(np.float64)


def flatten(image: np.ndarray) -> np.ndarray:
    return np.asarray(image).reshape(-1)


def unflatten(vector: np.ndarray, width: int, height: int) -> np.ndarray:
    vector = np.asarray(vector)
    if vector.size != width * height:
        raise DomainError(f"vector of length {vector.size} cannot be reshaped to {height}x{width}")
    return vector.reshape(height, width)


def sample_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream), int(index)]))


def generate_sample(index: int, spec: ImageSpec, fn: AttributionFunction, seed: int, stream: int = 0) -> SceneSample:
    rng = sample_rng(seed, stream, index)
    counts = tuple(int(c) for c in rng.integers(0, spec.max_count + 1, size=len(KINDS)))
    image, mask = render_scene(counts, spec, rng)
    g = np.asarray(counts, dtype=np.float64) / spec.max_count
    return SceneSample(
        image=image,
        counts=counts,
        normalized_counts=g,
        target=fn(g),
        gt_attribution=gt_attribution_mask(mask, g, fn),
        kind_mask=mask,
    )


def generate_dataset(
    n_samples: int,
    spec: ImageSpec,
    fn: AttributionFunction = SSIN,
    seed: int = 0,
    stream: int = 0,
    n_jobs: int = 1,
) -> list[SceneSample]:
    """Generate ``n_samples`` scenes; sample ``i`` depends only on (seed, stream, i)."""
    if n_samples < 1:
        raise ConfigurationError("n_samples must be >= 1")
    if len(fn.weights) != len(KINDS):
        raise ConfigurationError(f"attribution function needs {len(KINDS)} weights")

    def one(i):
        return generate_sample(i, spec, fn, seed, stream)

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            return list(pool.map(one, range(n_samples)))
    return [one(i) for i in range(n_samples)]


def stack(samples: list[SceneSample]) -> Dataset:
    return Dataset(
        images=np.stack([s.image for s in samples]).astype(np.float32),
        targets=np.array([s.target for s in samples], dtype=np.float32),
        masks=np.stack([s.gt_attribution for s in samples]).astype(np.float32),
        counts=np.array([s.counts for s in samples], dtype=np.int64),
    )


def encode(dataset: Dataset) -> bytes:
    n, h, w = dataset.images.shape
    parts = [
        HEADER.pack(MAGIC, n, w, h),
        np.ascontiguousarray(dataset.images, dtype="<f4").tobytes(),
        np.ascontiguousarray(dataset.targets, dtype="<f4").tobytes(),
        np.ascontiguousarray(dataset.masks, dtype="<f4").tobytes(),
    ]
    return b"".join(parts)


def decode(blob: bytes) -> Dataset:
    if len(blob) < HEADER.size:
        raise DomainError("truncated SAB1 file")
    magic, n, w, h = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise DomainError(f"bad magic {magic!r}, expected {MAGIC!r}")
    px = n * h * w
    expected = HEADER.size + 4 * (2 * px + n)
    if len(blob) != expected:
        raise DomainError(f"SAB1 size mismatch: {len(blob)} bytes, expected {expected}")
    off = HEADER.size
    images = np.frombuffer(blob, "<f4", px, off).reshape(n, h, w)
    off += 4 * px
    targets = np.frombuffer(blob, "<f4", n, off)
    off += 4 * n
    masks = np.frombuffer(blob, "<f4", px, off).reshape(n, h, w)
    return Dataset(images.astype(np.float32), targets.astype(np.float32), masks.astype(np.float32))


def manifest_path(path: Path) -> Path:
    return Path(path).with_suffix(Path(path).suffix + MANIFEST_SUFFIX)


def save_dataset(path, samples: list[SceneSample], spec: ImageSpec, fn: AttributionFunction, seed: int, stream: int = 0) -> str:
    """Write the SAB1 file plus its manifest; returns the file's SHA-256."""
    path = Path(path)
    ds = stack(samples)
    blob = encode(ds)
    path.write_bytes(blob)
    digest = hashlib.sha256(blob).hexdigest()
    manifest = {
        "format": "SAB1",
        "n_samples": len(samples),
        "width": spec.width,
        "height": spec.height,
        "seed": int(seed),
        "stream": int(stream),
        "image_spec": spec.to_dict(),
        "attribution": fn.to_dict(),
        "sha256": digest,
        "counts": [list(s.counts) for s in samples],
        "targets": [s.target for s in samples],
    }
    manifest_path(path).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return digest


def load_dataset(path) -> Dataset:
    path = Path(path)
    ds = decode(path.read_bytes())
    mpath = manifest_path(path)
    if mpath.exists():
        manifest = json.loads(mpath.read_text())
        ds.manifest = manifest
        ds.counts = np.asarray(manifest["counts"], dtype=np.int64).reshape(len(ds), -1)
    return ds
