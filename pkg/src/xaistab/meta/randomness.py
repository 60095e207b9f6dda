"""Noise explainers and predictors for the Random Output Test."""

from __future__ import annotations

import hashlib

import numpy as np

from xaistab.errors import ConfigurationError

RANDOM_MODES = ("stateless", "input_keyed")


def _key_bytes(x: np.ndarray, key_levels: int | None) -> bytes:
    if key_levels is None:
        return np.ascontiguousarray(x, dtype="<f8").tobytes()
    # snap to an n-level grid first: inputs that round alike share a key
    q = np.round(np.clip(x, 0.0, 1.0) * key_levels).astype("<u4")
    return q.tobytes()


def _keyed_rng(seed, x: np.ndarray, key_levels: int | None) -> np.random.Generator:
    salt = hashlib.sha256(repr(seed).encode()).digest()
    h = hashlib.blake2b(_key_bytes(x, key_levels), digest_size=16, key=salt)
    return np.random.default_rng(int.from_bytes(h.digest(), "little"))


class _RandomSource:
    def __init__(self, mode: str = "stateless", seed=0, key_levels: int | None = None):
        if mode not in RANDOM_MODES:
            raise ConfigurationError(f"unknown random mode {mode!r}; expected one of {RANDOM_MODES}")
        if key_levels is not None and key_levels < 1:
            raise ConfigurationError("key_levels must be >= 1")
        self.mode = mode
        self.seed = seed
        self.key_levels = key_levels
        self._rng = np.random.default_rng(seed) if mode == "stateless" else None

    def _draw(self, X: np.ndarray, size_of) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.mode == "stateless":
            return self._sample(self._rng, (X.shape[0],) + size_of(X))
        rows = [self._sample(_keyed_rng(self.seed, row, self.key_levels), size_of(X)) for row in X]
        return np.stack(rows)


class RandomExplainer(_RandomSource):
    """Gaussian-noise "explanation" with one N(mu, sigma) value per feature.

    stateless: every call draws fresh noise from an internal generator.
    input_keyed: the output is a pure function of (seed, input bytes); with
    ``key_levels`` the input is snapped to that many grey levels first.
    """

    mu = 0.0
    sigma = 1.0
    name = "gaussian-noise"
    deterministic = False

    def __init__(self, mode: str = "stateless", seed=0, key_levels: int | None = None):
        super().__init__(mode, seed, key_levels)
        self.deterministic = mode == "input_keyed"

    def _sample(self, rng, shape):
        return rng.normal(self.mu, self.sigma, size=shape)

    def __call__(self, X) -> np.ndarray:
        return self._draw(X, lambda A: (A.shape[1],))


class RandomPredictor(_RandomSource):
    """Uniform [0, 1) "prediction", with the same two determinism modes."""

    name = "uniform-noise"

    def _sample(self, rng, shape):
        return rng.random(shape)

    def __call__(self, X) -> np.ndarray:
        return self._draw(X, lambda A: ()).reshape(-1)
