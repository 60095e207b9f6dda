"""Monte-Carlo sampling of an epsilon-neighbourhood around an input."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from xaistab.errors import ConfigurationError

NORMS = ("linf", "l2")


@dataclass(frozen=True)
class NeighborhoodSpec:
    epsilon: float = 0.1
    n_samples: int = 50
    norm: str = "linf"
    clip_to_domain: bool = True

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigurationError("epsilon must be > 0")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ConfigurationError("n_samples must be an integer >= 1")
        if self.norm not in NORMS:
            raise ConfigurationError(f"unknown norm {self.norm!r}; expected one of {NORMS}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "NeighborhoodSpec":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"unknown neighborhood keys: {sorted(unknown)}")
        return cls(**data)


def seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def perturbations(d: int, spec: NeighborhoodSpec, seed) -> np.ndarray:
    """Offsets of shape ``(n_samples, d)``, each strictly inside the epsilon ball.

    Draws are prefix-consistent: the first ``k`` rows for ``n_samples = m``
    equal the rows for ``n_samples = k`` under the same seed.
    """
    ss = seed_sequence(seed)
    n, eps = int(spec.n_samples), float(spec.epsilon)
    if spec.norm == "linf":
        delta = np.random.default_rng(ss).uniform(-eps, eps, size=(n, d))
        # uniform() is half-open; keep the lower face excluded as well
        delta[delta <= -eps] = 0.0
        return delta
    dir_ss, rad_ss = ss.spawn(2)
    g = np.random.default_rng(dir_ss).standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radius = np.random.default_rng(rad_ss).uniform(0.0, eps, size=(n, 1))
    return g / norms * radius


def sample_neighborhood(x, spec: NeighborhoodSpec, seed) -> np.ndarray:
    """``n_samples`` perturbed copies of ``x`` drawn from the epsilon ball.

    linf: every coordinate moves by Uniform(-eps, eps).  l2: a uniform
    direction scaled by a Uniform(0, eps) radius.  With ``clip_to_domain``
    the result is clamped to [0, 1] afterwards.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    out = x + perturbations(x.size, spec, seed)
    if spec.clip_to_domain:
        np.clip(out, 0.0, 1.0, out=out)
    return out
