"""MAX- and AVG-Sensitivity of an explainer under sampled input perturbation."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from xaistab.errors import ConfigurationError, DomainError
from xaistab.metrics.neighborhood import NeighborhoodSpec, sample_neighborhood

MODES = ("raw", "relative", "pred_filtered")
METRICS = {
    "max_sens": "MAX-Sensitivity",
    "avg_sens": "AVG-Sensitivity",
}
# denominator guard for the relative mode
RELATIVE_FLOOR = 1e-12


@dataclass
class ExplainerHandle:
    """Wraps a callable that maps inputs to explanations.

    ``fn`` takes one feature vector, or a ``(n, d)`` batch when ``batched``.
    """

    fn: Callable
    name: str = "explainer"
    deterministic: bool = True
    batched: bool = False

    def explain_batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.batched:
            out = np.asarray(self.fn(X), dtype=np.float64)
        else:
            out = np.stack([np.asarray(self.fn(x), dtype=np.float64).ravel() for x in X])
        if out.ndim != 2 or out.shape[0] != X.shape[0]:
            raise DomainError(f"{self.name} returned shape {out.shape} for {X.shape[0]} inputs")
        return out

    def explain(self, x) -> np.ndarray:
        return self.explain_batch(np.asarray(x, dtype=np.float64).ravel()[None, :])[0]

    __call__ = explain


def as_handle(explainer) -> ExplainerHandle:
    if isinstance(explainer, ExplainerHandle):
        return explainer
    return ExplainerHandle(explainer, getattr(explainer, "__name__", "explainer"))


def frobenius_diff(e1, e2) -> float:
    """Frobenius norm of ``e1 - e2`` (the 2-norm of the flattened difference)."""
    a = np.asarray(e1, dtype=np.float64).ravel()
    b = np.asarray(e2, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DomainError(f"explanations differ in length: {a.size} vs {b.size}")
    diff = a - b
    return float(np.sqrt(np.dot(diff, diff)))


def _predict(predictor, X) -> np.ndarray:
    out = np.asarray(predictor(np.atleast_2d(X)), dtype=np.float64).ravel()
    if out.size != np.atleast_2d(X).shape[0]:
        raise DomainError("predictor must return one value per input row")
    return out


def explanation_distances(explainer, x, spec: NeighborhoodSpec, seed, mode: str = "raw", predictor=None) -> np.ndarray:
    """Distances ``||f(x_j) - f(x)||`` over the sampled neighbourhood of ``x``.

    raw: as is.  relative: divided by ``max(||f(x)||, 1e-12)``.
    pred_filtered: only neighbours with ``|h(x_j) - h(x)| < epsilon`` kept.
    """
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}; expected one of {MODES}")
    if mode == "pred_filtered" and predictor is None:
        raise ConfigurationError("pred_filtered mode needs a predictor")
    handle = as_handle(explainer)
    x = np.asarray(x, dtype=np.float64).ravel()
    samples = sample_neighborhood(x, spec, seed)
    e0 = handle.explain(x)
    E = handle.explain_batch(samples)
    if E.shape[1] != e0.size:
        raise DomainError("explanations of perturbed inputs differ in length from the original")
    diff = E - e0
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if mode == "relative":
        dist = dist / max(float(np.sqrt(np.dot(e0, e0))), RELATIVE_FLOOR)
    elif mode == "pred_filtered":
        h0 = _predict(predictor, x[None, :])[0]
        keep = np.abs(_predict(predictor, samples) - h0) < spec.epsilon
        dist = dist[keep]
    return dist


def reduce_distances(dist: np.ndarray, metric: str) -> float:
    """Collapse neighbourhood distances into one metric value (0 for an empty set)."""
    if metric not in METRICS:
        raise ConfigurationError(f"unknown metric {metric!r}; available: {sorted(METRICS)}")
    if dist.size == 0:
        return 0.0
    return float(dist.max() if metric == "max_sens" else dist.mean())


def max_sensitivity(explainer, x, spec: NeighborhoodSpec, seed, mode: str = "raw", predictor=None) -> float:
    """Largest explanation change over the sampled neighbourhood."""
    return reduce_distances(explanation_distances(explainer, x, spec, seed, mode, predictor), "max_sens")


def avg_sensitivity(explainer, x, spec: NeighborhoodSpec, seed, mode: str = "raw", predictor=None) -> float:
    """Mean explanation change over the sampled neighbourhood."""
    return reduce_distances(explanation_distances(explainer, x, spec, seed, mode, predictor), "avg_sens")


@dataclass
class SensitivityResult:
    per_instance: np.ndarray
    mean: float
    std: float
    n: int

    @classmethod
    def from_values(cls, values) -> "SensitivityResult":
        v = np.asarray(values, dtype=np.float64)
        std = float(v.std(ddof=1)) if v.size > 1 else 0.0
        return cls(v, float(v.mean()) if v.size else math.nan, std, int(v.size))


def instance_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), int(index)])


def evaluate_instances(
    handles: Callable[[int], tuple],
    X,
    spec: NeighborhoodSpec,
    seed: int,
    metrics=("max_sens", "avg_sens"),
    mode: str = "raw",
    n_jobs: int = 1,
) -> dict[str, SensitivityResult]:
    """Run every metric on every row of ``X``.

    ``handles(i)`` returns ``(explainer, predictor)`` for instance ``i``;
    instance ``i`` samples with sub-seed ``(seed, i)``, so results do not
    depend on ``n_jobs``.  All metrics share one neighbourhood per instance.
    """
    for m in metrics:
        if m not in METRICS:
            raise ConfigurationError(f"unknown metric {m!r}; available: {sorted(METRICS)}")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))

    def one(i):
        explainer, predictor = handles(i)
        dist = explanation_distances(explainer, X[i], spec, instance_seed(seed, i), mode, predictor)
        return [reduce_distances(dist, m) for m in metrics]

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            rows = list(pool.map(one, range(len(X))))
    else:
        rows = [one(i) for i in range(len(X))]
    table = np.asarray(rows, dtype=np.float64).reshape(len(X), len(metrics))
    return {m: SensitivityResult.from_values(table[:, j]) for j, m in enumerate(metrics)}
