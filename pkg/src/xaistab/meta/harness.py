"""Perfect Explanation Test (PET) and Random Output Test (ROT).

PET: exact explanations of a transparent tree; a sound robustness metric
must report perfect robustness (expected value 0).  ROT: Gaussian-noise
explanations and uniform-noise predictions; a sound metric must report
sensitivity bounded away from zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from xaistab.errors import ConfigurationError, DomainError
from xaistab.meta.randomness import RandomExplainer, RandomPredictor
from xaistab.meta.stats import confidence_interval
from xaistab.metrics.neighborhood import NeighborhoodSpec, sample_neighborhood
from xaistab.metrics.sensitivity import (
    METRICS,
    ExplainerHandle,
    evaluate_instances,
    instance_seed,
)
from xaistab.tree.model import RegressionTree

log = logging.getLogger(__name__)

PET_TOLERANCE = 1e-3
ROT_THRESHOLD = 0.1
PET_EXPECTED = 0.0
# nominal value printed for ROT so reports line up with the reference result tables
ROT_NOMINAL_EXPECTED = 1.0

_ROT_INPUT_STREAM = 0x524F54
_ROT_EXPLAINER_STREAM = 1
_ROT_PREDICTOR_STREAM = 2


@dataclass
class TestOutcome:
    __test__ = False  # not a pytest class

    test: str
    metric: str
    mode: str
    expected_value: float
    mean: float
    std: float
    ci_low: float
    ci_high: float
    n: int
    passed: bool
    config: dict = field(default_factory=dict)
    values: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "test": self.test,
            "metric": self.metric,
            "metric_name": METRICS.get(self.metric, self.metric),
            "mode": self.mode,
            "expected_value": self.expected_value,
            "mean": self.mean,
            "std": self.std,
            "ci": [self.ci_low, self.ci_high],
            "n": self.n,
            "passed": self.passed,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TestOutcome":
        return cls(
            test=data["test"],
            metric=data["metric"],
            mode=data["mode"],
            expected_value=data["expected_value"],
            mean=data["mean"],
            std=data["std"],
            ci_low=data["ci"][0],
            ci_high=data["ci"][1],
            n=data["n"],
            passed=data["passed"],
            config=data.get("config", {}),
        )


def pet_passed(mean: float, ci_low: float, ci_high: float, tolerance: float = PET_TOLERANCE) -> bool:
    return ci_low <= PET_EXPECTED <= ci_high and mean <= tolerance


def rot_passed(ci_low: float, threshold: float = ROT_THRESHOLD) -> bool:
    return ci_low > threshold


def _summary(values: np.ndarray, alpha: float):
    mean = float(values.mean())
    std = float(values.std(ddof=1))
    low, high = confidence_interval(values, alpha)
    # guard the ordering against last-ulp rounding on constant data
    return mean, std, min(low, mean), max(high, mean)


def _check_metrics(metrics):
    metrics = tuple(metrics)
    if not metrics:
        raise ConfigurationError("at least one metric is required")
    for m in metrics:
        if m not in METRICS:
            raise ConfigurationError(f"unknown metric {m!r}; available: {sorted(METRICS)}")
    return metrics


def tree_explainer(tree: RegressionTree, weighted: bool = False) -> ExplainerHandle:
    return ExplainerHandle(lambda X: tree.explain(X, weighted=weighted), name="tree-path-impurity",
                           deterministic=True, batched=True)


def path_changes(tree: RegressionTree, X, spec: NeighborhoodSpec, seed: int) -> dict:
    """How often a sampled neighbour leaves the instance's root-to-leaf path."""
    changed = 0
    instances = 0
    for i, x in enumerate(np.atleast_2d(X)):
        leaf = tree.apply(x)[0]
        leaves = tree.apply(sample_neighborhood(x, spec, instance_seed(seed, i)))
        k = int((leaves != leaf).sum())
        changed += k
        instances += k > 0
    total = len(X) * spec.n_samples
    return {
        "perturbed_samples": int(total),
        "path_changes": int(changed),
        "path_change_fraction": changed / total if total else 0.0,
        "instances_with_path_change": int(instances),
    }


def run_pet(
    tree: RegressionTree,
    eval_set,
    spec: NeighborhoodSpec,
    metrics=("max_sens", "avg_sens"),
    seed: int = 0,
    alpha: float = 0.05,
    mode: str = "raw",
    pet_tolerance: float = PET_TOLERANCE,
    weighted: bool = False,
    explainer=None,
    n_jobs: int = 1,
) -> list[TestOutcome]:
    """Evaluate each metric on the tree's exact explanations of ``eval_set``.

    ``explainer`` replaces the tree explainer (to check that a broken
    explainer is caught); the tree still serves as the predictor.
    """
    metrics = _check_metrics(metrics)
    X = np.atleast_2d(np.asarray(eval_set, dtype=np.float64))
    if len(X) < 2:
        raise DomainError("PET needs at least 2 evaluation instances")
    handle = explainer if explainer is not None else tree_explainer(tree, weighted)
    results = evaluate_instances(lambda i: (handle, tree.predict), X, spec, seed, metrics, mode, n_jobs)
    diagnostics = path_changes(tree, X, spec, seed)
    log.info("PET %s: %d instances, path-change fraction %.4g", mode, len(X), diagnostics["path_change_fraction"])
    outcomes = []
    for m in metrics:
        r = results[m]
        mean, std, low, high = _summary(r.per_instance, alpha)
        outcomes.append(
            TestOutcome(
                test="PET",
                metric=m,
                mode=mode,
                expected_value=PET_EXPECTED,
                mean=mean,
                std=std,
                ci_low=low,
                ci_high=high,
                n=r.n,
                passed=pet_passed(mean, low, high, pet_tolerance),
                config={
                    "neighborhood": spec.to_dict(),
                    "seed": int(seed),
                    "alpha": alpha,
                    "pet_tolerance": pet_tolerance,
                    "explainer": getattr(handle, "name", "explainer"),
                    "importance": "weighted" if weighted else "unweighted",
                    "diagnostics": diagnostics,
                },
                values=r.per_instance,
            )
        )
    return outcomes


def rot_inputs(input_shape, n_instances: int, seed: int, input_levels: int | None = 255) -> np.ndarray:
    """Random images with uniform pixels, flattened to ``(n_instances, d)``."""
    d = int(np.prod(input_shape))
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), _ROT_INPUT_STREAM]))
    if input_levels is None:
        return rng.random((n_instances, d))
    return rng.integers(0, input_levels + 1, size=(n_instances, d)) / input_levels


def run_rot(
    input_shape,
    n_instances: int,
    spec: NeighborhoodSpec,
    metrics=("max_sens", "avg_sens"),
    seed: int = 0,
    alpha: float = 0.05,
    explainer_mode: str = "stateless",
    mode: str = "raw",
    rot_threshold: float = ROT_THRESHOLD,
    key_levels: int | None = None,
    input_levels: int | None = 255,
    explainer_factory=None,
    n_jobs: int = 1,
) -> list[TestOutcome]:
    """Evaluate each metric on noise explanations of random inputs.

    A metric passes when its CI lies entirely above ``rot_threshold``, i.e.
    it detects the missing robustness.  ``explainer_factory(i)`` may supply
    a custom explainer for instance ``i``.
    """
    metrics = _check_metrics(metrics)
    if n_instances < 2:
        raise DomainError("ROT needs at least 2 instances")
    X = rot_inputs(input_shape, n_instances, seed, input_levels)

    def handles(i):
        if explainer_mode == "input_keyed":
            # one deterministic function shared by all instances
            ex_seed, pr_seed = (seed, _ROT_EXPLAINER_STREAM), (seed, _ROT_PREDICTOR_STREAM)
        else:
            ex_seed = np.random.SeedSequence([int(seed), _ROT_EXPLAINER_STREAM, i])
            pr_seed = np.random.SeedSequence([int(seed), _ROT_PREDICTOR_STREAM, i])
        predictor = RandomPredictor(explainer_mode, pr_seed, key_levels)
        if explainer_factory is not None:
            return explainer_factory(i), predictor
        ex = RandomExplainer(explainer_mode, ex_seed, key_levels)
        return ExplainerHandle(ex, name=ex.name, deterministic=ex.deterministic, batched=True), predictor

    results = evaluate_instances(handles, X, spec, seed, metrics, mode, n_jobs)
    outcomes = []
    for m in metrics:
        r = results[m]
        mean, std, low, high = _summary(r.per_instance, alpha)
        outcomes.append(
            TestOutcome(
                test="ROT",
                metric=m,
                mode=mode,
                expected_value=ROT_NOMINAL_EXPECTED,
                mean=mean,
                std=std,
                ci_low=low,
                ci_high=high,
                n=r.n,
                passed=rot_passed(low, rot_threshold),
                config={
                    "neighborhood": spec.to_dict(),
                    "seed": int(seed),
                    "alpha": alpha,
                    "rot_threshold": rot_threshold,
                    "explainer_mode": explainer_mode,
                    "key_levels": key_levels,
                    "input_levels": input_levels,
                    "n_features": int(X.shape[1]),
                    "custom_explainer": explainer_factory is not None,
                },
                values=r.per_instance,
            )
        )
    return outcomes
