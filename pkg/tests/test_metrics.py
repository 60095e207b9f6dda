import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from xaistab.errors import ConfigurationError, DomainError
from xaistab.metrics import (
    ExplainerHandle,
    NeighborhoodSpec,
    avg_sensitivity,
    evaluate_instances,
    explanation_distances,
    frobenius_diff,
    mae,
    max_sensitivity,
    mse,
    perturbations,
    sample_neighborhood,
)
from xaistab.metrics.export import CSV_COLUMNS, format_csv, per_instance_rows

from oracles import grid_reference_l2, grid_reference_linf


def linear(A):
    A = np.asarray(A, dtype=float)
    return lambda x: A @ np.asarray(x)


# neighbourhood sampling ------------------------------------------------------

@pytest.mark.parametrize("norm", ["linf", "l2"])
def test_tiny_epsilon_bound(norm):
    x = np.random.default_rng(0).random(64)
    spec = NeighborhoodSpec(epsilon=1e-12, n_samples=200, norm=norm)
    S = sample_neighborhood(x, spec, 1)
    dist = np.abs(S - x).max(axis=1) if norm == "linf" else np.linalg.norm(S - x, axis=1)
    # allow a few ulps of x for the rounding in x + delta
    assert dist.max() <= 1e-12 + 4 * np.spacing(1.0)


def test_linf_coordinates_uniform():
    spec = NeighborhoodSpec(epsilon=0.1, n_samples=4000)
    delta = perturbations(3, spec, 7)
    for j in range(3):
        assert stats.kstest(delta[:, j], stats.uniform(-0.1, 0.2).cdf).pvalue > 0.001
    assert np.abs(delta).max() < 0.1


def test_l2_radius_and_direction():
    spec = NeighborhoodSpec(epsilon=0.2, n_samples=4000, norm="l2")
    delta = perturbations(2, spec, 3)
    r = np.linalg.norm(delta, axis=1)
    assert stats.kstest(r, stats.uniform(0, 0.2).cdf).pvalue > 0.001
    angle = np.arctan2(delta[:, 1], delta[:, 0])
    assert stats.kstest(angle, stats.uniform(-math.pi, 2 * math.pi).cdf).pvalue > 0.001


@pytest.mark.parametrize("norm", ["linf", "l2"])
def test_prefix_consistent(norm):
    a = perturbations(5, NeighborhoodSpec(n_samples=10, norm=norm), 42)
    b = perturbations(5, NeighborhoodSpec(n_samples=50, norm=norm), 42)
    np.testing.assert_array_equal(a, b[:10])


def test_clipped_to_unit_box():
    x = np.array([0.0, 1.0, 0.05, 0.95])
    S = sample_neighborhood(x, NeighborhoodSpec(epsilon=0.1, n_samples=500), 0)
    assert S.min() >= 0.0 and S.max() <= 1.0
    raw = sample_neighborhood(x, NeighborhoodSpec(epsilon=0.1, n_samples=500, clip_to_domain=False), 0)
    assert raw.min() < 0.0 and raw.max() > 1.0


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        NeighborhoodSpec(epsilon=0)
    with pytest.raises(ConfigurationError):
        NeighborhoodSpec(n_samples=0)
    with pytest.raises(ConfigurationError):
        NeighborhoodSpec(norm="l1")


# sensitivity ----------------------------------------------------------------

def test_frobenius():
    assert frobenius_diff([1.0, 0.0], [0.0, 1.0]) == pytest.approx(math.sqrt(2), abs=1e-15)
    assert frobenius_diff(np.ones((2, 2)), np.zeros((2, 2))) == 2.0
    with pytest.raises(DomainError):
        frobenius_diff([1.0], [1.0, 2.0])


def test_matches_naive_loop():
    rng = np.random.default_rng(4)
    A = rng.normal(size=(6, 6))
    f = linear(A)
    x = rng.random(6)
    spec = NeighborhoodSpec(epsilon=0.05, n_samples=30)
    S = sample_neighborhood(x, spec, 9)
    ref = []
    for s in S:
        diff = f(s) - f(x)
        ref.append(math.sqrt(sum(v * v for v in diff)))
    assert max_sensitivity(f, x, spec, 9) == pytest.approx(max(ref), rel=1e-12)
    assert avg_sensitivity(f, x, spec, 9) == pytest.approx(sum(ref) / len(ref), rel=1e-12)


def test_constant_explainer_is_zero():
    f = lambda x: np.ones(4)
    x = np.full(4, 0.5)
    spec = NeighborhoodSpec()
    for mode in ("raw", "relative"):
        assert max_sensitivity(f, x, spec, 0, mode) == 0.0
        assert avg_sensitivity(f, x, spec, 0, mode) == 0.0


def test_dominance_over_many_pairs():
    rng = np.random.default_rng(123)
    spec = NeighborhoodSpec(epsilon=0.1, n_samples=20)
    for k in range(1000):
        A = rng.normal(size=(3, 3)) * rng.random()
        x = rng.random(3)
        f = linear(A) if k % 2 else (lambda z, A=A: np.tanh(A @ z))
        d = explanation_distances(f, x, spec, k)
        assert d.mean() <= d.max() + 1e-15
        assert avg_sensitivity(f, x, spec, k) <= max_sensitivity(f, x, spec, k)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["raw", "relative", "pred_filtered"]))
def test_dominance_property(seed, mode):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(4, 4))
    x = rng.random(4)
    spec = NeighborhoodSpec(epsilon=0.2, n_samples=15)
    h = lambda X: np.atleast_2d(X).sum(axis=1) * 0.1
    assert avg_sensitivity(linear(A), x, spec, seed, mode, h) <= max_sensitivity(linear(A), x, spec, seed, mode, h)


@pytest.mark.parametrize("A", [np.eye(2), [[1.0, 2.0], [0.0, 1.0]], [[0.3, -0.7], [1.1, 0.4]]])
def test_linf_grid_oracle(A):
    x = np.array([0.5, 0.5])
    spec = NeighborhoodSpec(epsilon=0.1, n_samples=10_000)
    ref_max, ref_avg = grid_reference_linf(A, 0.1)
    assert max_sensitivity(linear(A), x, spec, 0) == pytest.approx(ref_max, rel=0.05)
    assert avg_sensitivity(linear(A), x, spec, 0) == pytest.approx(ref_avg, rel=0.05)


def test_identity_linf_max_is_corner():
    ref_max, _ = grid_reference_linf(np.eye(2), 0.1)
    assert ref_max == pytest.approx(math.sqrt(2) * 0.1, rel=1e-12)


@pytest.mark.parametrize("A", [np.eye(2), [[1.0, 2.0], [0.0, 1.0]]])
def test_l2_grid_oracle(A):
    x = np.array([0.5, 0.5])
    spec = NeighborhoodSpec(epsilon=0.1, n_samples=10_000, norm="l2")
    ref_max, ref_avg = grid_reference_l2(A, 0.1)
    assert max_sensitivity(linear(A), x, spec, 0) == pytest.approx(ref_max, rel=0.05)
    assert avg_sensitivity(linear(A), x, spec, 0) == pytest.approx(ref_avg, rel=0.05)


def test_relative_mode():
    A = 3.0 * np.eye(2)
    x = np.array([0.5, 0.5])
    spec = NeighborhoodSpec(n_samples=40)
    raw = max_sensitivity(linear(A), x, spec, 2, "raw")
    rel = max_sensitivity(linear(A), x, spec, 2, "relative")
    assert rel == pytest.approx(raw / np.linalg.norm(A @ x), rel=1e-12)


def test_relative_zero_explanation_uses_floor():
    f = lambda z: (z - 0.5) * 1e-13
    d = explanation_distances(f, np.array([0.5]), NeighborhoodSpec(n_samples=5), 0, "relative")
    assert (d > 0).all() and np.isfinite(d).all()


def test_pred_filtered():
    f = linear(np.eye(2))
    x = np.array([0.5, 0.5])
    spec = NeighborhoodSpec(n_samples=40)
    flat = lambda X: np.zeros(len(np.atleast_2d(X)))
    assert max_sensitivity(f, x, spec, 1, "pred_filtered", flat) == max_sensitivity(f, x, spec, 1)
    jumpy = lambda X: np.where(np.atleast_2d(X)[:, 0] == 0.5, 0.0, 1.0)
    assert max_sensitivity(f, x, spec, 1, "pred_filtered", jumpy) == 0.0
    assert avg_sensitivity(f, x, spec, 1, "pred_filtered", jumpy) == 0.0
    with pytest.raises(ConfigurationError):
        max_sensitivity(f, x, spec, 1, "pred_filtered")


def test_unknown_mode():
    with pytest.raises(ConfigurationError):
        max_sensitivity(lambda z: z, np.zeros(2), NeighborhoodSpec(), 0, "bogus")


def test_explainer_shape_check():
    bad = ExplainerHandle(lambda X: np.zeros((1, 2)), batched=True)
    with pytest.raises(DomainError):
        max_sensitivity(bad, np.zeros(2), NeighborhoodSpec(n_samples=3), 0)


def test_evaluate_instances_thread_independent():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(5, 5))
    X = rng.random((30, 5))
    handle = ExplainerHandle(lambda B: B @ A.T, batched=True)
    a = evaluate_instances(lambda i: (handle, None), X, NeighborhoodSpec(), 7)
    b = evaluate_instances(lambda i: (handle, None), X, NeighborhoodSpec(), 7, n_jobs=4)
    for m in ("max_sens", "avg_sens"):
        np.testing.assert_array_equal(a[m].per_instance, b[m].per_instance)
    assert a["max_sens"].n == 30
    with pytest.raises(ConfigurationError):
        evaluate_instances(lambda i: (handle, None), X, NeighborhoodSpec(), 7, metrics=("lipschitz",))


# performance and export ---------------------------------------------------------

def test_mae_mse():
    assert mae([0.0, 1.0], [0.5, 0.5]) == 0.5
    assert mse([0.0, 1.0], [0.5, 0.5]) == 0.25
    assert mae([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0
    with pytest.raises(DomainError):
        mae([], [])
    with pytest.raises(DomainError):
        mse([1.0], [1.0, 2.0])


def test_csv_export():
    rows = list(per_instance_rows("PET", "max_sens", "raw", NeighborhoodSpec(), [0.0, 0.25]))
    text = format_csv(rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[2] == "PET,1,max_sens,raw,0.1,50,0.25"
