"""Acceptance criteria 1-7, one test each, at their stated tolerances.

Every test records a single PASS/FAIL line (shown in the terminal summary).
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings

from xaistab import pipeline
from xaistab.config import BenchConfig, DatasetConfig, EvalConfig
from xaistab.meta import ROT_DETECTED, confidence_interval, judge, TestOutcome
from xaistab.metrics import NeighborhoodSpec, avg_sensitivity, max_sensitivity
from xaistab.sab import ssin
from xaistab.tree import TreeParams, fit

from oracles import grid_reference_l2, grid_reference_linf, random_tree, ref_fit, small_problems, walk_explain

SQRT_2D = math.sqrt(2 * 256)


@pytest.fixture(scope="module")
def desk_run(tmp_path_factory):
    """gen -> train -> eval at desk scale (5000 / 500, 16x16, seed 42), replication mode."""
    out = tmp_path_factory.mktemp("desk")
    cfg = BenchConfig(eval=EvalConfig(replication=True), out=str(out))
    start = time.perf_counter()
    doc, code = pipeline.run_all(cfg)
    return cfg, doc, code, time.perf_counter() - start


def outcomes_of(doc, test, mode="raw"):
    return {o["metric"]: o for o in doc["outcomes"] if o["test"] == test and o["mode"] == mode}


def test_criterion_1_pet_replication(desk_run, criterion):
    cfg, doc, _, elapsed = desk_run
    assert cfg.train.params == TreeParams("poisson", "best", None, 2, "log2")
    assert (cfg.dataset.n_train, cfg.dataset.n_val) == (5000, 500)
    ok = True
    parts = []
    for mode in ("raw", "relative", "pred_filtered"):
        for m, o in outcomes_of(doc, "PET", mode).items():
            diag = o["config"]["diagnostics"]
            ok &= o["mean"] <= 1e-3 and o["ci"][0] <= 0.0 <= o["ci"][1] and o["passed"]
            ok &= diag["path_changes"] == 0
            if mode == "raw":
                parts.append(f"{m} {o['mean']:.3f} ± {o['std']:.3f} ({o['ci'][0]:.1f}, {o['ci'][1]:.1f})")
    ok &= elapsed <= 300
    criterion(1, ok, f"PET raw: {'; '.join(parts)}; pipeline {elapsed:.1f}s")


def test_criterion_2_model_quality(desk_run, criterion):
    _, doc, _, _ = desk_run
    perf = doc["performance"]
    ok = perf["mae"] <= 0.10 and perf["mse"] <= 0.02
    criterion(2, ok, f"val MAE {perf['mae']:.4f} (<= 0.10), MSE {perf['mse']:.4f} (<= 0.02); "
                     f"full-scale reference MAE {perf['reference']['mae']}, MSE {perf['reference']['mse']}")


def test_criterion_3_rot_detection(desk_run, criterion):
    _, doc, _, _ = desk_run
    rot = outcomes_of(doc, "ROT")
    o = rot["max_sens"]
    within = abs(o["mean"] - SQRT_2D) <= 0.10 * SQRT_2D
    verdict = judge([TestOutcome.from_dict(x) for x in doc["outcomes"]])
    label = verdict.to_dict()["entries"][0]["ROT"]["outcome"]
    e = verdict.entry("max_sens", "raw")
    modes = {x["mode"] for x in doc["outcomes"] if x["test"] == "ROT"}
    ok = (within and e.rot.passed and label == ROT_DETECTED and o["n"] == 500
          and o["config"]["explainer_mode"] == "stateless" and o["config"]["n_features"] == 256
          and modes == {"raw", "relative", "pred_filtered"})
    criterion(3, ok, f"ROT raw MAX mean {o['mean']:.2f} vs sqrt(2d) = {SQRT_2D:.2f} (±10%), "
                     f"outcome '{label}', modes reported {sorted(modes)}")


def test_criterion_4_verdict_replication(desk_run, criterion):
    _, doc, code, _ = desk_run
    rep = doc["replication"]
    found = []
    for probe in doc["probes"]:
        entries = probe["verdict"]["entries"]
        both = {e["metric"] for e in entries if e["PET"]["passed"] and not e["ROT"]["passed"] and not e["certified"]}
        if both >= {"max_sens", "avg_sens"}:
            found.append(probe["name"])
    ok = code == 0 and rep["reproduced"] and bool(found)
    criterion(4, ok, f"PET passed, ROT failed => not certified for both metrics under {found or 'no configuration'}")


@settings(max_examples=1000, deadline=None, database=None)
@given(small_problems())
def _cart_case(problem):
    X, y, crit, depth, mss = problem
    tree = fit(X, y, TreeParams(crit, "best", depth, mss, "auto"))
    ref = ref_fit(X, y, crit, depth, mss)
    assert tree.n_nodes == len(ref)
    for i, r in enumerate(ref):
        assert (tree.feature[i], tree.left[i], tree.right[i]) == (r["feature"], r["left"], r["right"])
        if r["feature"] >= 0:
            assert tree.threshold[i] == r["threshold"]


def test_criterion_5_oracle_equivalence(criterion):
    fails = []
    try:
        _cart_case()
    except AssertionError as exc:
        fails.append(f"cart: {exc}")

    x = np.array([0.5, 0.5])
    worst = 0.0
    for A in (np.eye(2), np.array([[1.0, 2.0], [0.0, 1.0]]), np.array([[0.3, -0.7], [1.1, 0.4]])):
        f = lambda z, A=A: A @ z
        for norm, ref in (("linf", grid_reference_linf), ("l2", grid_reference_l2)):
            spec = NeighborhoodSpec(epsilon=0.1, n_samples=10_000, norm=norm)
            rmax, ravg = ref(A, 0.1)
            for got, want in ((max_sensitivity(f, x, spec, 0), rmax), (avg_sensitivity(f, x, spec, 0), ravg)):
                worst = max(worst, abs(got - want) / want)
    if worst > 0.05:
        fails.append(f"grid: worst relative error {worst:.3f}")

    for k in range(20):
        rng = np.random.default_rng(1000 + k)
        d = int(rng.integers(1, 6))
        tree = random_tree(rng, d)
        X = rng.random((25, d))
        if not all(np.array_equal(e, walk_explain(tree, xx)) for xx, e in zip(X, tree.explain(X))):
            fails.append(f"path-walk: tree {k}")
    criterion(5, not fails, f"(a) CART = exhaustive enumeration, (b) MC vs grid worst {worst:.3%} (<= 5%), "
                            f"(c) 20 path-walk trees exact{'; ' + '; '.join(fails) if fails else ''}")


def _run_dir(out):
    return {p.relative_to(out).as_posix(): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}


def test_criterion_6_invariants(tmp_path, criterion):
    rng = np.random.default_rng(6)
    g = rng.random((100_000, 3))
    hi = ssin(g)
    bumped = g.copy()
    j = rng.integers(0, 3, size=len(g))
    bumped[np.arange(len(g)), j] = np.minimum(1.0, bumped[np.arange(len(g)), j] + rng.random(len(g)) * 0.5)
    ssin_ok = bool((hi >= 0).all() and (hi <= 1 + 1e-12).all() and (ssin(bumped) >= hi).all())

    spec = NeighborhoodSpec(epsilon=0.1, n_samples=20)
    dominance_ok = True
    for k in range(1000):
        A = rng.normal(size=(4, 4))
        xx = rng.random(4)
        f = lambda z, A=A: np.sin(A @ z)
        dominance_ok &= avg_sensitivity(f, xx, spec, k) <= max_sensitivity(f, xx, spec, k)
    const = lambda z: np.full(4, 0.3)
    const_ok = all(max_sensitivity(const, rng.random(4), spec, k) == 0.0 for k in range(50))

    small = BenchConfig(dataset=DatasetConfig(n_train=400, n_val=40, n_png=2),
                        eval=EvalConfig(rot_instances=40, replication=True))
    dirs = []
    for name, jobs in (("a", 1), ("b", 1), ("c", 4)):
        pipeline.run_all(replace(small, out=str(tmp_path / name), n_jobs=jobs))
        dirs.append(_run_dir(tmp_path / name))
    repro_ok = dirs[0] == dirs[1] == dirs[2] and len(dirs[0]) >= 10
    ok = ssin_ok and dominance_ok and const_ok and repro_ok
    criterion(6, ok, f"ssin range/monotone on 1e5 inputs {ssin_ok}, avg <= max on 1e3 pairs {dominance_ok}, "
                     f"constant explainer zero {const_ok}, byte-identical runs (2 runs, 1 vs 4 threads, "
                     f"{len(dirs[0])} files) {repro_ok}")


def test_criterion_7_confidence_interval(criterion):
    values = [((i * 37) % 101) / 101 for i in range(100)]
    low, high = confidence_interval(values, 0.05)
    # frozen from an independent 40-digit computation
    err = max(abs(low - 0.43658415346578511886), abs(high - 0.55074257920748220787))
    zero = confidence_interval([0.25] * 100) == (0.25, 0.25) and confidence_interval(np.zeros(10)) == (0.0, 0.0)
    criterion(7, err <= 1e-12 and zero, f"z-interval max error {err:.1e} (<= 1e-12), constant data gives a point interval {zero}")
