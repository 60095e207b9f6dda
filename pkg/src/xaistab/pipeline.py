"""gen-data -> train -> eval -> report orchestration over an output directory."""

from __future__ import annotations

import itertools
import json
import logging
from pathlib import Path

import numpy as np

from xaistab.config import (
    ATTRIBUTIONS,
    PARAM_GRID,
    REFERENCE_PARAMS,
    REFERENCE_PERFORMANCE,
    BenchConfig,
    ProbeConfig,
)
from xaistab.errors import ConfigurationError, DomainError
from xaistab.imageio import save_png
from xaistab.meta.harness import run_pet, run_rot
from xaistab.meta.verdict import judge, render_markdown
from xaistab.metrics.export import per_instance_rows, write_csv
from xaistab.metrics.neighborhood import NeighborhoodSpec
from xaistab.metrics.performance import mae, mse
from xaistab.sab.dataset import generate_dataset, load_dataset, save_dataset
from xaistab.tree.model import RegressionTree, TreeParams, fit

log = logging.getLogger(__name__)

TRAIN_FILE = "train.sab"
VAL_FILE = "val.sab"
TREE_FILE = "tree.json"
PERFORMANCE_FILE = "performance.json"
VERDICT_FILE = "verdict.json"
RESULTS_FILE = "results.md"
CSV_FILE = "per_instance.csv"
PNG_DIR = "png"
VERDICT_FORMAT = "xaistab.verdict"

_TRAIN_STREAM, _VAL_STREAM = 0, 1
_STAGES = {"fit": 1, "pet": 2, "rot": 3}


def stage_seed(seed: int, stage: str, extra: int = 0) -> int:
    """Independent 32-bit seed per pipeline stage, derived from the master seed."""
    ss = np.random.SeedSequence([int(seed), _STAGES[stage], int(extra)])
    return int(ss.generate_state(1)[0])


def _dump_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True, allow_nan=False) + "\n")
    return path


def _prepare(out: Path) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def gen_data(cfg: BenchConfig) -> dict:
    """Write train/val SAB1 files (with manifests) and optional PNG samples."""
    out = _prepare(cfg.out_dir)
    ds = cfg.dataset
    fn = ATTRIBUTIONS[ds.attribution]
    record = {}
    for name, n, stream in ((TRAIN_FILE, ds.n_train, _TRAIN_STREAM), (VAL_FILE, ds.n_val, _VAL_STREAM)):
        log.info("generating %d samples into %s", n, out / name)
        samples = generate_dataset(n, ds.image, fn, cfg.seed, stream, cfg.n_jobs)
        record[name] = save_dataset(out / name, samples, ds.image, fn, cfg.seed, stream)
        if name == TRAIN_FILE and ds.n_png:
            record["png"] = export_pngs(samples[: ds.n_png], out / PNG_DIR)
    return record


def export_pngs(samples, directory: Path) -> list[str]:
    """One image and one max-normalized attribution heatmap per sample."""
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for i, s in enumerate(samples):
        written.append(save_png(s.image, directory / f"sample_{i:04d}.png").name)
        written.append(save_png(s.gt_attribution, directory / f"sample_{i:04d}_attribution.png", normalize=True).name)
    return written


def _load_split(path, image_spec) -> tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    data = load_dataset(path)
    if (data.width, data.height) != (image_spec.width, image_spec.height):
        raise ConfigurationError(
            f"{path}: images are {data.width}x{data.height}, config expects "
            f"{image_spec.width}x{image_spec.height}"
        )
    return data.features(), data.targets.astype(np.float64)


def _degeneracy(tree: RegressionTree, y: np.ndarray) -> list[str]:
    warnings = []
    if tree.n_nodes == 1:
        warnings.append("tree is a single leaf")
    if np.ptp(y) == 0:
        warnings.append("training targets are constant")
    return warnings


def param_grid() -> list[TreeParams]:
    keys = list(PARAM_GRID)
    return [TreeParams(**dict(zip(keys, combo))) for combo in itertools.product(*PARAM_GRID.values())]


def grid_search(X, y, Xv, yv, seed: int, subsample: int | None = None) -> tuple[int, list[dict]]:
    """Fit every grid combination; return (index of lowest val MAE, all rows)."""
    if subsample is not None:
        X, y = X[:subsample], y[:subsample]
    rows = []
    for i, params in enumerate(param_grid()):
        tree = fit(X, y, params, seed)
        pred = tree.predict(Xv)
        rows.append({"index": i, "params": params.to_dict(), "mae": mae(yv, pred), "mse": mse(yv, pred), "n_nodes": tree.n_nodes})
        log.info("grid %d: %s mae=%.4f", i, params, rows[-1]["mae"])
    # strict < keeps the first entry among equal scores
    best = 0
    for r in rows:
        if r["mae"] < rows[best]["mae"]:
            best = r["index"]
    return best, rows


def train(cfg: BenchConfig, train_path=None, val_path=None) -> dict:
    """Fit the tree, write tree.json and performance.json; returns the performance record."""
    out = _prepare(cfg.out_dir)
    image = cfg.dataset.image
    X, y = _load_split(train_path or out / TRAIN_FILE, image)
    Xv, yv = _load_split(val_path or out / VAL_FILE, image)
    seed = stage_seed(cfg.seed, "fit")
    params = cfg.train.params
    record = {"config": cfg.to_dict(runtime=False)}
    if cfg.train.grid_search:
        best, rows = grid_search(X, y, Xv, yv, seed, cfg.train.grid_subsample)
        params = param_grid()[best]
        record["grid_search"] = {
            "n_combinations": len(rows),
            "subsample": cfg.train.grid_subsample,
            "selected": params.to_dict(),
            "reference": REFERENCE_PARAMS.to_dict(),
            "matches_reference": params == REFERENCE_PARAMS,
            "results": rows,
        }
    tree = fit(X, y, params, seed)
    tree.save(out / TREE_FILE)
    pred = tree.predict(Xv)
    record.update(
        {
            "params": params.to_dict(),
            "n_train": int(len(y)),
            "n_val": int(len(yv)),
            "mae": mae(yv, pred),
            "mse": mse(yv, pred),
            "n_nodes": tree.n_nodes,
            "n_leaves": tree.n_leaves,
            "depth": tree.depth(),
            "warnings": _degeneracy(tree, y),
            "reference": {"scale": "full", **REFERENCE_PERFORMANCE},
        }
    )
    for w in record["warnings"]:
        log.warning("training: %s", w)
    _dump_json(out / PERFORMANCE_FILE, record)
    return record


def _outcome_dicts(outcomes) -> list[dict]:
    return [o.to_dict() for o in outcomes]


def _run_tests(cfg: BenchConfig, tree, Xv, neighborhood, modes, explainer_mode, key_levels, input_levels, tag: int):
    ev = cfg.eval
    outcomes = []
    for mode in modes:
        if "PET" in ev.tests:
            outcomes += run_pet(
                tree, Xv, neighborhood, ev.metrics, stage_seed(cfg.seed, "pet", tag), ev.alpha, mode,
                ev.pet_tolerance, ev.weighted_importance, n_jobs=cfg.n_jobs,
            )
        if "ROT" in ev.tests:
            outcomes += run_rot(
                (cfg.dataset.image.height, cfg.dataset.image.width), ev.rot_instances, neighborhood, ev.metrics,
                stage_seed(cfg.seed, "rot", tag), ev.alpha, explainer_mode, mode, ev.rot_threshold,
                key_levels, input_levels, n_jobs=cfg.n_jobs,
            )
    return outcomes


def _csv_rows(outcomes, label: str = ""):
    for o in outcomes:
        test = o.test if not label else f"{o.test}@{label}"
        yield from per_instance_rows(test, o.metric, o.mode, NeighborhoodSpec.from_dict(o.config["neighborhood"]), o.values)


def replicating_modes(verdict, metrics) -> list[str]:
    """Modes in which every metric passed PET and failed ROT."""
    entries = {(e.metric, e.mode): e for e in verdict.entries}
    modes = dict.fromkeys(e.mode for e in verdict.entries)
    return [mode for mode in modes if all((m, mode) in entries and entries[(m, mode)].replicates_reference for m in metrics)]


def evaluate(cfg: BenchConfig, tree_path=None, val_path=None) -> tuple[dict, int]:
    """Run the selected tests; write verdict.json, results.md, per_instance.csv.

    Returns the verdict document and the exit code.  Benchmark mode: 0 iff
    every outcome passed.  Replication mode: 0 iff, in at least one
    configuration, every selected metric passes PET and fails ROT.
    """
    out = _prepare(cfg.out_dir)
    ev = cfg.eval
    tree_path = Path(tree_path or out / TREE_FILE)
    if not tree_path.exists():
        raise FileNotFoundError(f"tree file not found: {tree_path}")
    tree = RegressionTree.load(tree_path)
    if tree.n_features != cfg.dataset.image.n_features:
        raise DomainError(f"tree expects {tree.n_features} features, config images have {cfg.dataset.image.n_features}")
    Xv = np.empty((0, tree.n_features))
    if "PET" in ev.tests:
        Xv, _ = _load_split(val_path or out / VAL_FILE, cfg.dataset.image)
        if ev.pet_instances is not None:
            Xv = Xv[: ev.pet_instances]

    outcomes = _run_tests(cfg, tree, Xv, ev.neighborhood, ev.modes, ev.explainer_mode, ev.key_levels, ev.rot_input_levels, 0)
    verdict = judge(outcomes)
    rows = list(_csv_rows(outcomes))
    doc = {
        "format": VERDICT_FORMAT,
        "run_mode": "replication" if ev.replication else "benchmark",
        "config": cfg.to_dict(runtime=False),
        "outcomes": _outcome_dicts(outcomes),
        "verdict": verdict.to_dict(),
    }
    perf_path = out / PERFORMANCE_FILE
    if perf_path.exists():
        perf = json.loads(perf_path.read_text())
        doc["performance"] = {k: perf[k] for k in ("mae", "mse", "n_nodes", "depth", "reference") if k in perf}

    configurations = [f"main/{mode}" for mode in replicating_modes(verdict, ev.metrics)]
    if ev.replication:
        doc["probes"] = []
        for k, probe in enumerate(ev.probes, start=1):
            p_out = _run_probe(cfg, tree, Xv, probe, k)
            p_verdict = judge(p_out)
            doc["probes"].append(
                {**probe.to_dict(), "outcomes": _outcome_dicts(p_out), "verdict": p_verdict.to_dict()}
            )
            rows += list(_csv_rows(p_out, probe.name))
            configurations += [f"probe/{probe.name}/{m}" for m in replicating_modes(p_verdict, ev.metrics)]
        reproduced = bool(configurations) and set(ev.tests) == {"PET", "ROT"}
        doc["replication"] = {"reproduced": reproduced, "configurations": configurations}
        code = 0 if reproduced else 1
    else:
        code = 0 if all(o.passed for o in outcomes) else 1
    doc["exit_code"] = code

    _dump_json(out / VERDICT_FILE, doc)
    (out / RESULTS_FILE).write_text(render_markdown(doc))
    write_csv(out / CSV_FILE, rows)
    return doc, code


def _run_probe(cfg: BenchConfig, tree, Xv, probe: ProbeConfig, tag: int):
    return _run_tests(
        cfg, tree, Xv, probe.neighborhood, (probe.mode,), probe.explainer_mode, probe.key_levels,
        probe.input_levels, tag,
    )


def report(verdict_path, out_path=None) -> Path:
    """Re-render results.md from a verdict.json."""
    verdict_path = Path(verdict_path)
    doc = json.loads(verdict_path.read_text())
    if doc.get("format") != VERDICT_FORMAT:
        raise DomainError(f"{verdict_path} is not a verdict document")
    out_path = Path(out_path) if out_path else verdict_path.with_name(RESULTS_FILE)
    out_path.write_text(render_markdown(doc))
    return out_path


def run_all(cfg: BenchConfig) -> tuple[dict, int]:
    gen_data(cfg)
    train(cfg)
    return evaluate(cfg)
