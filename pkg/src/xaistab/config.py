"""Benchmark configuration: JSON file plus command-line overrides, validated up front."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from xaistab.errors import ConfigurationError
from xaistab.meta.harness import PET_TOLERANCE, ROT_THRESHOLD
from xaistab.meta.randomness import RANDOM_MODES
from xaistab.metrics.neighborhood import NeighborhoodSpec
from xaistab.metrics.sensitivity import METRICS, MODES
from xaistab.sab.attribution import LINEAR, SSIN
from xaistab.sab.scene import ImageSpec
from xaistab.tree.model import TreeParams

TESTS = ("PET", "ROT")
ATTRIBUTIONS = {"ssin": SSIN, "linear": LINEAR}
CONFIG_FORMAT = "xaistab.config"
U64_MAX = 2**64 - 1

# Hyperparameter values searched in grid mode; the first entry of each axis
# is tried first, so ties resolve towards it.
PARAM_GRID = {
    "criterion": ("squared_error", "friedman_mse", "absolute_error", "poisson"),
    "splitter": ("best", "random"),
    "max_depth": (7, 30, 150, 300, None),
    "min_samples_split": (1, 2, 5, 25, 50, 100),
    "max_features": ("auto", "sqrt", "log2"),
}
REFERENCE_PARAMS = TreeParams("poisson", "best", None, 2, "log2")
REFERENCE_PERFORMANCE = {"mae": 0.033, "mse": 0.002}


def _check_keys(section: str, data: dict, allowed) -> None:
    if not isinstance(data, dict):
        raise ConfigurationError(f"section {section!r} must be an object")
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigurationError(f"unknown keys in {section!r}: {sorted(unknown)}")


def _int(name: str, value, low: int = 0, high: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if value < low or (high is not None and value > high):
        raise ConfigurationError(f"{name}={value} out of range")
    return value


def _choices(name: str, values, allowed) -> tuple:
    if isinstance(values, str):
        values = (values,)
    values = tuple(values)
    if not values:
        raise ConfigurationError(f"{name} must not be empty")
    for v in values:
        if v not in allowed:
            raise ConfigurationError(f"unknown {name[:-1] if name.endswith('s') else name} {v!r}; available: {sorted(allowed)}")
    return tuple(dict.fromkeys(values))


@dataclass(frozen=True)
class DatasetConfig:
    n_train: int = 5000
    n_val: int = 500
    attribution: str = "ssin"
    n_png: int = 0
    image: ImageSpec = field(default_factory=ImageSpec)

    def __post_init__(self):
        _int("dataset.n_train", self.n_train, 2)
        _int("dataset.n_val", self.n_val, 2)
        _int("dataset.n_png", self.n_png, 0)
        if self.attribution not in ATTRIBUTIONS:
            raise ConfigurationError(f"unknown attribution {self.attribution!r}; available: {sorted(ATTRIBUTIONS)}")

    def to_dict(self) -> dict:
        return {
            "n_train": self.n_train,
            "n_val": self.n_val,
            "attribution": self.attribution,
            "n_png": self.n_png,
            "image": self.image.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetConfig":
        _check_keys("dataset", data, cls.__dataclass_fields__)
        data = dict(data)
        if "image" in data:
            data["image"] = ImageSpec.from_dict(data["image"])
        return cls(**data)


@dataclass(frozen=True)
class TrainConfig:
    params: TreeParams = field(default_factory=TreeParams)
    grid_search: bool = False
    # fit grid candidates on the first k training samples only (None: all)
    grid_subsample: int | None = None

    def __post_init__(self):
        if self.grid_subsample is not None:
            _int("train.grid_subsample", self.grid_subsample, 2)

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(), "grid_search": self.grid_search, "grid_subsample": self.grid_subsample}

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        _check_keys("train", data, cls.__dataclass_fields__)
        data = dict(data)
        if "params" in data:
            data["params"] = TreeParams.from_dict(data["params"])
        return cls(**data)


@dataclass(frozen=True)
class ProbeConfig:
    """An extra PET + ROT configuration run in replication mode."""

    name: str
    description: str = ""
    neighborhood: NeighborhoodSpec = field(default_factory=NeighborhoodSpec)
    mode: str = "raw"
    explainer_mode: str = "stateless"
    key_levels: int | None = None
    input_levels: int | None = 255

    def __post_init__(self):
        if not self.name:
            raise ConfigurationError("probe name must not be empty")
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}; available: {list(MODES)}")
        if self.explainer_mode not in RANDOM_MODES:
            raise ConfigurationError(f"unknown explainer mode {self.explainer_mode!r}; available: {list(RANDOM_MODES)}")
        for name in ("key_levels", "input_levels"):
            if getattr(self, name) is not None:
                _int(f"probe.{name}", getattr(self, name), 1)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "neighborhood": self.neighborhood.to_dict(),
            "mode": self.mode,
            "explainer_mode": self.explainer_mode,
            "key_levels": self.key_levels,
            "input_levels": self.input_levels,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProbeConfig":
        _check_keys("probe", data, cls.__dataclass_fields__)
        data = dict(data)
        if "neighborhood" in data:
            data["neighborhood"] = NeighborhoodSpec.from_dict(data["neighborhood"])
        return cls(**data)


# Random explainer keyed on the 8-bit value of its input, probed below one
# grey level: neighbours share the parent's key, so the noise never changes.
SUB_RESOLUTION_PROBE = ProbeConfig(
    name="sub_resolution_keyed",
    description=(
        "Input-keyed noise explainer snapped to 255 grey levels, probed with "
        "epsilon = 0.001 (a quarter of one grey level) on 8-bit inputs."
    ),
    neighborhood=NeighborhoodSpec(epsilon=0.001, n_samples=50),
    mode="raw",
    explainer_mode="input_keyed",
    key_levels=255,
    input_levels=255,
)


@dataclass(frozen=True)
class EvalConfig:
    neighborhood: NeighborhoodSpec = field(default_factory=NeighborhoodSpec)
    metrics: tuple[str, ...] = ("max_sens", "avg_sens")
    modes: tuple[str, ...] = MODES
    tests: tuple[str, ...] = TESTS
    alpha: float = 0.05
    pet_tolerance: float = PET_TOLERANCE
    rot_threshold: float = ROT_THRESHOLD
    pet_instances: int | None = None
    rot_instances: int = 500
    explainer_mode: str = "stateless"
    key_levels: int | None = None
    rot_input_levels: int | None = 255
    weighted_importance: bool = False
    replication: bool = False
    probes: tuple[ProbeConfig, ...] = (SUB_RESOLUTION_PROBE,)

    def __post_init__(self):
        object.__setattr__(self, "metrics", _choices("metrics", self.metrics, METRICS))
        object.__setattr__(self, "modes", _choices("modes", self.modes, MODES))
        tests = tuple(t.upper() for t in ((self.tests,) if isinstance(self.tests, str) else self.tests))
        object.__setattr__(self, "tests", _choices("tests", tests, TESTS))
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError("eval.alpha must lie in (0, 1)")
        if not self.pet_tolerance >= 0 or not self.rot_threshold >= 0:
            raise ConfigurationError("eval tolerances must be >= 0")
        if self.pet_instances is not None:
            _int("eval.pet_instances", self.pet_instances, 2)
        _int("eval.rot_instances", self.rot_instances, 2)
        if self.explainer_mode not in RANDOM_MODES:
            raise ConfigurationError(f"unknown explainer mode {self.explainer_mode!r}; available: {list(RANDOM_MODES)}")
        for name in ("key_levels", "rot_input_levels"):
            if getattr(self, name) is not None:
                _int(f"eval.{name}", getattr(self, name), 1)
        probes = tuple(self.probes)
        names = [p.name for p in probes]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate probe names: {names}")
        object.__setattr__(self, "probes", probes)

    def to_dict(self) -> dict:
        return {
            "neighborhood": self.neighborhood.to_dict(),
            "metrics": list(self.metrics),
            "modes": list(self.modes),
            "tests": list(self.tests),
            "alpha": self.alpha,
            "pet_tolerance": self.pet_tolerance,
            "rot_threshold": self.rot_threshold,
            "pet_instances": self.pet_instances,
            "rot_instances": self.rot_instances,
            "explainer_mode": self.explainer_mode,
            "key_levels": self.key_levels,
            "rot_input_levels": self.rot_input_levels,
            "weighted_importance": self.weighted_importance,
            "replication": self.replication,
            "probes": [p.to_dict() for p in self.probes],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalConfig":
        _check_keys("eval", data, cls.__dataclass_fields__)
        data = dict(data)
        if "neighborhood" in data:
            data["neighborhood"] = NeighborhoodSpec.from_dict(data["neighborhood"])
        if "probes" in data:
            data["probes"] = tuple(ProbeConfig.from_dict(p) for p in data["probes"])
        return cls(**data)


@dataclass(frozen=True)
class BenchConfig:
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    seed: int = 42
    # execution settings: they do not change any result, so reports omit them
    n_jobs: int = 1
    out: str = "xaistab-out"

    def __post_init__(self):
        _int("seed", self.seed, 0, U64_MAX)
        _int("n_jobs", self.n_jobs, 1)

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    def to_dict(self, runtime: bool = True) -> dict:
        """Resolved config with every default filled in.

        ``runtime=False`` drops the settings that cannot affect results
        (thread count, output directory); that form goes into reports.
        """
        out = {
            "format": CONFIG_FORMAT,
            "seed": self.seed,
            "dataset": self.dataset.to_dict(),
            "train": self.train.to_dict(),
            "eval": self.eval.to_dict(),
        }
        if runtime:
            out["n_jobs"] = self.n_jobs
            out["out"] = self.out
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "BenchConfig":
        data = dict(data)
        fmt = data.pop("format", CONFIG_FORMAT)
        if fmt != CONFIG_FORMAT:
            raise ConfigurationError(f"unsupported config format {fmt!r}")
        _check_keys("config", data, cls.__dataclass_fields__)
        if "dataset" in data:
            data["dataset"] = DatasetConfig.from_dict(data["dataset"])
        if "train" in data:
            data["train"] = TrainConfig.from_dict(data["train"])
        if "eval" in data:
            data["eval"] = EvalConfig.from_dict(data["eval"])
        return cls(**data)


def load_config(path=None, **overrides) -> BenchConfig:
    """Read a JSON config (or the defaults) and apply non-None overrides.

    Supported override keys: seed, out, n_jobs, metrics, modes, tests,
    replication, n_png, grid_search, grid_subsample.
    """
    if path is None:
        cfg = BenchConfig()
    else:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
        try:
            cfg = BenchConfig.from_dict(data)
        except TypeError as exc:
            raise ConfigurationError(f"{path}: {exc}") from exc
    return apply_overrides(cfg, **overrides)


def apply_overrides(cfg: BenchConfig, **overrides) -> BenchConfig:
    o = {k: v for k, v in overrides.items() if v is not None}
    top = {k: o.pop(k) for k in ("seed", "out", "n_jobs") if k in o}
    ev = {k: o.pop(k) for k in ("metrics", "modes", "tests", "replication") if k in o}
    ds = {k: o.pop(k) for k in ("n_png",) if k in o}
    tr = {k: o.pop(k) for k in ("grid_search", "grid_subsample") if k in o}
    if o:
        raise ConfigurationError(f"unknown overrides: {sorted(o)}")
    return replace(
        cfg,
        dataset=replace(cfg.dataset, **ds),
        train=replace(cfg.train, **tr),
        eval=replace(cfg.eval, **ev),
        **top,
    )
