"""CART regression tree with exact path-based local explanations."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from xaistab import _kernels
from xaistab.errors import ConfigurationError, DomainError, InconsistencyError
from xaistab.tree.criteria import CRITERIA, criterion_code, impurity

FORMAT = "xaistab.regression_tree"
FORMAT_VERSION = 1
SPLITTERS = ("best", "random")
MAX_FEATURES = ("all", "sqrt", "log2")
# improvements closer than this (relative to node impurity) count as ties
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class TreeParams:
    criterion: str = "poisson"
    splitter: str = "best"
    max_depth: int | None = None
    min_samples_split: int = 2
    max_features: str = "log2"

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ConfigurationError(f"unknown criterion {self.criterion!r}")
        if self.splitter not in SPLITTERS:
            raise ConfigurationError(f"unknown splitter {self.splitter!r}")
        mf = "all" if self.max_features in ("auto", None) else self.max_features
        if mf not in MAX_FEATURES:
            raise ConfigurationError(f"unknown max_features {self.max_features!r}")
        object.__setattr__(self, "max_features", mf)
        if self.max_depth is not None and self.max_depth < 0:
            raise ConfigurationError("max_depth must be >= 0 or None")
        if self.min_samples_split < 1:
            raise ConfigurationError("min_samples_split must be >= 1")

    def n_candidates(self, n_features: int) -> int:
        if self.max_features == "all":
            return n_features
        if n_features < 1:
            return 0
        if self.max_features == "sqrt":
            return max(1, math.ceil(math.sqrt(n_features)))
        return max(1, math.ceil(math.log2(n_features)))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TreeParams":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"unknown tree keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class TreeNode:
    node_id: int
    impurity: float
    n_samples: int
    value: float
    feature: int | None = None
    threshold: float | None = None
    left: int | None = None
    right: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class RegressionTree:
    """Array-backed tree; node 0 is the root and leaves have ``feature == -1``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    impurity: np.ndarray
    n_samples: np.ndarray
    value: np.ndarray
    n_features: int
    params: TreeParams = field(default_factory=TreeParams)
    seed: int = 0

    @property
    def criterion(self) -> str:
        return self.params.criterion

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def node(self, i: int) -> TreeNode:
        if self.feature[i] < 0:
            return TreeNode(i, float(self.impurity[i]), int(self.n_samples[i]), float(self.value[i]))
        return TreeNode(
            i,
            float(self.impurity[i]),
            int(self.n_samples[i]),
            float(self.value[i]),
            int(self.feature[i]),
            float(self.threshold[i]),
            int(self.left[i]),
            int(self.right[i]),
        )

    @property
    def nodes(self) -> list[TreeNode]:
        return [self.node(i) for i in range(self.n_nodes)]

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):  # children always have larger ids
            if self.feature[i] >= 0:
                depths[self.left[i]] = depths[self.right[i]] = depths[i] + 1
        return int(depths.max())

    def _rows(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DomainError(f"expected {self.n_features} features, got shape {X.shape}")
        return np.ascontiguousarray(X)

    def apply(self, X) -> np.ndarray:
        """Leaf ids for a batch of rows."""
        return _kernels.apply(self.feature, self.threshold, self.left, self.right, self._rows(X))

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def explain(self, X, weighted: bool = False) -> np.ndarray:
        """Batch of local explanations, one row per input row."""
        scores = self.impurity
        if weighted:
            scores = self.impurity * (self.n_samples / self.n_samples[0])
        return _kernels.explain(self.feature, self.threshold, self.left, self.right,
                                np.ascontiguousarray(scores, dtype=np.float64), self._rows(X))

    def decision_path(self, x) -> list[int]:
        x = self._rows(x)[0]
        path = [0]
        node = 0
        while self.feature[node] >= 0:
            node = int(self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node])
            path.append(node)
        return path

    # serialization

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "n_features": int(self.n_features),
            "criterion": self.criterion,
            "params": self.params.to_dict(),
            "seed": int(self.seed),
            "nodes": [asdict(node) for node in self.nodes],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.dumps())
        return path

    @classmethod
    def from_dict(cls, data: dict) -> "RegressionTree":
        if data.get("format") != FORMAT:
            raise DomainError(f"not a serialized tree (format={data.get('format')!r})")
        if data.get("version") != FORMAT_VERSION:
            raise DomainError(f"unsupported tree format version {data.get('version')!r}")
        nodes = [TreeNode(**n) for n in data["nodes"]]
        if [n.node_id for n in nodes] != list(range(len(nodes))):
            raise DomainError("tree nodes must be stored in id order")
        tree = cls(
            feature=np.array([-1 if n.feature is None else n.feature for n in nodes], dtype=np.intp),
            threshold=np.array([0.0 if n.threshold is None else n.threshold for n in nodes]),
            left=np.array([-1 if n.left is None else n.left for n in nodes], dtype=np.intp),
            right=np.array([-1 if n.right is None else n.right for n in nodes], dtype=np.intp),
            impurity=np.array([n.impurity for n in nodes]),
            n_samples=np.array([n.n_samples for n in nodes], dtype=np.int64),
            value=np.array([n.value for n in nodes]),
            n_features=int(data["n_features"]),
            params=TreeParams.from_dict(data["params"]),
            seed=int(data["seed"]),
        )
        check_tree(tree)
        return tree

    @classmethod
    def loads(cls, text: str) -> "RegressionTree":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "RegressionTree":
        return cls.loads(Path(path).read_text())


def check_tree(tree: RegressionTree) -> None:
    """Raise InconsistencyError unless ``tree`` is a well-formed binary tree."""
    n = tree.n_nodes
    if n == 0:
        raise InconsistencyError("tree has no nodes")
    parents = np.full(n, -1)
    for i in range(n):
        f = tree.feature[i]
        if f < 0:
            if tree.left[i] != -1 or tree.right[i] != -1:
                raise InconsistencyError(f"leaf {i} has children")
            continue
        if f >= tree.n_features:
            raise InconsistencyError(f"node {i} splits on feature {f} >= {tree.n_features}")
        for child in (tree.left[i], tree.right[i]):
            if not i < child < n:
                raise InconsistencyError(f"node {i} has invalid child {child}")
            if parents[child] != -1:
                raise InconsistencyError(f"node {child} has two parents")
            parents[child] = i
        if tree.n_samples[tree.left[i]] + tree.n_samples[tree.right[i]] != tree.n_samples[i]:
            raise InconsistencyError(f"children of node {i} do not partition its samples")
    if (parents[1:] < 0).any():
        raise InconsistencyError("tree has unreachable nodes")
    if (tree.impurity < 0).any():
        raise InconsistencyError("negative impurity")


def split_gains(ys: np.ndarray, go_left: np.ndarray, criterion: str) -> np.ndarray:
    """Impurity decrease of one split per column of the ``(n, k)`` mask ``go_left``."""
    n = float(len(ys))
    nl = go_left.sum(axis=0).astype(np.float64)
    nr = n - nl
    if criterion == "absolute_error":
        yl = np.where(go_left, ys[:, None], np.nan)
        yr = np.where(go_left, np.nan, ys[:, None])
        sad_l = np.nansum(np.abs(yl - np.nanmedian(yl, axis=0)), axis=0)
        sad_r = np.nansum(np.abs(yr - np.nanmedian(yr, axis=0)), axis=0)
        return impurity(ys, criterion) - (sad_l + sad_r) / n
    total = float(ys.sum())
    sl = ys @ go_left
    sr = total - sl
    if criterion == "poisson":
        def xlogx_over(a, m):
            return np.where(a > 0, a * (np.log(np.where(a > 0, a, 1.0)) - np.log(m)), 0.0)

        whole = total * (np.log(total) - np.log(n)) if total > 0 else 0.0
        return 2.0 / n * (xlogx_over(sl, nl) + xlogx_over(sr, nr) - whole)
    diff = nr * sl - nl * sr
    return diff * diff / (nl * nr) / (n * n)


def _random_split(X, y, samples, candidates, criterion, tol, rng):
    ys = y[samples]
    V = X[np.ix_(samples, candidates)]
    lo, hi = V.min(axis=0), V.max(axis=0)
    usable = np.flatnonzero(lo < hi)
    if usable.size == 0:
        return -1, 0.0, -np.inf
    # one uniform draw per usable candidate, in candidate order
    thr = rng.uniform(lo[usable], hi[usable])
    thr = np.where(thr >= hi[usable], lo[usable], thr)
    gains = split_gains(ys, V[:, usable] <= thr, criterion)
    best = gains.max()
    j = int(np.flatnonzero(gains >= best - tol)[0])
    return int(candidates[usable[j]]), float(thr[j]), float(gains[j])


def fit(X, y, params: TreeParams | None = None, seed: int = 0) -> RegressionTree:
    """Grow a CART regression tree greedily, depth-first, left child first.

    Each split-eligible node draws its candidate features from a generator
    seeded once with ``seed``, so the tree is a pure function of
    (data, params, seed).
    """
    params = params or TreeParams()
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DomainError(f"X {X.shape} and y {y.shape} do not align")
    if X.shape[0] < 1:
        raise DomainError("cannot fit a tree on an empty dataset")
    if params.criterion == "poisson" and (y < 0).any():
        raise DomainError("poisson criterion requires non-negative targets")
    n, d = X.shape
    k = params.n_candidates(d)
    if k < 1:
        raise InconsistencyError("no candidate features to split on")
    code = criterion_code(params.criterion)
    rng = np.random.default_rng(seed)
    min_split = max(2, params.min_samples_split)

    feature, threshold, left, right, imp, counts, value = [], [], [], [], [], [], []
    # (samples, depth, parent id, is_left)
    stack = [(np.arange(n, dtype=np.intp), 0, -1, False)]
    while stack:
        samples, depth, parent, is_left = stack.pop()
        node_id = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = node_id
        ys = y[samples]
        node_imp = impurity(ys, params.criterion)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        imp.append(node_imp)
        counts.append(len(samples))
        value.append(float(ys.mean()))

        if (
            len(samples) < min_split
            or (params.max_depth is not None and depth >= params.max_depth)
            or node_imp == 0.0
        ):
            continue
        if k >= d:
            candidates = np.arange(d, dtype=np.intp)
        else:
            candidates = np.sort(rng.choice(d, size=k, replace=False)).astype(np.intp)
        tol = TIE_RTOL * node_imp
        if params.splitter == "best":
            f, thr, _ = _kernels.find_best_split(X, y, samples, candidates, code, tol)
        else:
            f, thr, _ = _random_split(X, y, samples, candidates, params.criterion, tol, rng)
        if f < 0:
            continue
        go_left = X[samples, f] <= thr
        feature[node_id] = f
        threshold[node_id] = thr
        stack.append((samples[~go_left], depth + 1, node_id, False))
        stack.append((samples[go_left], depth + 1, node_id, True))

    return RegressionTree(
        feature=np.array(feature, dtype=np.intp),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.intp),
        right=np.array(right, dtype=np.intp),
        impurity=np.array(imp, dtype=np.float64),
        n_samples=np.array(counts, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
        n_features=d,
        params=params,
        seed=int(seed),
    )


def predict(tree: RegressionTree, x) -> float:
    """Value of the leaf reached by ``x`` (``x[feature] <= threshold`` goes left)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DomainError("predict takes a single feature vector; use tree.predict for batches")
    return float(tree.predict(x)[0])


def explain_local(tree: RegressionTree, x, weighted: bool = False) -> np.ndarray:
    """Relevance of each feature for ``x``.

    Along the root-to-leaf path, every step from parent to child adds
    ``|impurity(parent) - impurity(child)|`` to the parent's split feature.
    With ``weighted`` the impurities are first scaled by the node's share
    of training samples.  Features off the path get 0.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DomainError("explain_local takes a single feature vector; use tree.explain for batches")
    return tree.explain(x, weighted=weighted)[0]
