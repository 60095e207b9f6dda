"""Independent reference implementations used as test oracles."""

import math

import numpy as np
from hypothesis import strategies as st
from scipy.special import xlogy

from xaistab.tree import CRITERIA, RegressionTree

TIE_RTOL = 1e-12


def ref_impurity(y, criterion):
    y = np.asarray(y, dtype=float)
    if np.all(y == y[0]):
        return 0.0
    if criterion in ("squared_error", "friedman_mse"):
        return float(((y - y.mean()) ** 2).mean())
    if criterion == "absolute_error":
        # the median minimizes the mean absolute deviation; search the data points
        return min(float(np.abs(y - c).mean()) for c in y)
    mu = y.mean()
    return float((2 * (xlogy(y, y / mu) - y + mu)).mean())


def ref_fit(X, y, criterion, max_depth=None, min_samples_split=2):
    """Exhaustive greedy CART: every feature, every midpoint, preorder ids."""
    nodes = []

    def grow(idx, depth):
        nid = len(nodes)
        ys = y[idx]
        imp = ref_impurity(ys, criterion)
        node = {"feature": -1, "threshold": 0.0, "left": -1, "right": -1, "value": ys.mean(), "impurity": imp}
        nodes.append(node)
        if len(idx) < max(2, min_samples_split) or (max_depth is not None and depth >= max_depth) or imp == 0.0:
            return nid
        cands = []
        for f in range(X.shape[1]):
            vals = np.unique(X[idx, f])
            for lo, hi in zip(vals[:-1], vals[1:]):
                thr = (lo + hi) / 2
                go = X[idx, f] <= thr
                n, nl = len(idx), go.sum()
                gain = imp - nl / n * ref_impurity(ys[go], criterion) - (n - nl) / n * ref_impurity(ys[~go], criterion)
                cands.append((f, thr, gain))
        if not cands:
            return nid
        best = max(c[2] for c in cands)
        f, thr, _ = next(c for c in cands if c[2] >= best - TIE_RTOL * imp)
        go = X[idx, f] <= thr
        node["feature"], node["threshold"] = f, thr
        node["left"] = grow(idx[go], depth + 1)
        node["right"] = grow(idx[~go], depth + 1)
        return nid

    grow(np.arange(len(y)), 0)
    return nodes


def random_tree(rng, n_features, max_nodes=40):
    feature, threshold, left, right, imp, counts = [], [], [], [], [], []

    def grow(depth, n):
        i = len(feature)
        for arr in (feature, threshold, left, right):
            arr.append(-1)
        imp.append(float(rng.random()))
        counts.append(n)
        if depth < 6 and len(feature) < max_nodes and n >= 2 and rng.random() < 0.7:
            feature[i] = int(rng.integers(n_features))
            threshold[i] = float(rng.random())
            k = int(rng.integers(1, n))
            left[i] = grow(depth + 1, k)
            right[i] = grow(depth + 1, n - k)
        else:
            threshold[i] = 0.0
        return i

    grow(0, 1000)
    return RegressionTree(
        feature=np.array(feature, dtype=np.intp),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.intp),
        right=np.array(right, dtype=np.intp),
        impurity=np.array(imp),
        n_samples=np.array(counts),
        value=rng.random(len(feature)),
        n_features=n_features,
    )


def walk_explain(tree, x, weighted=False):
    out = [0.0] * tree.n_features
    scale = (lambda i: tree.n_samples[i] / tree.n_samples[0]) if weighted else (lambda i: 1.0)
    node = 0
    while tree.feature[node] != -1:
        f = int(tree.feature[node])
        child = int(tree.left[node]) if x[f] <= tree.threshold[node] else int(tree.right[node])
        out[f] += abs(tree.impurity[node] * scale(node) - tree.impurity[child] * scale(child))
        node = child
    return np.array(out)


def grid_reference_linf(A, eps, m=1001):
    t = np.linspace(-eps, eps, m)
    D = np.stack(np.meshgrid(t, t), -1).reshape(-1, 2)
    norms = np.linalg.norm(D @ np.asarray(A).T, axis=1)
    return norms.max(), norms.mean()


def grid_reference_l2(A, eps, m=20001):
    theta = np.linspace(0, 2 * math.pi, m, endpoint=False)
    U = np.stack([np.cos(theta), np.sin(theta)], 1)
    g = np.linalg.norm(U @ np.asarray(A).T, axis=1)
    # radius ~ Uniform(0, eps) independent of the direction
    return eps * g.max(), eps / 2 * g.mean()


@st.composite
def small_problems(draw):
    n = draw(st.integers(1, 8))
    d = draw(st.integers(1, 4))
    X = np.array(draw(st.lists(st.integers(0, 3), min_size=n * d, max_size=n * d)), dtype=float).reshape(n, d)
    y = np.array(draw(st.lists(st.integers(0, 5), min_size=n, max_size=n)), dtype=float)
    criterion = draw(st.sampled_from(sorted(CRITERIA)))
    depth = draw(st.sampled_from([None, 1, 2]))
    mss = draw(st.sampled_from([1, 2, 3, 5]))
    return X, y, criterion, depth, mss
