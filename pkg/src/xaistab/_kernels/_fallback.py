"""Pure-Python/numpy implementations of the tree kernels.

Same signatures and semantics as the compiled ``_ckernels`` module; used
when the extension is not built or when explicitly selected.
"""

from __future__ import annotations

import heapq

import numpy as np

SQUARED, FRIEDMAN, ABSOLUTE, POISSON = 0, 1, 2, 3


def _prefix_sad(ys: np.ndarray) -> np.ndarray:
    """Sum of |y - median| over every prefix, via two heaps."""
    low: list[float] = []  # max-heap (negated)
    high: list[float] = []
    sum_low = sum_high = 0.0
    out = np.empty(len(ys))
    for k, v in enumerate(ys.tolist()):
        if not low or v <= -low[0]:
            heapq.heappush(low, -v)
            sum_low += v
        else:
            heapq.heappush(high, v)
            sum_high += v
        if len(low) > len(high) + 1:
            moved = -heapq.heappop(low)
            sum_low -= moved
            heapq.heappush(high, moved)
            sum_high += moved
        elif len(high) > len(low):
            moved = heapq.heappop(high)
            sum_high -= moved
            heapq.heappush(low, -moved)
            sum_low += moved
        med = -low[0]
        out[k] = med * len(low) - sum_low + sum_high - med * len(high)
    return out


def _xlogx_over(s: np.ndarray, m) -> np.ndarray:
    safe = np.where(s > 0, s, 1.0)
    return np.where(s > 0, safe * (np.log(safe) - np.log(m)), 0.0)


def split_improvements(ys: np.ndarray, criterion: int) -> np.ndarray:
    """Impurity decrease for splitting sorted targets after each prefix.

    Entry ``i - 1`` is the decrease for left = ``ys[:i]``, ``i = 1..n-1``.
    """
    n = len(ys)
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    fn = float(n)
    if criterion == ABSOLUTE:
        prefix = _prefix_sad(ys)
        suffix = _prefix_sad(ys[::-1])[::-1]
        parent = prefix[-1] / fn
        return parent - (prefix[:-1] + suffix[1:]) / fn
    cs = np.cumsum(ys)
    sl = cs[:-1]
    s = cs[-1]
    sr = s - sl
    if criterion == SQUARED:
        d = sl / nl - sr / nr
        return (nl * nr) * (d * d) / (fn * fn)
    if criterion == FRIEDMAN:
        diff = nr * sl - nl * sr
        return (diff * diff) / (nl * nr) / (fn * fn)
    if criterion == POISSON:
        whole = s * (np.log(s) - np.log(fn)) if s > 0 else 0.0
        return 2.0 / fn * (_xlogx_over(sl, nl) + _xlogx_over(sr, nr) - whole)
    raise ValueError(f"unknown criterion code {criterion}")


def find_best_split(X, y, samples, features, criterion: int, tol: float):
    """Best (feature, threshold, improvement) over midpoint thresholds.

    Among candidates within ``tol`` of the best improvement, the lowest
    feature (in the order given) and then the lowest threshold wins.
    Returns ``(-1, 0.0, -inf)`` when every candidate feature is constant.
    """
    ys_node = y[samples]
    per_feature = []
    best = -np.inf
    for f in features:
        xs = X[samples, f]
        order = np.argsort(xs, kind="stable")
        xs = xs[order]
        valid = xs[1:] > xs[:-1]
        if not valid.any():
            per_feature.append(None)
            continue
        imp = split_improvements(ys_node[order], criterion)
        imp = np.where(valid, imp, -np.inf)
        per_feature.append((xs, imp))
        best = max(best, float(imp.max()))
    if best == -np.inf:
        return -1, 0.0, -np.inf
    cut = best - tol
    for f, entry in zip(features, per_feature):
        if entry is None:
            continue
        xs, imp = entry
        hits = np.flatnonzero(imp >= cut)
        if hits.size:
            i = int(hits[0]) + 1
            thr = (xs[i - 1] + xs[i]) / 2.0
            if thr >= xs[i]:
                thr = xs[i - 1]
            return int(f), float(thr), float(imp[i - 1])
    raise AssertionError("unreachable")  # pragma: no cover


def apply(feature, threshold, left, right, X) -> np.ndarray:
    """Leaf id reached by each row of ``X`` (ties go left)."""
    n = X.shape[0]
    node = np.zeros(n, dtype=np.intp)
    active = feature[node] >= 0
    while active.any():
        idx = np.flatnonzero(active)
        cur = node[idx]
        go_left = X[idx, feature[cur]] <= threshold[cur]
        node[idx] = np.where(go_left, left[cur], right[cur])
        active = feature[node] >= 0
    return node


def explain(feature, threshold, left, right, node_score, X) -> np.ndarray:
    """Accumulate ``|score(parent) - score(child)|`` on each root-to-leaf path."""
    n, d = X.shape
    out = np.zeros((n, d))
    node = np.zeros(n, dtype=np.intp)
    idx = np.flatnonzero(feature[node] >= 0)
    while idx.size:
        cur = node[idx]
        f = feature[cur]
        child = np.where(X[idx, f] <= threshold[cur], left[cur], right[cur])
        # each row appears once per step, so plain fancy-index accumulation is safe
        out[idx, f] += np.abs(node_score[cur] - node_score[child])
        node[idx] = child
        idx = idx[feature[child] >= 0]
    return out
