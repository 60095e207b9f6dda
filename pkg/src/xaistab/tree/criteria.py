"""Node impurity criteria for regression trees."""

from __future__ import annotations

import numpy as np

from xaistab import _kernels
from xaistab.errors import ConfigurationError, DomainError

CRITERIA = {
    "squared_error": _kernels.SQUARED,
    "friedman_mse": _kernels.FRIEDMAN,
    "absolute_error": _kernels.ABSOLUTE,
    "poisson": _kernels.POISSON,
}


def criterion_code(name: str) -> int:
    try:
        return CRITERIA[name]
    except KeyError:
        raise ConfigurationError(f"unknown criterion {name!r}; expected one of {sorted(CRITERIA)}") from None


def impurity(targets, criterion: str) -> float:
    """Impurity of a node holding ``targets``.

    squared_error / friedman_mse: variance.  absolute_error: mean absolute
    deviation from the median.  poisson: mean Poisson deviance against the
    node mean, with ``0 * log 0 = 0``.  Constant targets give exactly 0.
    """
    criterion_code(criterion)
    y = np.asarray(targets, dtype=np.float64).ravel()
    if y.size == 0:
        raise DomainError("impurity of an empty node is undefined")
    if criterion == "poisson" and (y < 0).any():
        raise DomainError("poisson impurity requires non-negative targets")
    if y.max() == y.min():
        return 0.0
    if criterion in ("squared_error", "friedman_mse"):
        return float(np.mean((y - y.mean()) ** 2))
    if criterion == "absolute_error":
        return float(np.mean(np.abs(y - np.median(y))))
    mu = y.mean()
    safe = np.where(y > 0, y, 1.0)
    ylogy = np.where(y > 0, safe * (np.log(safe) - np.log(mu)), 0.0)
    return float(np.mean(2.0 * (ylogy - (y - mu))))


def split_improvement(targets: np.ndarray, go_left: np.ndarray, criterion: str) -> float:
    """Weighted impurity decrease of one explicit split (used by the random splitter)."""
    y = np.asarray(targets, dtype=np.float64)
    yl, yr = y[go_left], y[~go_left]
    n, nl, nr = float(len(y)), float(len(yl)), float(len(yr))
    if criterion == "friedman_mse":
        diff = nr * yl.sum() - nl * yr.sum()
        return float(diff * diff / (nl * nr) / (n * n))
    return impurity(y, criterion) - nl / n * impurity(yl, criterion) - nr / n * impurity(yr, criterion)
