"""Regression performance measures."""

from __future__ import annotations

import numpy as np

from xaistab.errors import DomainError


def _pair(y, y_hat):
    y = np.asarray(y, dtype=np.float64).ravel()
    y_hat = np.asarray(y_hat, dtype=np.float64).ravel()
    if y.size == 0 or y.shape != y_hat.shape:
        raise DomainError(f"need equal non-empty lengths, got {y.size} and {y_hat.size}")
    return y, y_hat


def mae(y, y_hat) -> float:
    y, y_hat = _pair(y, y_hat)
    return float(np.mean(np.abs(y - y_hat)))


def mse(y, y_hat) -> float:
    y, y_hat = _pair(y, y_hat)
    return float(np.mean((y - y_hat) ** 2))
