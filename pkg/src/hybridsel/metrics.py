"""Prediction and support-recovery metrics, plus replicate aggregation."""
from __future__ import annotations

import dataclasses
from collections import defaultdict
from typing import Iterable

import numpy as np


@dataclasses.dataclass(frozen=True)
class MetricTriple:
    rmse: float
    jaccard: float
    recovery: float


@dataclasses.dataclass(frozen=True)
class AggregateCell:
    mean: float
    sd: float
    n_sim: int

    @property
    def sd_defined(self) -> bool:
        return self.n_sim >= 2

    def format(self, digits: int = 2) -> str:
        return f"{self.mean:.{digits}f} ({self.sd:.{digits}f})"


def rmse(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise ValueError("rmse of empty vectors is undefined")
    return float(np.sqrt(np.mean((y_true - y_pred) ** 2)))


def jaccard(S, S_hat) -> float:
    S, S_hat = set(S), set(S_hat)
    if not S:
        raise ValueError("true support must be non-empty")
    return len(S & S_hat) / len(S | S_hat)


def recovery(S, S_hat) -> float:
    S, S_hat = set(S), set(S_hat)
    if not S:
        raise ValueError("true support must be non-empty")
    return len(S & S_hat) / len(S)


def evaluate(S, S_hat, y_true, y_pred) -> MetricTriple:
    return MetricTriple(rmse(y_true, y_pred), jaccard(S, S_hat), recovery(S, S_hat))


def aggregate(values: Iterable[float]) -> AggregateCell:
    """Mean and sample sd (divisor len - 1; 0 for a single value)."""
    v = np.asarray(list(values), dtype=float)
    if v.size == 0:
        raise ValueError("cannot aggregate an empty sequence")
    sd = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return AggregateCell(float(np.mean(v)), sd, int(v.size))


def consistency_curve(pairs: Iterable[tuple[int, Iterable[int]]], S) -> list[tuple[int, float]]:
    """Empirical P(S_hat == S) per sample size from (n, S_hat) pairs, sorted by n."""
    S = frozenset(S)
    hits = defaultdict(list)
    for n, S_hat in pairs:
        hits[int(n)].append(frozenset(S_hat) == S)
    if len(hits) < 2:
        raise ValueError("consistency curve needs at least two distinct sample sizes")
    return [(n, float(np.mean(hits[n]))) for n in sorted(hits)]
