"""Variable ranking, forward subset-size search and the three pipeline families.

A pipeline turns a split dataset into a chosen support S_hat and a test RMSE:

* regularized: CV-tuned elastic net -> rank by |beta| -> forward OLS search
  -> OLS refit on S_hat;
* black-box: ensemble on all columns -> rank by importance (top 10) ->
  forward search with the same ensemble -> refit on S_hat;
* hybrid: the regularized S_hat, with an ensemble fit on those columns only.

All candidate subset sizes share one fold assignment.
"""
from __future__ import annotations

import dataclasses
from typing import Callable

import numpy as np

from . import linear, trees
from .datagen import SimDataset, kfold_labels, mix_seed
from .metrics import rmse

MAX_SUBSET = 10
SELECTOR_ALPHA = {"ridge": 0.0, "lasso": 1.0, "enet": 0.5}

# fit on (X_train, y_train), predict X_test; last argument is a seed
Evaluator = Callable[[np.ndarray, np.ndarray, np.ndarray, int], np.ndarray]


@dataclasses.dataclass(frozen=True)
class RankedSet:
    order: tuple[int, ...]
    scores: tuple[float, ...]
    source: str

    def __post_init__(self):
        if len(set(self.order)) != len(self.order):
            raise ValueError("ranking has duplicate identifiers")
        if len(self.order) != len(self.scores):
            raise ValueError("order and scores differ in length")

    @property
    def null_model(self) -> bool:
        return len(self.order) == 0

    def __len__(self):
        return len(self.order)


@dataclasses.dataclass(frozen=True)
class SubsetChoice:
    m_star: int
    selected: tuple[int, ...]
    cv_rmse_by_m: tuple[float, ...]
    ranking: RankedSet

    @property
    def null_model(self) -> bool:
        return self.m_star == 0

    @property
    def support(self) -> frozenset:
        return frozenset(self.selected)

    def columns(self) -> np.ndarray:
        return np.asarray(self.selected, dtype=np.int64) - 1


@dataclasses.dataclass(frozen=True)
class HybridSpec:
    selector: str
    predictor: str

    def __post_init__(self):
        if self.selector not in SELECTOR_ALPHA:
            raise ValueError(f"unknown selector {self.selector!r}")
        if self.predictor not in trees.PRESET_NAMES:
            raise ValueError(f"unknown predictor {self.predictor!r}")

    @property
    def id(self) -> str:
        return f"{self.predictor}_{self.selector}"


def hybrid_specs() -> list[HybridSpec]:
    return [HybridSpec(s, p) for s in SELECTOR_ALPHA for p in trees.PRESET_NAMES]


@dataclasses.dataclass(frozen=True)
class PipelineResult:
    choice: SubsetChoice
    rmse: float
    # test RMSE of the model fit on every column (black-box pipelines only)
    rmse_all_vars: float | None = None


def _rank(scores: np.ndarray, source: str, limit: int | None) -> RankedSet:
    scores = np.asarray(scores, dtype=float)
    ids = np.arange(1, scores.shape[0] + 1)
    keep = scores > 0
    ids, scores = ids[keep], scores[keep]
    order = np.lexsort((ids, -scores))
    if limit is not None:
        order = order[:limit]
    return RankedSet(tuple(int(i) for i in ids[order]),
                     tuple(float(s) for s in scores[order]), source)


def rank_by_coefficient(fit: linear.LinearFit) -> RankedSet:
    """Identifiers by |beta| descending (ties: lower id first); zeros dropped."""
    if fit.beta.shape[0] < 2:
        raise ValueError("ranking needs at least two coefficients")
    return _rank(np.abs(fit.beta), "coefficient", None)


def rank_by_importance(importance, limit: int = MAX_SUBSET) -> RankedSet:
    importance = np.asarray(importance, dtype=float)
    if importance.shape[0] < 2:
        raise ValueError("ranking needs at least two importances")
    if np.any(importance < 0):
        raise ValueError("importances must be non-negative")
    return _rank(importance, "importance", limit)


def ols_evaluator(X_train, y_train, X_test, seed=0):
    return linear.fit_ols(X_train, y_train).predict(X_test)


def ensemble_evaluator(spec: trees.EnsemblePreset | str) -> Evaluator:
    spec = trees.preset(spec) if isinstance(spec, str) else spec

    def evaluate(X_train, y_train, X_test, seed=0):
        return trees.fit_preset(spec, X_train, y_train, seed).predict(X_test)

    return evaluate


def forward_subset_select(ranked: RankedSet, X, y, evaluator: Evaluator, k: int = 5,
                          seed: int = 0) -> SubsetChoice:
    """Score each ranking prefix by k-fold CV RMSE; keep the best (smallest on ties).

    CV RMSE for a prefix is the mean over folds of the held-out RMSE.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if ranked.null_model:
        return SubsetChoice(0, (), (), ranked)
    m_max = min(MAX_SUBSET, p - 1, len(ranked))
    if m_max < 1:
        raise ValueError(f"no admissible subset size for p={p}")
    folds = kfold_labels(n, k, mix_seed(seed, "cv-folds"))
    model_seed = mix_seed(seed, "model")
    cols = np.asarray(ranked.order, dtype=np.int64) - 1
    scores = []
    for m in range(1, m_max + 1):
        Xm = X[:, cols[:m]]
        fold_rmse = []
        for f in range(k):
            held = folds == f
            pred = evaluator(Xm[~held], y[~held], Xm[held], model_seed)
            fold_rmse.append(rmse(y[held], pred))
        scores.append(float(np.mean(fold_rmse)))
    m_star = int(np.argmin(scores)) + 1
    return SubsetChoice(m_star, ranked.order[:m_star], tuple(scores), ranked)


def _require_split(ds: SimDataset):
    if not ds.is_split:
        raise ValueError("dataset has no train/test split")


def select_regularized(ds: SimDataset, alpha: float, k: int = 5, seed: int = 0) -> SubsetChoice:
    """Selector half of the regularized pipeline, on the training rows only."""
    _require_split(ds)
    X, y = ds.train()
    cv = linear.cv_select_lambda(X, y, alpha, k, mix_seed(seed, "lambda-folds"))
    fit = linear.fit_path(X, y, alpha, cv.lambda_path[:cv.index_min + 1])[-1]
    ranked = rank_by_coefficient(fit)
    return forward_subset_select(ranked, X, y, ols_evaluator, k, mix_seed(seed, "subset"))


def _intercept_only_rmse(ds: SimDataset) -> float:
    _, y_train = ds.train()
    _, y_test = ds.test()
    return rmse(y_test, np.full_like(y_test, y_train.mean()))


def run_regularized_pipeline(ds: SimDataset, alpha: float, k: int = 5,
                             seed: int = 0) -> PipelineResult:
    choice = select_regularized(ds, alpha, k, seed)
    if choice.null_model:
        return PipelineResult(choice, _intercept_only_rmse(ds))
    cols = choice.columns()
    X, y = ds.train()
    X_test, y_test = ds.test()
    fit = linear.fit_ols(X[:, cols], y)
    return PipelineResult(choice, rmse(y_test, fit.predict(X_test[:, cols])))


def run_blackbox_pipeline(ds: SimDataset, preset_name: str, k: int = 5,
                          seed: int = 0) -> PipelineResult:
    _require_split(ds)
    spec = trees.preset(preset_name)
    X, y = ds.train()
    X_test, y_test = ds.test()
    full = trees.fit_preset(spec, X, y, mix_seed(seed, "full"))
    rmse_all = rmse(y_test, full.predict(X_test))
    ranked = rank_by_importance(full.importance)
    choice = forward_subset_select(ranked, X, y, ensemble_evaluator(spec), k,
                                   mix_seed(seed, "subset"))
    if choice.null_model:
        return PipelineResult(choice, _intercept_only_rmse(ds), rmse_all)
    cols = choice.columns()
    final = trees.fit_preset(spec, X[:, cols], y, mix_seed(seed, "final"))
    return PipelineResult(choice, rmse(y_test, final.predict(X_test[:, cols])), rmse_all)


def run_hybrid_pipeline(ds: SimDataset, spec: HybridSpec, k: int = 5, seed: int = 0,
                        selector_choice: SubsetChoice | None = None) -> PipelineResult:
    """Fit the predictor preset on the selector's S_hat.

    `seed` is the selector's seed: with the same seed the selection equals the
    one made by `run_regularized_pipeline`. A precomputed `selector_choice`
    skips the selection step.
    """
    if selector_choice is None:
        selector_choice = select_regularized(ds, SELECTOR_ALPHA[spec.selector], k, seed)
    if selector_choice.null_model:
        return PipelineResult(selector_choice, _intercept_only_rmse(ds))
    cols = selector_choice.columns()
    X, y = ds.train()
    X_test, y_test = ds.test()
    model = trees.fit_preset(spec.predictor, X[:, cols], y,
                             mix_seed(seed, f"hybrid:{spec.predictor}"))
    return PipelineResult(selector_choice, rmse(y_test, model.predict(X_test[:, cols])))
