"""Least squares and elastic-net regression by cyclic coordinate descent.

Penalized fits minimize

    (1/2n) ||y - b0 - X b||^2 + lam * (alpha * ||b||_1 + (1 - alpha)/2 * ||b||_2^2)

over predictors standardized to mean 0 and population sd 1. The intercept is
never penalized, and coefficients are reported on the original scale.
"""
from __future__ import annotations

import dataclasses
import warnings
from typing import NamedTuple

import numba
import numpy as np

from .datagen import kfold_labels

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 100_000
ALPHA_FLOOR = 1e-3


class DegenerateResponseWarning(UserWarning):
    pass


@dataclasses.dataclass(frozen=True)
class PenaltySpec:
    alpha: float
    lam: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.lam < 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")


@dataclasses.dataclass(eq=False)
class LinearFit:
    intercept: float
    beta: np.ndarray
    penalty: PenaltySpec | None = None
    converged: bool = True
    iterations: int = 0
    rank_deficient: bool = False

    def predict(self, X):
        return predict_linear(self, X)


@dataclasses.dataclass(eq=False)
class CvResult:
    lambda_path: np.ndarray
    cv_mse: np.ndarray
    lambda_min: float
    fold_assignment: np.ndarray

    @property
    def index_min(self) -> int:
        return int(np.flatnonzero(self.lambda_path == self.lambda_min)[0])


class Standardization(NamedTuple):
    X: np.ndarray
    means: np.ndarray
    scales: np.ndarray
    constant: np.ndarray


def standardize(X) -> Standardization:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("standardize needs a 2-d array with at least 2 rows")
    means = X.mean(axis=0)
    scales = X.std(axis=0)
    constant = scales <= 1e-12 * np.maximum(1.0, np.abs(means))
    scales = np.where(constant, 1.0, scales)
    Xs = (X - means) / scales
    Xs[:, constant] = 0.0
    return Standardization(Xs, means, scales, constant)


def soft_threshold(z, gamma):
    if np.any(np.asarray(gamma) < 0):
        raise ValueError("gamma must be non-negative")
    return np.sign(z) * np.maximum(np.abs(z) - gamma, 0.0)


@numba.njit(cache=True)
def _sweep(Xs, r, beta, xsq, l1, l2, n, only_active):
    dmax = 0.0
    for j in range(beta.shape[0]):
        bj = beta[j]
        if only_active and bj == 0.0:
            continue
        if xsq[j] == 0.0:
            continue
        col = Xs[:, j]
        g = 0.0
        for i in range(n):
            g += col[i] * r[i]
        z = g / n + xsq[j] * bj
        a = abs(z) - l1
        new = 0.0
        if a > 0.0:
            new = (a if z > 0.0 else -a) / (xsq[j] + l2)
        d = new - bj
        if d != 0.0:
            for i in range(n):
                r[i] -= d * col[i]
            beta[j] = new
            if abs(d) > dmax:
                dmax = abs(d)
    return dmax


@numba.njit(cache=True)
def _cd_path(Xs, yc, alpha, lambdas, tol, max_iter, beta):
    """Warm-started descent along `lambdas`; `beta` is the starting point."""
    n, p = Xs.shape
    nl = lambdas.shape[0]
    betas = np.zeros((nl, p))
    iters = np.zeros(nl, np.int64)
    conv = np.zeros(nl, np.bool_)
    xsq = np.zeros(p)
    for j in range(p):
        s = 0.0
        for i in range(n):
            s += Xs[i, j] * Xs[i, j]
        xsq[j] = s / n
    r = yc - Xs @ beta
    for k in range(nl):
        lam = lambdas[k]
        l1 = lam * alpha
        l2 = lam * (1.0 - alpha)
        it = 0
        while it < max_iter:
            dmax = _sweep(Xs, r, beta, xsq, l1, l2, n, False)
            it += 1
            if dmax < tol:
                conv[k] = True
                break
            # converge on the active set, then re-check with a full sweep
            while it < max_iter:
                dmax = _sweep(Xs, r, beta, xsq, l1, l2, n, True)
                it += 1
                if dmax < tol:
                    break
        betas[k] = beta
        iters[k] = it
    return betas, iters, conv


def _check_finite(X, y):
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("X and y must be finite (no NaN or inf)")


def _prepare(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: X {X.shape}, y {y.shape}")
    _check_finite(X, y)
    return X, y


def _to_original(std: Standardization, ybar, betas_std):
    betas = betas_std / std.scales
    intercepts = ybar - betas @ std.means
    return intercepts, betas


def fit_path(X, y, alpha, lambdas, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
             warm_start=None) -> list[LinearFit]:
    """Fit every penalty in `lambdas` (in order), each warm-started from the last."""
    X, y = _prepare(X, y)
    lambdas = np.asarray(lambdas, dtype=float)
    for lam in lambdas:
        PenaltySpec(alpha, lam)
    if tol <= 0:
        raise ValueError("tol must be positive")
    std = standardize(X)
    ybar = y.mean()
    beta0 = np.zeros(X.shape[1])
    if warm_start is not None:
        beta0 = np.asarray(warm_start, dtype=float) * std.scales
        beta0[std.constant] = 0.0
    betas_std, iters, conv = _cd_path(np.asfortranarray(std.X), y - ybar, float(alpha),
                                      lambdas, float(tol), int(max_iter), beta0)
    intercepts, betas = _to_original(std, ybar, betas_std)
    return [LinearFit(float(intercepts[k]), betas[k], PenaltySpec(alpha, float(lambdas[k])),
                      bool(conv[k]), int(iters[k]))
            for k in range(lambdas.shape[0])]


def fit_enet(X, y, penalty: PenaltySpec, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
             warm_start=None) -> LinearFit:
    return fit_path(X, y, penalty.alpha, [penalty.lam], tol, max_iter, warm_start)[0]


def enet_objective(X, y, fit: LinearFit) -> float:
    """Penalized objective of `fit`, evaluated on the standardized scale."""
    std = standardize(X)
    beta_std = fit.beta * std.scales
    y = np.asarray(y, dtype=float)
    r = y - y.mean() - std.X @ beta_std
    a, lam = fit.penalty.alpha, fit.penalty.lam
    return (0.5 * r @ r / len(y)
            + lam * (a * np.abs(beta_std).sum() + 0.5 * (1 - a) * beta_std @ beta_std))


def lambda_max(X, y, alpha) -> float:
    X, y = _prepare(X, y)
    Xs = standardize(X).X
    return float(np.max(np.abs(Xs.T @ (y - y.mean()))) / (len(y) * max(alpha, ALPHA_FLOOR)))


def lambda_path(X, y, alpha, n_lambda=100, ratio=1e-3) -> np.ndarray:
    """Descending geometric grid from lambda_max down to lambda_max * ratio.

    A response with no variation gives the single-point path [0.0] and a
    DegenerateResponseWarning.
    """
    if n_lambda < 2:
        raise ValueError("n_lambda must be at least 2")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    lmax = lambda_max(X, y, alpha)
    if lmax == 0.0:
        warnings.warn("response has no variation; lambda path collapses to [0]",
                      DegenerateResponseWarning, stacklevel=2)
        return np.array([0.0])
    path = lmax * np.power(ratio, np.arange(n_lambda) / (n_lambda - 1))
    path[0], path[-1] = lmax, lmax * ratio
    return path


def cv_select_lambda(X, y, alpha, k=5, seed=0, n_lambda=100, ratio=1e-3,
                     tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> CvResult:
    X, y = _prepare(X, y)
    n = X.shape[0]
    folds = kfold_labels(n, k, seed)
    if np.min(np.bincount(folds, minlength=k)) < 2:
        raise ValueError("every fold needs at least 2 observations")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateResponseWarning)
        path = lambda_path(X, y, alpha, n_lambda, ratio)
    fold_mse = np.empty((k, path.shape[0]))
    for f in range(k):
        held = folds == f
        fits = fit_path(X[~held], y[~held], alpha, path, tol, max_iter)
        b0 = np.array([fit.intercept for fit in fits])
        B = np.stack([fit.beta for fit in fits])
        resid = y[held, None] - (X[held] @ B.T + b0)
        fold_mse[f] = np.mean(resid ** 2, axis=0)
    cv_mse = fold_mse.mean(axis=0)
    # argmin takes the first minimum, i.e. the largest lambda on ties
    best = int(np.argmin(cv_mse))
    return CvResult(path, cv_mse, float(path[best]), folds)


def fit_ols(X, y) -> LinearFit:
    """Least squares with an intercept; minimum-norm solution if rank deficient."""
    X, y = _prepare(X, y)
    n, q = X.shape
    if n <= q:
        raise ValueError(f"OLS needs more rows than columns, got {n} x {q}")
    xbar, ybar = X.mean(axis=0), y.mean()
    beta, _, rank, _ = np.linalg.lstsq(X - xbar, y - ybar, rcond=None)
    return LinearFit(float(ybar - xbar @ beta), beta, rank_deficient=bool(rank < q))


def predict_linear(fit: LinearFit, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != fit.beta.shape[0]:
        raise ValueError(f"X has {X.shape[-1]} columns, fit has {fit.beta.shape[0]}")
    return fit.intercept + X @ fit.beta
