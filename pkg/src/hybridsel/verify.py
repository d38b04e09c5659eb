"""Independent numerical oracles for the solvers.

Each suite compares an implementation against a route that shares none of
its code: closed-form ridge by direct solve, least squares by the normal
equations, optimality (KKT) conditions of the elastic net, exhaustive split
search in plain numpy, and hand-computed metric values.
"""
from __future__ import annotations

import dataclasses
import math
import time
from typing import Callable

import numpy as np

from . import linear, trees
from .metrics import jaccard, recovery, rmse


@dataclasses.dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _rng(seed):
    return np.random.default_rng(seed)


def ridge_closed_form(X, y, lam):
    """(Xs'Xs + n lam I)^-1 Xs'(y - ybar) on standardized X; standardized scale."""
    Xs = (X - X.mean(0)) / X.std(0)
    n, p = Xs.shape
    return np.linalg.solve(Xs.T @ Xs + n * lam * np.eye(p), Xs.T @ (y - y.mean()))


def ols_normal_equations(X, y):
    A = np.column_stack([np.ones(len(y)), X])
    coef = np.linalg.solve(A.T @ A, A.T @ y)
    return coef[0], coef[1:]


def kkt_residual(X, y, fit: linear.LinearFit) -> float:
    """Largest violation of the elastic-net optimality conditions (standardized scale)."""
    mu, sd = X.mean(0), X.std(0)
    Xs = (X - mu) / sd
    b = fit.beta * sd
    n = len(y)
    r = y - y.mean() - Xs @ b
    a, lam = fit.penalty.alpha, fit.penalty.lam
    grad = Xs.T @ r / n - lam * (1 - a) * b
    active = b != 0
    viol = np.zeros_like(b)
    viol[active] = np.abs(grad[active] - lam * a * np.sign(b[active]))
    viol[~active] = np.maximum(np.abs(grad[~active]) - lam * a, 0.0)
    return float(viol.max())


def exhaustive_best_split(X, y, min_leaf=1):
    """Best (gain, feature, threshold) over every feature and midpoint threshold."""
    n, p = X.shape
    parent = ((y - y.mean()) ** 2).sum()
    best = (0.0, -1, np.nan)
    for j in range(p):
        u = np.unique(X[:, j])
        for t in (u[:-1] + u[1:]) / 2:
            mask = X[:, j] <= t
            nl = mask.sum()
            if nl < min_leaf or n - nl < min_leaf:
                continue
            yl, yr = y[mask], y[~mask]
            gain = parent - ((yl - yl.mean()) ** 2).sum() - ((yr - yr.mean()) ** 2).sum()
            if gain > best[0] + 1e-9 * max(1.0, parent):
                best = (gain, j, t)
    return best


def check_ridge(n_instances=20, tol=1e-6):
    worst = 0.0
    for s in range(n_instances):
        rng = _rng(1000 + s)
        X = rng.normal(size=(6, 3))
        y = rng.normal(size=6)
        lam = 0.1
        fit = linear.fit_enet(X, y, linear.PenaltySpec(0.0, lam), tol=1e-12)
        oracle = ridge_closed_form(X, y, lam)
        worst = max(worst, np.max(np.abs(fit.beta * X.std(0) - oracle)))
    return worst <= tol, f"max |beta - closed form| = {worst:.2e} (tol {tol:g})"


def check_ols(n_instances=20, tol=1e-6):
    worst = 0.0
    for s in range(n_instances):
        rng = _rng(2000 + s)
        X = rng.normal(size=(20, 4))
        y = X @ rng.normal(size=4) + rng.normal(size=20)
        b0, b = ols_normal_equations(X, y)
        for fit in (linear.fit_enet(X, y, linear.PenaltySpec(1.0, 0.0), tol=1e-12),
                    linear.fit_ols(X, y)):
            worst = max(worst, np.max(np.abs(fit.beta - b)), abs(fit.intercept - b0))
    return worst <= tol, f"max |coef - normal equations| = {worst:.2e} (tol {tol:g})"


def check_kkt(n_instances=50, tol=1e-4):
    worst = 0.0
    for s in range(n_instances):
        rng = _rng(3000 + s)
        n, p = 30 + s, 8 + s % 13
        X = rng.uniform(size=(n, p))
        y = X[:, :3] @ np.array([3.0, -2.0, 1.0]) + rng.normal(size=n)
        alpha = (1.0, 0.5, 0.2)[s % 3]
        lmax = linear.lambda_max(X, y, alpha)
        fit = linear.fit_enet(X, y, linear.PenaltySpec(alpha, lmax * 10 ** (-rng.uniform(0.3, 2))))
        worst = max(worst, kkt_residual(X, y, fit))
    return worst <= tol, f"max KKT violation = {worst:.2e} over {n_instances} fits (tol {tol:g})"


def check_split(n_instances=100):
    mismatches = []
    for s in range(n_instances):
        rng = _rng(4000 + s)
        n, p = int(rng.integers(5, 51)), int(rng.integers(1, 5))
        X = rng.uniform(size=(n, p))
        if s % 4 == 0:
            X = np.round(X * 6) / 6  # ties
        y = rng.normal(size=n) + 3 * (X[:, 0] > 0.5)
        min_leaf = 1 + s % 3
        gain, _, _ = exhaustive_best_split(X, y, min_leaf)
        tree = trees.fit_tree(X, y, trees.TreeParams(max_depth=1, min_leaf=min_leaf,
                                                     split_candidates=None), seed=s)
        got = tree.training_gain.sum()
        if not math.isclose(got, gain, rel_tol=1e-9, abs_tol=1e-9):
            mismatches.append((s, got, gain))
    ok = not mismatches
    detail = f"{n_instances - len(mismatches)}/{n_instances} root splits match exhaustive search"
    return ok, detail


def check_metrics():
    S = {1, 2, 3, 4, 5}
    cases = [
        jaccard(S, S) == 1.0,
        jaccard(S, {1, 2, 3, 6}) == 0.5,
        jaccard(S, set()) == 0.0,
        recovery(S, {1, 2, 3, 4, 5, 9}) == 1.0,
        recovery(S, {1, 2, 3}) == 0.6,
        recovery(S, set()) == 0.0,
        rmse([1, 2, 3], [1, 2, 3]) == 0.0,
        rmse([0, 0], [3, 4]) == math.sqrt(12.5),
        rmse([1.0, -2.0, 5.0], [3.5, 0.5, 7.5]) == 2.5,
    ]
    return all(cases), f"{sum(cases)}/{len(cases)} metric identities hold exactly"


SUITES: dict[str, Callable[[], tuple[bool, str]]] = {
    "ridge": check_ridge,
    "ols": check_ols,
    "kkt": check_kkt,
    "split-oracle": check_split,
    "metrics": check_metrics,
}


def run_suites(only=None) -> list[CheckResult]:
    names = list(SUITES) if not only else list(only)
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; available: {', '.join(SUITES)}")
    out = []
    for name in names:
        start = time.perf_counter()
        try:
            passed, detail = SUITES[name]()
        except Exception as exc:  # a crashing oracle is a failed check
            passed, detail = False, f"error: {type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(passed), detail, time.perf_counter() - start))
    return out
