import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridsel import linear
from hybridsel.linear import PenaltySpec
from hybridsel.verify import kkt_residual, ols_normal_equations, ridge_closed_form


def _instance(seed, n, p, noise=1.0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, p))
    beta = np.zeros(p)
    beta[: min(3, p)] = [4.0, -3.0, 2.0][: min(3, p)]
    return X, X @ beta + noise * rng.normal(size=n)


def test_standardize_examples():
    X = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
    std = linear.standardize(X)
    assert std.means[0] == 2.0
    assert std.scales[0] == pytest.approx(math.sqrt(2 / 3))
    assert std.X[:, 0].mean() == pytest.approx(0.0)
    assert std.constant.tolist() == [False, True]
    assert std.scales[1] == 1.0 and np.all(std.X[:, 1] == 0.0)


def test_standardize_idempotent():
    X, _ = _instance(0, 40, 6)
    once = linear.standardize(X).X
    twice = linear.standardize(once).X
    assert np.allclose(once, twice, atol=1e-12)
    assert np.allclose(once.std(axis=0), 1.0)


@pytest.mark.parametrize("z, g, out", [(3, 1, 2), (-0.5, 1, 0), (-4, 1.5, -2.5), (0.7, 0, 0.7)])
def test_soft_threshold_examples(z, g, out):
    assert linear.soft_threshold(z, g) == pytest.approx(out)


@given(st.floats(-1e6, 1e6), st.floats(0, 1e6))
def test_soft_threshold_properties(z, g):
    s = linear.soft_threshold(z, g)
    assert abs(s) <= abs(z)
    assert s == 0 or np.sign(s) == np.sign(z)
    assert abs(s) == pytest.approx(max(abs(z) - g, 0.0), abs=1e-6)


def test_ridge_matches_closed_form():
    rng = np.random.default_rng(7)
    X, y = rng.normal(size=(6, 3)), rng.normal(size=6)
    fit = linear.fit_enet(X, y, PenaltySpec(0.0, 0.05), tol=1e-12)
    oracle = ridge_closed_form(X, y, 0.05)
    assert np.max(np.abs(fit.beta * X.std(0) - oracle)) <= 1e-6


def test_zero_penalty_matches_ols():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(20, 4))
    y = X @ np.array([1.0, -2.0, 0.5, 3.0]) + rng.normal(size=20)
    b0, b = ols_normal_equations(X, y)
    for alpha in (0.0, 0.5, 1.0):
        fit = linear.fit_enet(X, y, PenaltySpec(alpha, 0.0), tol=1e-10)
        assert np.max(np.abs(fit.beta - b)) <= 1e-6
        assert abs(fit.intercept - b0) <= 1e-6


def test_lasso_null_model_above_lambda_max():
    X, y = _instance(1, 50, 8)
    lmax = linear.lambda_max(X, y, 1.0)
    Xs = linear.standardize(X).X
    assert lmax == pytest.approx(np.max(np.abs(Xs.T @ (y - y.mean()))) / 50)
    for lam in (lmax, 2 * lmax):
        fit = linear.fit_enet(X, y, PenaltySpec(1.0, lam))
        assert np.all(fit.beta == 0.0)
        assert fit.intercept == pytest.approx(y.mean())


def test_nan_input_rejected():
    X, y = _instance(2, 20, 3)
    X[3, 1] = np.nan
    with pytest.raises(ValueError):
        linear.fit_enet(X, y, PenaltySpec(1.0, 0.1))


def test_non_convergence_is_flagged_not_raised():
    X, y = _instance(3, 60, 10)
    fit = linear.fit_enet(X, y, PenaltySpec(1.0, 1e-4), max_iter=1)
    assert not fit.converged and fit.iterations == 1


def test_penalty_spec_validation():
    with pytest.raises(ValueError):
        PenaltySpec(1.5, 0.1)
    with pytest.raises(ValueError):
        PenaltySpec(0.5, -1.0)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("alpha", [1.0, 0.5, 0.1])
def test_kkt_conditions(seed, alpha):
    X, y = _instance(100 + seed, 60, 15)
    lmax = linear.lambda_max(X, y, alpha)
    for frac in (0.5, 0.1, 0.01):
        fit = linear.fit_enet(X, y, PenaltySpec(alpha, frac * lmax))
        assert fit.converged
        assert kkt_residual(X, y, fit) <= 1e-4


def test_objective_non_increasing_per_sweep():
    X, y = _instance(5, 50, 20)
    pen = PenaltySpec(0.5, 0.02)
    fit = linear.fit_enet(X, y, pen, max_iter=1)
    prev = linear.enet_objective(X, y, fit)
    for _ in range(30):
        fit = linear.fit_enet(X, y, pen, max_iter=1, warm_start=fit.beta)
        obj = linear.enet_objective(X, y, fit)
        assert obj <= prev + 1e-12
        prev = obj


@pytest.mark.parametrize("seed", range(5))
def test_warm_path_matches_cold_fits(seed):
    X, y = _instance(200 + seed, 50, 20)
    path = linear.lambda_path(X, y, 1.0, n_lambda=20, ratio=1e-2)
    warm = linear.fit_path(X, y, 1.0, path)
    for lam, w in zip(path, warm):
        cold = linear.fit_enet(X, y, PenaltySpec(1.0, lam))
        assert abs(linear.enet_objective(X, y, w) - linear.enet_objective(X, y, cold)) <= 1e-6


def test_ridge_shrinkage_monotone():
    X, y = _instance(9, 40, 10)
    norms = [np.linalg.norm(linear.fit_enet(X, y, PenaltySpec(0.0, lam)).beta)
             for lam in (0.001, 0.01, 0.1, 1.0, 10.0)]
    assert all(a >= b for a, b in zip(norms, norms[1:]))


def test_lambda_path_grid():
    X, y = _instance(4, 80, 10)
    path = linear.lambda_path(X, y, 1.0, n_lambda=100, ratio=1e-3)
    assert len(path) == 100
    assert path[0] / path[99] == pytest.approx(1000.0, rel=1e-12)
    assert np.all(np.diff(path) < 0)
    first = linear.fit_enet(X, y, PenaltySpec(1.0, path[0]))
    assert np.count_nonzero(first.beta) == 0


def test_lambda_path_alpha_floor():
    X, y = _instance(4, 80, 10)
    lasso = linear.lambda_path(X, y, 1.0)
    ridge = linear.lambda_path(X, y, 0.0)
    assert np.all(np.isfinite(ridge))
    assert ridge[0] == pytest.approx(lasso[0] / 1e-3)


def test_lambda_path_constant_response():
    X, _ = _instance(4, 30, 5)
    with pytest.warns(linear.DegenerateResponseWarning):
        path = linear.lambda_path(X, np.zeros(30), 1.0)
    assert path.tolist() == [0.0]


def test_cv_fold_sizes_and_determinism():
    X, y = _instance(10, 1000, 5)
    a = linear.cv_select_lambda(X, y, 1.0, k=5, seed=3)
    b = linear.cv_select_lambda(X, y, 1.0, k=5, seed=3)
    assert np.bincount(a.fold_assignment).tolist() == [200] * 5
    assert np.array_equal(a.fold_assignment, b.fold_assignment)
    assert a.lambda_min == b.lambda_min
    assert a.lambda_min in a.lambda_path
    assert np.all(np.isfinite(a.cv_mse))
    assert a.cv_mse[a.index_min] == a.cv_mse.min()


def test_cv_exact_linear_signal_selects_x1():
    rng = np.random.default_rng(12)
    X = rng.uniform(size=(100, 6))
    y = 3.0 * X[:, 0]
    cv = linear.cv_select_lambda(X, y, 1.0, k=5, seed=1)
    fit = linear.fit_path(X, y, 1.0, cv.lambda_path[: cv.index_min + 1])[-1]
    assert fit.beta[0] != 0.0
    assert kkt_residual(X, y, fit) <= 1e-4
    assert abs(fit.beta[0]) == np.max(np.abs(fit.beta))


def test_cv_requires_enough_rows():
    X, y = _instance(1, 9, 3)
    with pytest.raises(ValueError):
        linear.cv_select_lambda(X, y, 1.0, k=5)


def test_ols_examples():
    fit = linear.fit_ols(np.array([[1.0], [2.0], [3.0]]), np.array([2.0, 4.0, 6.0]))
    assert fit.intercept == pytest.approx(0.0, abs=1e-12)
    assert fit.beta[0] == pytest.approx(2.0)
    X, _ = _instance(3, 10, 3)
    flat = linear.fit_ols(X, np.full(10, 4.5))
    assert np.allclose(flat.beta, 0.0, atol=1e-12)
    assert flat.intercept == pytest.approx(4.5)


def test_ols_residuals_orthogonal():
    X, y = _instance(13, 30, 5)
    fit = linear.fit_ols(X, y)
    r = y - fit.predict(X)
    assert np.max(np.abs(np.column_stack([np.ones(30), X]).T @ r)) <= 1e-8
    b0, b = ols_normal_equations(X, y)
    assert np.allclose(fit.beta, b, atol=1e-8)


def test_ols_rank_deficient_and_too_wide():
    X, y = _instance(14, 20, 3)
    dup = np.column_stack([X, X[:, 0]])
    fit = linear.fit_ols(dup, y)
    assert fit.rank_deficient
    # minimum-norm solution splits the duplicated coefficient evenly
    assert fit.beta[0] == pytest.approx(fit.beta[3])
    with pytest.raises(ValueError):
        linear.fit_ols(X[:3], y[:3])


def test_predict_linear():
    fit = linear.LinearFit(1.5, np.zeros(3))
    assert np.all(linear.predict_linear(fit, np.ones((4, 3))) == 1.5)
    fit = linear.LinearFit(1.0, np.array([2.0, -3.0, 4.0]))
    eye = np.eye(3)
    assert linear.predict_linear(fit, eye).tolist() == [3.0, -2.0, 5.0]
    with pytest.raises(ValueError):
        linear.predict_linear(fit, np.ones((2, 4)))
    X, y = _instance(15, 25, 3)
    ols = linear.fit_ols(X, y)
    fitted = np.column_stack([np.ones(25), X]) @ np.r_[ols.intercept, ols.beta]
    assert np.allclose(ols.predict(X), fitted, atol=1e-10)


def test_backtransform_reports_original_scale():
    rng = np.random.default_rng(16)
    X = rng.uniform(size=(200, 2)) * np.array([1.0, 100.0]) + np.array([0.0, 50.0])
    y = 2.0 * X[:, 0] + 0.03 * X[:, 1] + 1.0
    fit = linear.fit_enet(X, y, PenaltySpec(1.0, 0.0), tol=1e-12)
    assert np.allclose(fit.beta, [2.0, 0.03], atol=1e-8)
    assert fit.intercept == pytest.approx(1.0, abs=1e-6)


def test_warnings_do_not_leak_from_cv():
    X, _ = _instance(17, 30, 4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        linear.cv_select_lambda(X, np.ones(30), 1.0, k=3)
