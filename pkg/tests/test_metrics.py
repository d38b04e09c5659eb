import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridsel import metrics

S = {1, 2, 3, 4, 5}
ids = st.frozensets(st.integers(1, 30), max_size=30)
supports = st.frozensets(st.integers(1, 30), min_size=1, max_size=30)


@pytest.mark.parametrize("S_hat, jac, rec", [
    ({1, 2, 3, 4, 5}, 1.0, 1.0),
    ({1, 2, 3, 6}, 0.5, 0.6),
    (set(), 0.0, 0.0),
    ({1, 2, 3, 4, 5, 9}, 5 / 6, 1.0),
    ({1, 2, 3}, 0.6, 0.6),
])
def test_support_metric_examples(S_hat, jac, rec):
    assert metrics.jaccard(S, S_hat) == jac
    assert metrics.recovery(S, S_hat) == rec


def test_rmse_examples():
    assert metrics.rmse([1, 2, 3], [1, 2, 3]) == 0.0
    assert metrics.rmse([0, 0], [3, 4]) == math.sqrt(12.5)
    assert metrics.rmse([1.0, -2.0, 5.0], [3.5, 0.5, 7.5]) == 2.5


def test_metric_errors():
    with pytest.raises(ValueError):
        metrics.jaccard(set(), {1})
    with pytest.raises(ValueError):
        metrics.recovery(set(), {1})
    with pytest.raises(ValueError):
        metrics.rmse([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        metrics.rmse([], [])


@given(supports, ids)
def test_support_metric_properties(S_true, S_hat):
    j = metrics.jaccard(S_true, S_hat)
    r = metrics.recovery(S_true, S_hat)
    assert 0.0 <= j <= r <= 1.0
    assert (j == 1.0) == (S_true == S_hat)
    assert j == metrics.jaccard(S_hat, S_true) if S_hat else True
    if S_true <= S_hat:
        assert r == 1.0


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50), st.floats(-1e3, 1e3))
def test_rmse_properties(y, shift):
    y = np.array(y)
    assert metrics.rmse(y, y) == 0.0
    assert metrics.rmse(y, y + shift) == pytest.approx(abs(shift), rel=1e-9, abs=1e-9)
    z = y[::-1]
    assert metrics.rmse(y, z) == metrics.rmse(z, y)


def test_aggregate_examples():
    cell = metrics.aggregate([1.0, 3.0])
    assert (cell.mean, cell.n_sim) == (2.0, 2)
    assert cell.sd == pytest.approx(math.sqrt(2))
    assert cell.format() == "2.00 (1.41)"
    one = metrics.aggregate([0.7])
    assert one.sd == 0.0 and not one.sd_defined
    with pytest.raises(ValueError):
        metrics.aggregate([])


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=40))
def test_aggregate_matches_numpy(values):
    cell = metrics.aggregate(values)
    assert cell.mean == pytest.approx(np.mean(values), abs=1e-6)
    assert cell.sd == pytest.approx(np.std(values, ddof=1), abs=1e-6)


def test_evaluate_triple():
    t = metrics.evaluate(S, {1, 2, 3, 6}, [0.0, 0.0], [3.0, 4.0])
    assert t == metrics.MetricTriple(math.sqrt(12.5), 0.5, 0.6)


def test_consistency_curve():
    pairs = [(50, {1, 2, 3, 4}), (50, S), (1000, S), (1000, S), (1000, {1, 2, 3, 4, 5, 6})]
    assert metrics.consistency_curve(pairs, S) == [(50, 0.5), (1000, 2 / 3)]
    with pytest.raises(ValueError):
        metrics.consistency_curve([(50, S)], S)
