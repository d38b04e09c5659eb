import csv
import math

import pytest

from hybridsel import harness
from hybridsel.harness import GridConfig, Scenario


@pytest.fixture(scope="module")
def small_grid(tmp_path_factory):
    out = tmp_path_factory.mktemp("grid")
    cfg = GridConfig(n_list=(50, 100), p_list=(5,), n_sim=2, master_seed=7, out_dir=str(out))
    return cfg, harness.run_grid(cfg)


def test_enumerates_23_algorithms_in_order():
    algos = harness.enumerate_algorithms()
    ids = [a.id for a in algos]
    assert len(ids) == 23 == len(set(ids))
    assert ids[:8] == ["ridge", "lasso", "enet", "rf", "xgb_like", "lgbm_like",
                       "catboost_like", "h2o_like"]
    assert ids[8:13] == ["rf_ridge", "xgb_like_ridge", "lgbm_like_ridge",
                         "catboost_like_ridge", "h2o_like_ridge"]
    fams = [a.family for a in algos]
    assert fams.count("regularized") == 3 and fams.count("blackbox") == 5
    assert fams.count("hybrid") == 15


def test_grid_config_validation():
    with pytest.raises(ValueError):
        GridConfig(n_list=(5,))
    with pytest.raises(ValueError):
        GridConfig(p_list=(4,))
    with pytest.raises(ValueError):
        GridConfig(n_sim=0)


def test_grid_record_count_and_order(small_grid):
    cfg, res = small_grid
    assert len(res.records) == 2 * 1 * 2 * 23
    assert res.n_failed == 0
    keys = [r.sort_key for r in res.records]
    assert keys == sorted(keys)


def test_raw_csv_format(small_grid):
    cfg, res = small_grid
    with open(res.raw_path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == harness.RAW_HEADER
    first = dict(zip(rows[0], rows[1]))
    assert first["algorithm"] == "ridge" and first["noisy"] == "1" and first["failed"] == "0"
    assert len(first["rmse"].split(".")[1]) == 6
    assert all(v.isdigit() for v in first["selected_vars"].split(";"))
    back = harness.read_raw_csv(res.raw_path)
    assert [(r.algorithm, r.replicate, r.selected) for r in back] == \
        [(r.algorithm, r.replicate, r.selected) for r in res.records]


def test_side_files_written(small_grid):
    cfg, res = small_grid
    out = res.raw_path.parent
    for name, header in (("timing.csv", harness.TIMING_HEADER),
                         ("diagnostics.csv", harness.DIAGNOSTIC_HEADER),
                         ("tradeoff.csv", harness.TRADEOFF_HEADER)):
        with open(out / name) as fh:
            assert next(csv.reader(fh)) == header
    diag = (out / "diagnostics.csv").read_text().splitlines()
    assert len(diag) - 1 == 2 * 2 * 5  # black-box rows only


def test_shared_dataset_and_hybrid_inheritance(small_grid):
    _, res = small_grid
    by_rep = {}
    for r in res.records:
        by_rep.setdefault((r.n, r.replicate), []).append(r)
    for rows in by_rep.values():
        assert len({r.data_digest for r in rows}) == 1
        sel = {r.algorithm: r for r in rows if r.family == "regularized"}
        for r in rows:
            if r.family == "hybrid":
                s = sel[r.algorithm.rsplit("_", 1)[1]]
                assert (r.jaccard, r.recovery, r.selected) == (s.jaccard, s.recovery, s.selected)


def test_worker_count_does_not_change_raw_csv(tmp_path):
    outs = []
    for workers in (1, 2):
        cfg = GridConfig(n_list=(50,), p_list=(5, 10), n_sim=2, master_seed=3, workers=workers,
                         out_dir=str(tmp_path / f"w{workers}"))
        outs.append(harness.run_grid(cfg).raw_path.read_bytes())
    assert outs[0] == outs[1]


def test_wide_small_cell_runs_without_failures():
    cfg = GridConfig(n_list=(50,), p_list=(100,), n_sim=1, master_seed=1)
    records = harness.run_replicate(Scenario(50, 100), 0, cfg)
    assert len(records) == 23
    assert not any(r.failed for r in records), [r.fail_reason for r in records if r.failed]
    assert all(math.isfinite(r.rmse) for r in records)
    assert all(len(r.selected) <= 10 for r in records)


def test_run_cell_matches_replicate_row():
    cfg = GridConfig(master_seed=5)
    sc = Scenario(50, 5)
    full = {r.algorithm: r for r in harness.run_replicate(sc, 0, cfg)}
    single = harness.run_cell(sc, "xgb_like_lasso", 0, cfg)
    ref = full["xgb_like_lasso"]
    assert (single.rmse, single.selected) == (ref.rmse, ref.selected)


def _rec(alg, n, value, rep=0, family="regularized"):
    return harness.RunRecord(n, 5, True, alg, family, rep, value, value, value, 1, (1,), "d")


def test_summarize_example_and_best_marking():
    recs = [_rec("ridge", 50, 1.0, 0), _rec("ridge", 50, 3.0, 1),
            _rec("lasso", 50, 0.5, 0), _rec("lasso", 50, 0.7, 1)]
    rm = harness.summarize(recs, "rmse")
    assert rm.cells[("ridge", 50)].format() == "2.00 (1.41)"
    assert rm.best[50] == "lasso"
    assert harness.summarize(recs, "jaccard").best[50] == "ridge"
    text = rm.render_text()
    assert "*0.60 (0.14)" in text and "2.00 (1.41)" in text
    assert rm.to_csv().splitlines()[0] == "metric,algorithm,n,mean,sd,n_sim,best"


def test_summarize_filters_and_errors():
    recs = [_rec("ridge", 50, 1.0)]
    with pytest.raises(ValueError, match="available"):
        harness.summarize(recs, "rmse", p_filter=[100])
    with pytest.raises(ValueError):
        harness.summarize(recs, "r2")


def test_failed_records_are_excluded_and_serialized(tmp_path):
    ok = _rec("ridge", 50, 1.0)
    bad = harness.RunRecord(50, 5, True, "lasso", "regularized", 0, float("nan"),
                            float("nan"), float("nan"), 0, (), "d", True, "ValueError: boom")
    s = harness.summarize([ok, bad], "rmse")
    assert ("lasso", 50) not in s.cells
    path = tmp_path / "raw.csv"
    harness.write_raw_csv([ok, bad], path)
    back = harness.read_raw_csv(path)
    assert back[1].failed and back[1].fail_reason == "ValueError: boom"
    assert math.isnan(back[1].rmse)


def test_read_raw_csv_rejects_foreign_files(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        harness.read_raw_csv(path)


def test_tradeoff_points():
    recs = [_rec("ridge", 50, 1.5), _rec("rf", 50, 0.25, family="blackbox")]
    text = harness.emit_tradeoff_points(recs)
    assert text.splitlines() == ["family,algorithm,rmse,jaccard",
                                 "Regularized,ridge,1.500000,1.500000",
                                 "Black-Box,rf,0.250000,0.250000"]
    with pytest.raises(ValueError):
        harness.emit_tradeoff_points([])
