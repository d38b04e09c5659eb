"""
Selecting variables three ways
==============================

On one replicate, run a regularized selector, a black-box selector and a
hybrid that hands the regularized subset to a boosted ensemble.
"""

from hybridsel import datagen, selection

ds = datagen.gen_dataset(datagen.ScenarioConfig(500, 50, master_seed=42))
ds = datagen.split_train_test(ds, 0.8, seed=0)
S = datagen.TRUE_SUPPORT

lasso = selection.run_regularized_pipeline(ds, alpha=1.0, k=5, seed=1)
print("lasso ranking (first 10):", lasso.choice.ranking.order[:10])
print("cv rmse by subset size:", ["%.2f" % v for v in lasso.choice.cv_rmse_by_m])
print("lasso picks", sorted(lasso.choice.selected), "test rmse %.3f" % lasso.rmse)

bb = selection.run_blackbox_pipeline(ds, "h2o_like", k=5, seed=2)
print("h2o_like picks", sorted(bb.choice.selected),
      "test rmse %.3f (all columns %.3f)" % (bb.rmse, bb.rmse_all_vars))

spec = selection.HybridSpec("lasso", "h2o_like")
hyb = selection.run_hybrid_pipeline(ds, spec, k=5, seed=1, selector_choice=lasso.choice)
print(spec.id, "uses", sorted(hyb.choice.selected), "test rmse %.3f" % hyb.rmse)

for name, res in (("lasso", lasso), ("h2o_like", bb), (spec.id, hyb)):
    sel = set(res.choice.selected)
    print("%-16s jaccard %.2f  recovery %.2f" % (name, len(S & sel) / len(S | sel),
                                                 len(S & sel) / len(S)))
