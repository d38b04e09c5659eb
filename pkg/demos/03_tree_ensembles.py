"""
Trees, forests and boosting
===========================

A single CART tree, a bagged forest and the four boosting presets on the
same noisy Friedman data; compare test error and split-gain importance.
"""

import time
import numpy as np
from hybridsel import datagen, trees

train = datagen.gen_dataset(datagen.ScenarioConfig(800, 10, master_seed=3))
test = datagen.gen_dataset(datagen.ScenarioConfig(2000, 10, master_seed=4))


def rmse(model):
    return np.sqrt(np.mean((test.y - model.predict(test.X)) ** 2))


tree = trees.fit_tree(train.X, train.y, trees.TreeParams(max_depth=6))
print("single tree: %d leaves, test rmse %.3f" % (tree.n_leaves, rmse(tree)))

for name in trees.PRESET_NAMES:
    t0 = time.perf_counter()
    model = trees.fit_preset(name, train.X, train.y, seed=0)
    imp = model.importance
    top = np.argsort(-imp)[:5] + 1
    print("%-14s rmse %.3f  top5 %s  (%.2fs)" % (name, rmse(model), top.tolist(),
                                                  time.perf_counter() - t0))

# boosting: training error as trees are added
params = trees.TreeParams(max_depth=3)
for m in (1, 10, 50, 200):
    b = trees.fit_boosting(train.X, train.y, params, n_trees=m, learning_rate=0.1)
    print("boosting %3d trees: train rmse %.3f" % (m, np.sqrt(np.mean((train.y - b.predict(train.X)) ** 2))))
