"""
Friedman benchmark data
=======================

Draw a replicate, look at how the response depends on the five active
columns, and check that regeneration is bit-for-bit reproducible.
"""

import numpy as np
from hybridsel import datagen

# a scenario is (n, p, noisy, replicate, master seed)
cfg = datagen.ScenarioConfig(n=200, p=10, noisy=True, replicate_index=0, master_seed=42)
ds = datagen.gen_dataset(cfg)
print(ds.X.shape, "true support:", sorted(ds.true_support))

# the noise-free surface at the centre of the cube
print("f(0.5, ..., 0.5) =", datagen.friedman_response([0.5] * 5))

# residuals against the true surface are the N(0, 1) noise
resid = ds.y - datagen.friedman(ds.X)
print("noise mean %.3f  sd %.3f" % (resid.mean(), resid.std(ddof=1)))

# correlation of y with each column: only x1..x5 carry signal
corr = [np.corrcoef(ds.X[:, j], ds.y)[0, 1] for j in range(ds.p)]
for j, c in enumerate(corr, start=1):
    print("x%-2d %+.2f %s" % (j, c, "#" * int(abs(c) * 40)))

# same config, same bytes
assert datagen.gen_dataset(cfg).digest() == ds.digest()

# 80/20 split, seeded
split = datagen.split_train_test(ds, 0.8, seed=1)
print("train", len(split.train_idx), "test", len(split.test_idx))
