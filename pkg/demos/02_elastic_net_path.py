"""
Elastic net along a lambda path
===============================

Fit lasso, ridge and the 50/50 mix by coordinate descent, watch variables
enter as lambda falls, and let 5-fold CV pick lambda_min.
"""

import numpy as np
from hybridsel import datagen, linear
from hybridsel.verify import kkt_residual

ds = datagen.gen_dataset(datagen.ScenarioConfig(300, 20, master_seed=1))
X, y = ds.X, ds.y

path = linear.lambda_path(X, y, alpha=1.0)
print("lambda_max %.4f, lambda_min of grid %.6f" % (path[0], path[-1]))

fits = linear.fit_path(X, y, 1.0, path)
# number of active variables at a few points on the path
for i in (0, 10, 25, 50, 99):
    print("lambda %.5f  active %2d" % (path[i], np.count_nonzero(fits[i].beta)))

# entry order: the strongest linear signals come in first
entered = []
for f in fits:
    for j in np.flatnonzero(f.beta):
        if j + 1 not in entered:
            entered.append(int(j) + 1)
print("entry order:", entered[:8])

# optimality check on one fit
print("KKT violation at path[30]: %.2e" % kkt_residual(X, y, fits[30]))

for name, alpha in (("ridge", 0.0), ("lasso", 1.0), ("enet", 0.5)):
    cv = linear.cv_select_lambda(X, y, alpha, k=5, seed=7)
    print("%-5s lambda_min %.5f  cv mse %.3f" % (name, cv.lambda_min, cv.cv_mse.min()))
