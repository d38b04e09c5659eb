"""CART regression trees, bagged forests and least-squares gradient boosting.

Features are binned once per fit against candidate thresholds (midpoints
between consecutive distinct training values, thinned to `split_candidates`
evenly spaced quantiles when there are more). A split "x <= t" is searched
with per-node histograms over the bins. Ties in split gain resolve to the
lowest feature index, then the lowest threshold.

Randomness inside the kernels (bootstrap rows, boosting subsamples, feature
subsets per node) comes from SplitMix64, seeded per tree from the ensemble
seed, so a given seed reproduces a model bit for bit.
"""
from __future__ import annotations

import dataclasses
import math

import numba
import numpy as np

PRESET_NAMES = ("rf", "xgb_like", "lgbm_like", "catboost_like", "h2o_like")


@dataclasses.dataclass(frozen=True)
class TreeParams:
    """Tree growth settings.

    `mtry` is a count, a fraction of the columns (rounded up), or None for all
    columns. `split_candidates=None` searches every midpoint (exhaustive mode).
    """

    max_depth: int = 6
    min_leaf: int = 1
    mtry: int | float | None = None
    split_candidates: int | None = 32

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.split_candidates is not None and self.split_candidates < 1:
            raise ValueError("split_candidates must be >= 1 or None")

    def resolve_mtry(self, p: int) -> int:
        m = self.mtry
        if m is None:
            k = p
        elif isinstance(m, float):
            if not 0.0 < m <= 1.0:
                raise ValueError("fractional mtry must lie in (0, 1]")
            k = math.ceil(m * p - 1e-9)
        else:
            k = int(m)
        if not 1 <= k <= p:
            raise ValueError(f"mtry resolves to {k}, outside [1, {p}]")
        return k


@dataclasses.dataclass(frozen=True, eq=False)
class RegressionTree:
    """One tree in array form. Leaves have feature == -1."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    training_gain: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def predict(self, X) -> np.ndarray:
        X = _check_X(X, self.training_gain.shape[0])
        return _predict_flat(X, self.feature, self.threshold, self.left, self.right,
                             self.value, np.array([0, self.n_nodes]), 1.0, 0.0, False)


@dataclasses.dataclass(eq=False)
class EnsembleModel:
    """Trees stored back to back; tree t owns nodes offsets[t]:offsets[t+1]."""

    kind: str
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    offsets: np.ndarray
    gain: np.ndarray
    learning_rate: float = 1.0
    base_prediction: float = 0.0

    @property
    def n_trees(self) -> int:
        return self.offsets.shape[0] - 1

    @property
    def p(self) -> int:
        return self.gain.shape[0]

    @property
    def importance(self) -> np.ndarray:
        return feature_importance(self)

    @property
    def trees(self) -> list[RegressionTree]:
        out = []
        for t in range(self.n_trees):
            a, b = self.offsets[t], self.offsets[t + 1]
            out.append(RegressionTree(self.feature[a:b], self.threshold[a:b],
                                      self.left[a:b], self.right[a:b], self.value[a:b],
                                      np.zeros(self.p)))
        return out

    def predict(self, X) -> np.ndarray:
        return predict_ensemble(self, X)


@dataclasses.dataclass(frozen=True)
class EnsemblePreset:
    name: str
    kind: str
    tree: TreeParams
    n_trees: int = 100
    learning_rate: float = 1.0
    subsample: float = 1.0


# -- binning -----------------------------------------------------------------

def candidate_thresholds(col: np.ndarray, split_candidates: int | None) -> np.ndarray:
    u = np.unique(col)
    mids = 0.5 * (u[:-1] + u[1:])
    if split_candidates is not None and mids.shape[0] > split_candidates:
        pick = np.round(np.linspace(0, mids.shape[0] - 1, split_candidates)).astype(np.int64)
        mids = mids[np.unique(pick)]
    return mids


def bin_features(X: np.ndarray, split_candidates: int | None):
    """Bin codes (n x p int32), padded thresholds (p x B) and bin counts per column.

    bin(x) = #{thresholds < x}, so x <= thresholds[b] exactly when bin(x) <= b.
    """
    n, p = X.shape
    cuts = [candidate_thresholds(X[:, j], split_candidates) for j in range(p)]
    width = max(1, max(c.shape[0] for c in cuts))
    thresholds = np.full((p, width), np.inf)
    codes = np.empty((n, p), dtype=np.int32)
    n_bins = np.empty(p, dtype=np.int64)
    for j, c in enumerate(cuts):
        thresholds[j, :c.shape[0]] = c
        codes[:, j] = np.searchsorted(c, X[:, j], side="left")
        n_bins[j] = c.shape[0] + 1
    return codes, thresholds, n_bins


# -- kernels -------------------------------------------------------------------

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


@numba.njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _next(state):
    state[0] += _GOLDEN
    return _mix64(state[0])


@numba.njit(cache=True)
def _below(state, n):
    return np.int64((_next(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0) * n)


@numba.njit(cache=True)
def _tree_state(seed, t):
    state = np.empty(1, np.uint64)
    state[0] = seed ^ _mix64(np.uint64(t) + _GOLDEN)
    return state


@numba.njit(cache=True)
def _node_capacity(n_rows, max_depth, min_leaf):
    leaves = max(1, n_rows // min_leaf)
    if max_depth < 40:
        leaves = min(leaves, 1 << max_depth)
    return 2 * leaves - 1


@numba.njit(cache=True)
def _hist(codes, y, rows, lo, hi, chosen, n_feat, hsum, hcnt):
    for a in range(n_feat):
        for b in range(hsum.shape[1]):
            hsum[a, b] = 0.0
            hcnt[a, b] = 0
    for i in range(lo, hi):
        r = rows[i]
        v = y[r]
        for a in range(n_feat):
            c = codes[r, chosen[a]]
            hsum[a, c] += v
            hcnt[a, c] += 1


@numba.njit(cache=True)
def _grow(codes, n_bins, thresholds, y, rows, max_depth, min_leaf, mtry, state,
          feat, thr, sbin, left, right, value, gain, base, fitted):
    """Grow one tree over `rows` (reordered in place), writing nodes from `base`.

    Leaf values are also written to fitted[rows]. Returns the node count;
    child indices are local to the tree. With mtry == p, histograms of the
    larger child are obtained by subtraction from the parent.
    """
    p = codes.shape[1]
    max_b = thresholds.shape[1] + 1
    n_rows = rows.shape[0]
    full = mtry == p
    # depth-first with the left child on top: at most one pending sibling per level
    depth_cap = min(max_depth, n_rows) + 2
    st_node = np.empty(depth_cap, np.int64)
    st_lo = np.empty(depth_cap, np.int64)
    st_hi = np.empty(depth_cap, np.int64)
    st_dep = np.empty(depth_cap, np.int64)
    st_sum = np.empty(depth_cap)
    st_has = np.zeros(depth_cap, np.bool_)
    if full:
        h_sum = np.empty((depth_cap, p, max_b))
        h_cnt = np.empty((depth_cap, p, max_b), np.int64)
    else:
        h_sum = np.empty((1, mtry, max_b))
        h_cnt = np.empty((1, mtry, max_b), np.int64)
    tmp_sum = np.empty((mtry, max_b))
    tmp_cnt = np.empty((mtry, max_b), np.int64)
    perm = np.arange(p)
    chosen = np.arange(mtry)
    s0 = 0.0
    for i in range(n_rows):
        s0 += y[rows[i]]
    st_node[0] = 0
    st_lo[0] = 0
    st_hi[0] = n_rows
    st_dep[0] = 0
    st_sum[0] = s0
    top = 1
    count = 1
    while top > 0:
        top -= 1
        node = st_node[top]
        lo = st_lo[top]
        hi = st_hi[top]
        dep = st_dep[top]
        s = st_sum[top]
        nn = hi - lo
        k = base + node
        value[k] = s / nn
        feat[k] = -1
        thr[k] = 0.0
        sbin[k] = -1
        left[k] = -1
        right[k] = -1
        if dep >= max_depth or nn < 2 * min_leaf:
            for i in range(lo, hi):
                fitted[rows[i]] = value[k]
            continue
        slot = top if full else 0
        if full:
            if not st_has[top]:
                _hist(codes, y, rows, lo, hi, chosen, p, h_sum[top], h_cnt[top])
        else:
            for a in range(mtry):
                b = a + _below(state, p - a)
                t_ = perm[a]
                perm[a] = perm[b]
                perm[b] = t_
                chosen[a] = perm[a]
            chosen.sort()
            _hist(codes, y, rows, lo, hi, chosen, mtry, h_sum[0], h_cnt[0])
        hs = h_sum[slot]
        hc = h_cnt[slot]
        parent = s * s / nn
        best = 0.0
        bf = -1
        bb = -1
        bsl = 0.0
        for a in range(mtry):
            f = chosen[a]
            sl = 0.0
            cl = 0
            for b in range(n_bins[f] - 1):
                if hc[a, b] == 0:
                    # same partition as the previous threshold
                    continue
                sl += hs[a, b]
                cl += hc[a, b]
                if cl < min_leaf:
                    continue
                cr = nn - cl
                if cr < min_leaf:
                    break
                sr = s - sl
                g = sl * sl / cl + sr * sr / cr - parent
                if g > best:
                    best = g
                    bf = f
                    bb = b
                    bsl = sl
        if bf < 0 or best <= 1e-10 * parent:
            for i in range(lo, hi):
                fitted[rows[i]] = value[k]
            continue
        i = lo
        j = hi - 1
        while i <= j:
            if codes[rows[i], bf] <= bb:
                i += 1
            else:
                t_ = rows[i]
                rows[i] = rows[j]
                rows[j] = t_
                j -= 1
        feat[k] = bf
        thr[k] = thresholds[bf, bb]
        sbin[k] = bb
        left[k] = count
        right[k] = count + 1
        gain[bf] += best
        nl = i - lo
        nr = hi - i
        # slot top -> right child, slot top + 1 -> left child (popped first)
        st_node[top] = count + 1
        st_lo[top] = i
        st_hi[top] = hi
        st_dep[top] = dep + 1
        st_sum[top] = s - bsl
        st_node[top + 1] = count
        st_lo[top + 1] = lo
        st_hi[top + 1] = i
        st_dep[top + 1] = dep + 1
        st_sum[top + 1] = bsl
        st_has[top] = False
        st_has[top + 1] = False
        if full and dep + 1 < max_depth and max(nl, nr) >= 2 * min_leaf:
            if nl <= nr:
                _hist(codes, y, rows, lo, i, chosen, p, tmp_sum, tmp_cnt)
                # right (slot top) = parent - left; left -> slot top + 1
                h_sum[top] -= tmp_sum
                h_cnt[top] -= tmp_cnt
                h_sum[top + 1] = tmp_sum
                h_cnt[top + 1] = tmp_cnt
            else:
                _hist(codes, y, rows, i, hi, chosen, p, tmp_sum, tmp_cnt)
                h_sum[top + 1] = h_sum[top] - tmp_sum
                h_cnt[top + 1] = h_cnt[top] - tmp_cnt
                h_sum[top] = tmp_sum
                h_cnt[top] = tmp_cnt
            st_has[top] = True
            st_has[top + 1] = True
        top += 2
        count += 2
    return count


@numba.njit(cache=True)
def _fit_ensemble(codes, n_bins, thresholds, y, n_trees, boosting, bootstrap,
                  sample_size, learning_rate, max_depth, min_leaf, mtry, seed):
    n, p = codes.shape
    rows_cap = sample_size
    cap = _node_capacity(rows_cap, max_depth, min_leaf)
    total = n_trees * cap
    feat = np.empty(total, np.int64)
    thr = np.empty(total)
    left = np.empty(total, np.int64)
    right = np.empty(total, np.int64)
    value = np.empty(total)
    split_bin = np.empty(total, np.int64)
    gain = np.zeros(p)
    offsets = np.zeros(n_trees + 1, np.int64)
    base_pred = 0.0
    target = y.copy()
    F = np.zeros(n)
    if boosting:
        for i in range(n):
            base_pred += y[i]
        base_pred /= n
        for i in range(n):
            F[i] = base_pred
    idx = np.arange(n)
    rows = np.empty(sample_size, np.int64)
    fitted = np.zeros(n)
    pos = 0
    for t in range(n_trees):
        state = _tree_state(seed, t)
        if boosting:
            for i in range(n):
                target[i] = y[i] - F[i]
        if bootstrap:
            for i in range(sample_size):
                rows[i] = _below(state, n)
        elif sample_size < n:
            for a in range(sample_size):
                b = a + _below(state, n - a)
                tmp = idx[a]
                idx[a] = idx[b]
                idx[b] = tmp
            rows[:] = idx[:sample_size]
            rows.sort()
        else:
            for i in range(n):
                rows[i] = i
        cnt = _grow(codes, n_bins, thresholds, target, rows, max_depth, min_leaf, mtry,
                    state, feat, thr, split_bin, left, right, value, gain, pos, fitted)
        if boosting and sample_size == n:
            for i in range(n):
                F[i] += learning_rate * fitted[i]
        elif boosting:
            for i in range(n):
                node = 0
                while feat[pos + node] >= 0:
                    if codes[i, feat[pos + node]] <= split_bin[pos + node]:
                        node = left[pos + node]
                    else:
                        node = right[pos + node]
                F[i] += learning_rate * value[pos + node]
        pos += cnt
        offsets[t + 1] = pos
    return (feat[:pos].copy(), thr[:pos].copy(), left[:pos].copy(), right[:pos].copy(),
            value[:pos].copy(), offsets, gain, base_pred)


@numba.njit(cache=True)
def _predict_flat(X, feat, thr, left, right, value, offsets, scale, base, average):
    n = X.shape[0]
    n_trees = offsets.shape[0] - 1
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for t in range(n_trees):
            a = offsets[t]
            node = 0
            while feat[a + node] >= 0:
                if X[i, feat[a + node]] <= thr[a + node]:
                    node = left[a + node]
                else:
                    node = right[a + node]
            acc += value[a + node]
        if average:
            out[i] = acc / n_trees
        else:
            out[i] = base + scale * acc
    return out


# -- public API ----------------------------------------------------------------

def _check_Xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: X {X.shape}, y {y.shape}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("X and y must be finite")
    return X, y


def _check_X(X, p):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != p:
        raise ValueError(f"X has {X.shape[-1]} columns, model was fit on {p}")
    return np.ascontiguousarray(X)


def _seed64(seed) -> np.uint64:
    return np.uint64(int(seed) & ((1 << 64) - 1))


def _fit(X, y, params: TreeParams, n_trees, boosting, bootstrap, subsample,
         learning_rate, seed):
    X, y = _check_Xy(X, y)
    n, p = X.shape
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    if not 0.0 < learning_rate <= 1.0:
        raise ValueError("learning_rate must lie in (0, 1]")
    if not 0.0 < subsample <= 1.0:
        raise ValueError("subsample must lie in (0, 1]")
    mtry = params.resolve_mtry(p)
    codes, thresholds, n_bins = bin_features(X, params.split_candidates)
    sample_size = n if bootstrap else max(1, int(np.floor(subsample * n + 0.5)))
    out = _fit_ensemble(codes, n_bins, thresholds, y, n_trees, boosting, bootstrap,
                        sample_size, learning_rate, params.max_depth, params.min_leaf,
                        mtry, _seed64(seed))
    feat, thr, left, right, value, offsets, gain, base = out
    return EnsembleModel("boosting" if boosting else "bagging", feat, thr, left, right,
                         value, offsets, gain, learning_rate if boosting else 1.0,
                         float(base))


def fit_tree(X, y, params: TreeParams = TreeParams(), seed=0) -> RegressionTree:
    """Single CART tree on all rows; leaves predict the mean of their samples."""
    m = _fit(X, y, params, 1, False, False, 1.0, 1.0, seed)
    return RegressionTree(m.feature, m.threshold, m.left, m.right, m.value, m.gain)


def fit_bagging(X, y, params: TreeParams, n_trees=100, seed=0, bootstrap=True) -> EnsembleModel:
    return _fit(X, y, params, n_trees, False, bootstrap, 1.0, 1.0, seed)


def fit_boosting(X, y, params: TreeParams, n_trees=100, learning_rate=0.1, subsample=1.0,
                 seed=0) -> EnsembleModel:
    """Least-squares boosting: each tree fits the current residuals of F."""
    return _fit(X, y, params, n_trees, True, False, subsample, learning_rate, seed)


def predict_ensemble(model: EnsembleModel, X) -> np.ndarray:
    if model.n_trees < 1:
        raise ValueError("ensemble has no trees")
    X = _check_X(X, model.p)
    return _predict_flat(X, model.feature, model.threshold, model.left, model.right,
                         model.value, model.offsets, model.learning_rate,
                         model.base_prediction, model.kind == "bagging")


def feature_importance(model: EnsembleModel) -> np.ndarray:
    """Accumulated split gain per feature, normalized to sum to one (zeros if no split)."""
    total = model.gain.sum()
    if total <= 0.0:
        return np.zeros_like(model.gain)
    return model.gain / total


def preset(name: str) -> EnsemblePreset:
    if name == "rf":
        return EnsemblePreset(name, "bagging", TreeParams(max_depth=25, min_leaf=5,
                                                          mtry=1.0 / 3.0))
    if name == "xgb_like":
        return EnsemblePreset(name, "boosting", TreeParams(max_depth=6, min_leaf=1),
                              learning_rate=0.1)
    if name == "lgbm_like":
        return EnsemblePreset(name, "boosting",
                              TreeParams(max_depth=8, min_leaf=20, split_candidates=63),
                              learning_rate=0.1)
    if name == "catboost_like":
        return EnsemblePreset(name, "boosting", TreeParams(max_depth=6, min_leaf=1),
                              learning_rate=0.1, subsample=0.8)
    if name == "h2o_like":
        return EnsemblePreset(name, "boosting", TreeParams(max_depth=5, min_leaf=10),
                              learning_rate=0.1)
    raise ValueError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")


def fit_preset(spec: EnsemblePreset | str, X, y, seed=0) -> EnsembleModel:
    if isinstance(spec, str):
        spec = preset(spec)
    if spec.kind == "bagging":
        return fit_bagging(X, y, spec.tree, spec.n_trees, seed)
    return fit_boosting(X, y, spec.tree, spec.n_trees, spec.learning_rate, spec.subsample,
                        seed)
