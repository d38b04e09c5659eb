"""Friedman synthetic regression data with a known support.

All randomness comes from numpy's Philox counter-based bit generator, consumed
through its raw 64-bit output so the streams do not depend on numpy's
higher-level sampling routines (which are allowed to change between
releases). Uniforms use the top 53 bits of each word; normals are produced
by the inverse normal CDF applied to open-interval uniforms.
"""
from __future__ import annotations

import dataclasses
import hashlib

import numpy as np
from scipy.special import ndtri

TRUE_SUPPORT = frozenset({1, 2, 3, 4, 5})

_TWO_POW_53 = float(2**53)
_MASK64 = (1 << 64) - 1


@dataclasses.dataclass(frozen=True)
class ScenarioConfig:
    n: int
    p: int
    noisy: bool = True
    replicate_index: int = 0
    master_seed: int = 0

    def __post_init__(self):
        if self.p < 5:
            raise ValueError(f"p must be >= 5 to hold the true support, got {self.p}")
        if self.n < 10:
            raise ValueError(f"n must be >= 10, got {self.n}")
        if self.replicate_index < 0:
            raise ValueError("replicate_index must be non-negative")
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")

    @property
    def key(self) -> str:
        return scenario_key(self.n, self.p, self.noisy)


@dataclasses.dataclass(frozen=True, eq=False)
class SimDataset:
    X: np.ndarray
    y: np.ndarray
    true_support: frozenset = TRUE_SUPPORT
    train_idx: np.ndarray | None = None
    test_idx: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def is_split(self) -> bool:
        return self.train_idx is not None

    def train(self):
        return self.X[self.train_idx], self.y[self.train_idx]

    def test(self):
        return self.X[self.test_idx], self.y[self.test_idx]

    def digest(self) -> str:
        """Short stable hash of (X, y), used to audit data sharing between rows."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.X, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.y, dtype="<f8").tobytes())
        return h.hexdigest()[:16]

    def to_csv(self, path) -> None:
        header = ",".join([f"x{j + 1}" for j in range(self.p)] + ["y"])
        np.savetxt(path, np.column_stack([self.X, self.y]), delimiter=",",
                   header=header, comments="", fmt="%.17g")


def scenario_key(n: int, p: int, noisy: bool) -> str:
    return f"n{n}_p{p}_{'noisy' if noisy else 'clean'}"


def derive_seed(master_seed: int, scenario_key: str, replicate_index: int,
                stream_label: str) -> int:
    """Derive an unsigned 64-bit seed for one named random stream.

    The value is the first 8 bytes (little endian) of a BLAKE2b digest of the
    inputs, so it depends on nothing but its arguments.
    """
    msg = f"{int(master_seed)}|{scenario_key}|{int(replicate_index)}|{stream_label}"
    digest = hashlib.blake2b(msg.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def mix_seed(seed: int, label: str) -> int:
    """Child seed of an already derived seed; used inside pipelines."""
    digest = hashlib.blake2b(f"{int(seed)}/{label}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _raw(seed: int, count: int) -> np.ndarray:
    return np.random.Philox(int(seed) & _MASK64).random_raw(count).astype(np.uint64)


def uniform_stream(seed: int, count: int) -> np.ndarray:
    """`count` uniforms on [0, 1) from the top 53 bits of each Philox word."""
    return (_raw(seed, count) >> np.uint64(11)).astype(np.float64) / _TWO_POW_53


def normal_stream(seed: int, count: int) -> np.ndarray:
    """Standard normals by inverse CDF of uniforms on the open interval (0, 1)."""
    u = ((_raw(seed, count) >> np.uint64(11)).astype(np.float64) + 0.5) / _TWO_POW_53
    return ndtri(u)


def permutation(seed: int, n: int) -> np.ndarray:
    """Uniform random permutation of range(n): stable argsort of raw draws."""
    return np.argsort(_raw(seed, n), kind="stable")


def friedman_response(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 5:
        raise ValueError("friedman_response needs a vector with at least 5 coordinates")
    return float(friedman(x[None, :])[0])


def friedman(X: np.ndarray) -> np.ndarray:
    """Row-wise noise-free Friedman function; columns past the fifth are ignored."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 5:
        raise ValueError("friedman needs a matrix with at least 5 columns")
    return (10.0 * np.sin(np.pi * X[:, 0] * X[:, 1])
            + 20.0 * (X[:, 2] - 0.5) ** 2
            + 10.0 * X[:, 3]
            + 5.0 * X[:, 4])


def gen_dataset(config: ScenarioConfig) -> SimDataset:
    """Draw X ~ U(0,1)^{n x p} (row-major) and y = f(X) [+ N(0,1) noise]."""
    seed = derive_seed(config.master_seed, config.key, config.replicate_index, "data")
    n, p = config.n, config.p
    X = uniform_stream(seed, n * p).reshape(n, p)
    y = friedman(X)
    if config.noisy:
        y = y + normal_stream(mix_seed(seed, "noise"), n)
    return SimDataset(X=X, y=y)


def split_sizes(n: int, ratio: float) -> tuple[int, int]:
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    n_train = int(np.floor(ratio * n + 0.5))  # round half up
    if n_train < 1 or n - n_train < 1:
        raise ValueError(f"split of n={n} at ratio={ratio} leaves an empty side")
    return n_train, n - n_train


def split_train_test(ds: SimDataset, ratio: float = 0.8, seed: int = 0) -> SimDataset:
    n_train, _ = split_sizes(ds.n, ratio)
    perm = permutation(seed, ds.n)
    return dataclasses.replace(ds, train_idx=np.sort(perm[:n_train]),
                               test_idx=np.sort(perm[n_train:]))


def kfold_labels(n: int, k: int, seed: int) -> np.ndarray:
    """Fold label per observation; fold sizes differ by at most one."""
    if k < 2:
        raise ValueError("need at least 2 folds")
    if n < 2 * k:
        raise ValueError(f"{k}-fold CV needs n >= {2 * k}, got n={n}")
    labels = np.empty(n, dtype=np.int64)
    labels[permutation(seed, n)] = np.arange(n) % k
    return labels
