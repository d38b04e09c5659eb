"""Scenario grid runner, raw-record persistence and summary tables.

One dataset (and one train/test split) is drawn per (scenario, replicate) and
shared by all 23 algorithms. Jobs are whole replicates, so each regularized
selection is computed once and reused by its five hybrids. Records are
written in canonical order, which makes the raw CSV independent of the
worker count.
"""
from __future__ import annotations

import concurrent.futures
import csv
import dataclasses
import io
import logging
import os
import time
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import datagen, selection, trees
from .metrics import aggregate, jaccard, recovery

log = logging.getLogger(__name__)

RAW_HEADER = ["scenario_n", "scenario_p", "noisy", "algorithm", "family", "replicate",
              "rmse", "jaccard", "recovery", "m_star", "selected_vars", "data_digest",
              "failed", "fail_reason"]
TIMING_HEADER = ["scenario_n", "scenario_p", "algorithm", "replicate", "wall_time_s"]
DIAGNOSTIC_HEADER = ["scenario_n", "scenario_p", "noisy", "algorithm", "replicate",
                     "rmse_all_vars"]
TRADEOFF_HEADER = ["family", "algorithm", "rmse", "jaccard"]
FAMILY_LABELS = {"regularized": "Regularized", "blackbox": "Black-Box", "hybrid": "Hybrid"}
METRICS = ("rmse", "jaccard", "recovery")


@dataclasses.dataclass(frozen=True)
class AlgorithmSpec:
    id: str
    family: str
    selector: str | None = None
    predictor: str | None = None


def enumerate_algorithms() -> list[AlgorithmSpec]:
    """Ridge, lasso, enet, the five presets, then hybrids (selector-major)."""
    algos = [AlgorithmSpec(s, "regularized", selector=s) for s in selection.SELECTOR_ALPHA]
    algos += [AlgorithmSpec(p, "blackbox", predictor=p) for p in trees.PRESET_NAMES]
    algos += [AlgorithmSpec(h.id, "hybrid", selector=h.selector, predictor=h.predictor)
              for h in selection.hybrid_specs()]
    return algos


ALGORITHMS = {a.id: a for a in enumerate_algorithms()}
ALGORITHM_ORDER = {a.id: i for i, a in enumerate(enumerate_algorithms())}


@dataclasses.dataclass(frozen=True)
class Scenario:
    n: int
    p: int
    noisy: bool = True

    @property
    def key(self) -> str:
        return datagen.scenario_key(self.n, self.p, self.noisy)


@dataclasses.dataclass(frozen=True)
class GridConfig:
    n_list: tuple[int, ...] = (50, 100, 200, 500, 1000)
    p_list: tuple[int, ...] = (5, 10, 50, 100)
    n_sim: int = 10
    k_folds: int = 5
    master_seed: int = 42
    noisy: bool = True
    workers: int = 1
    out_dir: str | None = None
    train_ratio: float = 0.8

    def __post_init__(self):
        if self.n_sim < 1:
            raise ValueError("n_sim must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for n in self.n_list:
            if n < 10:
                raise ValueError(f"sample size {n} below the minimum of 10")
        for p in self.p_list:
            if p < 5:
                raise ValueError(f"predictor count {p} below the minimum of 5")

    def scenarios(self) -> list[Scenario]:
        return [Scenario(n, p, self.noisy) for n in self.n_list for p in self.p_list]


@dataclasses.dataclass(frozen=True)
class RunRecord:
    n: int
    p: int
    noisy: bool
    algorithm: str
    family: str
    replicate: int
    rmse: float
    jaccard: float
    recovery: float
    m_star: int
    selected: tuple[int, ...]
    data_digest: str
    failed: bool = False
    fail_reason: str = ""
    wall_time: float = 0.0
    rmse_all_vars: float | None = None

    @property
    def sort_key(self):
        return (self.n, self.p, not self.noisy, ALGORITHM_ORDER.get(self.algorithm, 99),
                self.replicate)


def replicate_dataset(scenario: Scenario, replicate: int, config: GridConfig):
    cfg = datagen.ScenarioConfig(scenario.n, scenario.p, scenario.noisy, replicate,
                                 config.master_seed)
    ds = datagen.gen_dataset(cfg)
    split_seed = datagen.derive_seed(config.master_seed, scenario.key, replicate, "split")
    return datagen.split_train_test(ds, config.train_ratio, split_seed)


def algorithm_seed(scenario: Scenario, algo: AlgorithmSpec, replicate: int,
                   config: GridConfig) -> int:
    # hybrids select with their selector's seed so S_hat matches the selector row
    label = algo.selector if algo.family == "hybrid" else algo.id
    return datagen.derive_seed(config.master_seed, scenario.key, replicate, f"model:{label}")


def _record(scenario, algo, replicate, digest, result, elapsed) -> RunRecord:
    S = datagen.TRUE_SUPPORT
    selected = tuple(sorted(result.choice.selected))
    return RunRecord(scenario.n, scenario.p, scenario.noisy, algo.id, algo.family, replicate,
                     float(result.rmse), jaccard(S, selected), recovery(S, selected),
                     result.choice.m_star, selected, digest, wall_time=elapsed,
                     rmse_all_vars=result.rmse_all_vars)


def _failed(scenario, algo, replicate, digest, exc, elapsed) -> RunRecord:
    reason = f"{type(exc).__name__}: {exc}".replace("\n", " ")
    nan = float("nan")
    return RunRecord(scenario.n, scenario.p, scenario.noisy, algo.id, algo.family, replicate,
                     nan, nan, nan, 0, (), digest, True, reason, elapsed)


def run_replicate(scenario: Scenario, replicate: int, config: GridConfig,
                  algorithms: Sequence[AlgorithmSpec] | None = None) -> list[RunRecord]:
    """Run the given algorithms (default: all 23) on one shared replicate dataset."""
    algorithms = enumerate_algorithms() if algorithms is None else list(algorithms)
    ds = replicate_dataset(scenario, replicate, config)
    digest = ds.digest()
    k = config.k_folds
    choices: dict[str, selection.SubsetChoice] = {}
    records = []
    for algo in algorithms:
        seed = algorithm_seed(scenario, algo, replicate, config)
        start = time.perf_counter()
        try:
            if algo.family == "regularized":
                result = selection.run_regularized_pipeline(
                    ds, selection.SELECTOR_ALPHA[algo.selector], k, seed)
                choices[algo.selector] = result.choice
            elif algo.family == "blackbox":
                result = selection.run_blackbox_pipeline(ds, algo.predictor, k, seed)
            else:
                spec = selection.HybridSpec(algo.selector, algo.predictor)
                result = selection.run_hybrid_pipeline(ds, spec, k, seed,
                                                       choices.get(algo.selector))
                choices.setdefault(algo.selector, result.choice)
            rec = _record(scenario, algo, replicate, digest, result,
                          time.perf_counter() - start)
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            rec = _failed(scenario, algo, replicate, digest, exc, time.perf_counter() - start)
            log.warning("%s rep %d %s failed: %s", scenario.key, replicate, algo.id,
                        rec.fail_reason)
        records.append(rec)
    return records


def run_cell(scenario: Scenario, algorithm: AlgorithmSpec | str, replicate: int,
             config: GridConfig) -> RunRecord:
    if isinstance(algorithm, str):
        algorithm = ALGORITHMS[algorithm]
    return run_replicate(scenario, replicate, config, [algorithm])[0]


def _job(args):
    scenario, replicate, config = args
    start = time.perf_counter()
    records = run_replicate(scenario, replicate, config)
    log.info("%s replicate %d done in %.1fs", scenario.key, replicate,
             time.perf_counter() - start)
    return records


@dataclasses.dataclass
class GridResult:
    records: list[RunRecord]
    raw_path: Path | None = None

    @property
    def n_failed(self) -> int:
        return sum(r.failed for r in self.records)


def run_grid(config: GridConfig) -> GridResult:
    jobs = [(s, r, config) for s in config.scenarios() for r in range(config.n_sim)]
    records: list[RunRecord] = []
    if config.workers == 1:
        for job in jobs:
            records.extend(_job(job))
    else:
        with concurrent.futures.ProcessPoolExecutor(config.workers) as pool:
            for chunk in pool.map(_job, jobs):
                records.extend(chunk)
    records.sort(key=lambda r: r.sort_key)
    result = GridResult(records)
    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        result.raw_path = out / "raw.csv"
        write_raw_csv(records, result.raw_path)
        write_timing_csv(records, out / "timing.csv")
        write_diagnostics_csv(records, out / "diagnostics.csv")
        emit_tradeoff_points(records, out / "tradeoff.csv")
    return result


# -- serialization -------------------------------------------------------------

def _f6(x: float) -> str:
    return "nan" if x != x else f"{x:.6f}"


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_raw_csv(records: Iterable[RunRecord], path) -> None:
    _write_rows(path, RAW_HEADER, (
        [r.n, r.p, int(r.noisy), r.algorithm, r.family, r.replicate, _f6(r.rmse),
         _f6(r.jaccard), _f6(r.recovery), r.m_star, ";".join(map(str, r.selected)),
         r.data_digest, int(r.failed), r.fail_reason] for r in records))


def write_timing_csv(records: Iterable[RunRecord], path) -> None:
    _write_rows(path, TIMING_HEADER, ([r.n, r.p, r.algorithm, r.replicate,
                                       f"{r.wall_time:.6f}"] for r in records))


def write_diagnostics_csv(records: Iterable[RunRecord], path) -> None:
    _write_rows(path, DIAGNOSTIC_HEADER, (
        [r.n, r.p, int(r.noisy), r.algorithm, r.replicate, _f6(r.rmse_all_vars)]
        for r in records if r.rmse_all_vars is not None))


def read_raw_csv(path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RAW_HEADER:
            raise ValueError(f"{path}: not a raw results file (header {header})")
        records = []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(RAW_HEADER):
                raise ValueError(f"{path}:{line}: expected {len(RAW_HEADER)} fields")
            d = dict(zip(RAW_HEADER, row))
            try:
                records.append(RunRecord(
                    int(d["scenario_n"]), int(d["scenario_p"]), d["noisy"] == "1",
                    d["algorithm"], d["family"], int(d["replicate"]), float(d["rmse"]),
                    float(d["jaccard"]), float(d["recovery"]), int(d["m_star"]),
                    tuple(int(v) for v in d["selected_vars"].split(";") if v),
                    d["data_digest"], d["failed"] == "1", d["fail_reason"]))
            except ValueError as exc:
                raise ValueError(f"{path}:{line}: {exc}") from None
    return records


def emit_tradeoff_points(records: Sequence[RunRecord], path=None) -> str:
    """One (family, algorithm, rmse, jaccard) row per record; returns the CSV text."""
    if not records:
        raise ValueError("no records to emit")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRADEOFF_HEADER)
    for r in records:
        w.writerow([FAMILY_LABELS[r.family], r.algorithm, _f6(r.rmse), _f6(r.jaccard)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


# -- summaries -------------------------------------------------------------------

@dataclasses.dataclass
class Summary:
    metric: str
    algorithms: list[str]
    n_values: list[int]
    cells: dict  # (algorithm, n) -> AggregateCell
    best: dict  # n -> algorithm id with the best mean

    def render_text(self, digits: int = 2) -> str:
        width = max(len(a) for a in self.algorithms) + 2
        head = "algorithm".ljust(width) + "".join(f"n={n}".rjust(16) for n in self.n_values)
        lines = [f"metric: {self.metric}", head]
        for a in self.algorithms:
            row = a.ljust(width)
            for n in self.n_values:
                cell = self.cells.get((a, n))
                text = "-" if cell is None else cell.format(digits)
                if self.best.get(n) == a:
                    text = "*" + text
                row += text.rjust(16)
            lines.append(row)
        lines.append("* best mean per column")
        return "\n".join(lines)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric", "algorithm", "n", "mean", "sd", "n_sim", "best"])
        for a in self.algorithms:
            for n in self.n_values:
                cell = self.cells.get((a, n))
                if cell is not None:
                    w.writerow([self.metric, a, n, _f6(cell.mean), _f6(cell.sd), cell.n_sim,
                                int(self.best.get(n) == a)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def summarize(records: Iterable[RunRecord], metric: str = "rmse",
              p_filter: Iterable[int] | None = None,
              n_filter: Iterable[int] | None = None) -> Summary:
    """Mean (sd) per (algorithm, n); best is the min for RMSE and the max otherwise."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}")
    records = [r for r in records if not r.failed]
    p_set = None if p_filter is None else set(p_filter)
    n_set = None if n_filter is None else set(n_filter)
    kept = [r for r in records
            if (p_set is None or r.p in p_set) and (n_set is None or r.n in n_set)]
    if not kept:
        keys = sorted({(r.n, r.p) for r in records})
        raise ValueError(f"no records match p={p_filter}, n={n_filter}; "
                         f"available (n, p): {keys}")
    groups = defaultdict(list)
    for r in kept:
        groups[(r.algorithm, r.n)].append(getattr(r, metric))
    cells = {key: aggregate(v) for key, v in groups.items()}
    algorithms = sorted({a for a, _ in cells}, key=lambda a: ALGORITHM_ORDER.get(a, 99))
    n_values = sorted({n for _, n in cells})
    best = {}
    for n in n_values:
        col = [(cells[(a, n)].mean, ALGORITHM_ORDER.get(a, 99), a)
               for a in algorithms if (a, n) in cells]
        pick = min(col) if metric == "rmse" else min(col, key=lambda c: (-c[0], c[1]))
        best[n] = pick[2]
    return Summary(metric, algorithms, n_values, cells, best)


def default_workers() -> int:
    return os.cpu_count() or 1
