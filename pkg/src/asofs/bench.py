"""Experiment harness: exhaustive oracle, seeded batches, report verification."""
from __future__ import annotations

import csv
import json
import logging
import os
import statistics
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .datasets import Dataset, SplitSpec, prepare
from .errors import ConfigError
from .evaluation import ClassifierSpec, EvaluationContext, FitnessWeights, evaluate
from .optimizer import OptimizerConfig, RunReport, mask_to_str, run, str_to_mask

__all__ = ["MAX_ORACLE_FEATURES", "exhaustive_oracle", "batch", "verify_report", "CellSummary"]

log = logging.getLogger(__name__)

MAX_ORACLE_FEATURES = 20


def all_masks(d: int) -> np.ndarray:
    """Every non-empty mask over ``d`` features, row r encoding integer r + 1."""
    codes = np.arange(1, 2**d, dtype=np.int64)
    return ((codes[:, None] >> np.arange(d)) & 1).astype(bool)


def exhaustive_oracle(dataset: Dataset, weights: FitnessWeights = FitnessWeights(),
                      classifier: ClassifierSpec = ClassifierSpec(),
                      split_spec: SplitSpec = SplitSpec()):
    """Minimum-fitness mask over all 2^d - 1 subsets.

    Ties prefer fewer features, then the lexicographically smallest bit string.
    Returns ``(mask, fitness)``.
    """
    d = dataset.n_features
    if d > MAX_ORACLE_FEATURES:
        raise ConfigError(f"oracle enumerates 2^d masks; refusing d={d} > {MAX_ORACLE_FEATURES}")
    train, test = prepare(dataset, split_spec)
    ctx = EvaluationContext.from_split(train, test, classifier=classifier, weights=weights,
                                       use_cache=False)
    best_key, best_mask, best_fit = None, None, None
    for mask in all_masks(d):
        fv = evaluate(ctx, mask)
        key = (fv.fitness, fv.selected_count, mask_to_str(mask))
        if best_key is None or key < best_key:
            best_key, best_mask, best_fit = key, mask.copy(), fv.fitness
    return best_mask, best_fit


def verify_report(report: RunReport, dataset: Dataset) -> tuple:
    """Recompute the stored accuracy from mask, split seed and classifier settings.

    Returns ``(recomputed_accuracy, matches)`` where ``matches`` is exact equality.
    """
    cfg = report.config
    spec = SplitSpec(cfg["train_fraction"], cfg["stratified"], report.split_seed)
    train, test = prepare(dataset, spec)
    ctx = EvaluationContext.from_split(train, test, classifier=ClassifierSpec("knn", cfg["k"]),
                                       weights=FitnessWeights(cfg["omega"]), use_cache=False)
    acc = 1.0 - ctx.model.error(str_to_mask(report.best_mask), ctx.y_eval)
    return acc, acc == report.test_accuracy


@dataclass
class CellSummary:
    method: str
    dataset: str
    runs: int
    failures: int
    mean_accuracy: float = float("nan")
    std_accuracy: float = float("nan")
    best_accuracy: float = float("nan")
    mean_selected: float = float("nan")
    mean_fitness: float = float("nan")
    mean_full_feature_accuracy: float = float("nan")
    errors: list = field(default_factory=list)

    @classmethod
    def from_reports(cls, method, dataset, reports: Sequence[RunReport], errors) -> "CellSummary":
        out = cls(method, dataset, len(reports), len(errors), errors=list(errors))
        if reports:
            acc = [r.test_accuracy for r in reports]
            out.mean_accuracy = statistics.fmean(acc)
            out.std_accuracy = statistics.stdev(acc) if len(acc) > 1 else 0.0
            out.best_accuracy = max(acc)
            out.mean_selected = statistics.fmean(r.selected_count for r in reports)
            out.mean_fitness = statistics.fmean(r.best_fitness for r in reports)
            out.mean_full_feature_accuracy = statistics.fmean(
                r.full_feature_accuracy for r in reports)
        return out


AGGREGATE_COLUMNS = ["method", "dataset", "runs", "failures", "mean_accuracy", "std_accuracy",
                     "best_accuracy", "mean_selected", "mean_fitness",
                     "mean_full_feature_accuracy"]


def write_report(report: RunReport, path: str):
    with open(path, "w") as fh:
        fh.write(report.to_json())
    root, _ = os.path.splitext(path)
    with open(root + ".convergence.csv", "w") as fh:
        fh.write(report.convergence_csv())
    with open(root + ".timing.json", "w") as fh:
        json.dump({"wall_time": report.wall_time}, fh)


def batch(configs: Iterable[OptimizerConfig], datasets: Sequence[Dataset], seeds: Sequence[int],
          out_dir=None) -> tuple:
    """Run every (method config, dataset, seed) cell.

    A cell's seed replaces ``config.seed``; a failing cell is logged and
    recorded in its summary and the batch moves on. When ``out_dir`` is given,
    per-run reports and ``aggregate.csv`` are written there.
    Returns ``(summaries, reports)``.
    """
    configs, seeds = list(configs), list(seeds)
    if not configs or not datasets or not seeds:
        raise ConfigError("batch needs at least one config, dataset and seed")
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    summaries, all_reports = [], []
    for cfg in configs:
        for ds in datasets:
            reports, errors = [], []
            for seed in seeds:
                cell_cfg = replace(cfg, seed=seed)
                try:
                    rep = run(cell_cfg, ds)
                except Exception as exc:  # a failed cell must not stop the batch
                    log.warning("cell %s/%s/seed %s failed: %s", cfg.method, ds.name, seed, exc)
                    errors.append(f"seed {seed}: {type(exc).__name__}: {exc}")
                    continue
                reports.append(rep)
                if out_dir is not None:
                    fname = f"{ds.name}__{cfg.method}__seed{seed}.json"
                    write_report(rep, os.path.join(out_dir, fname))
            summaries.append(CellSummary.from_reports(cfg.method, ds.name, reports, errors))
            all_reports.extend(reports)
    if out_dir is not None:
        with open(os.path.join(out_dir, "aggregate.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(AGGREGATE_COLUMNS)
            for s in summaries:
                w.writerow([getattr(s, c) for c in AGGREGATE_COLUMNS])
    return summaries, all_reports
