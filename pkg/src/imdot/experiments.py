"""Label propagation from transport plans and the relaxation-sweep harness.

A transport plan labels each target point by the class it receives the most
mass from.  The sweep draws fresh source/target pairs, solves the globally
relaxed and the budget-split per-class problems on the same draw, and
summarizes the paired accuracy difference per relaxation value by its
median, minimum and maximum over draws.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .datagen import ToyConfig, draw_seeds, generate_pair
from .measures import (
    CostMatrix,
    LabeledDataset,
    class_conditionals,
    cost_matrix,
    empirical_measure,
)
from .ot import TransportPlanSet, partial_ot_beta_split, partial_ot_global

__all__ = [
    "propagate_labels",
    "accuracy",
    "DrawRecord",
    "SweepResult",
    "run_sweep",
    "write_draws_csv",
    "write_summary_csv",
]

MODE_GLOBAL = "global"
MODE_SPLIT = "per_class_split"

#: A propagated row must have received at least this much mass.
ZERO_ROW_TOL = 1e-12


def propagate_labels(plan, source_labels, n_classes: int | None = None) -> np.ndarray:
    """Majority-vote labels: each target row takes the class sending most mass.

    ``plan`` is either a single (n_target, n_source) matrix or a
    :class:`~imdot.ot.TransportPlanSet`, whose class blocks are re-assembled
    against the source label order.  Ties resolve to the smallest class
    index; a row carrying less than 1e-12 total mass is an error (the
    equality marginal makes it impossible short of solver breakdown).
    """
    source_labels = np.asarray(source_labels, dtype=int)
    if n_classes is None:
        n_classes = int(source_labels.max())
    if isinstance(plan, TransportPlanSet):
        indices = [np.flatnonzero(source_labels == k)
                   for k in range(1, n_classes + 1)]
        plan = plan.full_matrix(indices, len(source_labels))
    plan = np.asarray(plan, dtype=float)
    if plan.shape[1] != len(source_labels):
        raise ValueError("plan columns do not match the source labels")
    votes = np.zeros((plan.shape[0], n_classes))
    for k in range(1, n_classes + 1):
        votes[:, k - 1] = plan[:, source_labels == k].sum(axis=1)
    totals = votes.sum(axis=1)
    if np.any(totals < ZERO_ROW_TOL):
        bad = int(np.argmin(totals))
        raise ValueError(f"target row {bad} received no mass ({totals[bad]!r})")
    return np.argmax(votes, axis=1) + 1


def accuracy(predicted, truth) -> float:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError("prediction and truth lengths differ")
    return float(np.mean(predicted == truth))


@dataclass(frozen=True)
class DrawRecord:
    draw: int
    seed: int
    beta: float
    mode: str
    accuracy: float
    objective: float
    solve_seconds: float


@dataclass(frozen=True)
class SweepResult:
    config: ToyConfig
    beta_grid: tuple
    mode: str
    draws: int
    records: tuple
    failures: tuple

    def summary(self):
        """Per-beta (median, min, max) of the split-minus-global accuracy gap.

        Pure function of the recorded per-draw values; recomputable from the
        draws CSV.
        """
        if self.mode != "both":
            raise ValueError("the paired summary needs both modes")
        by_key = {(r.draw, r.beta, r.mode): r.accuracy for r in self.records}
        rows = []
        for beta in self.beta_grid:
            diffs = []
            for draw in range(self.draws):
                a_split = by_key.get((draw, beta, MODE_SPLIT))
                a_glob = by_key.get((draw, beta, MODE_GLOBAL))
                if a_split is None or a_glob is None:
                    continue
                if np.isnan(a_split) or np.isnan(a_glob):
                    continue  # failed solve, recorded separately
                diffs.append(a_split - a_glob)
            if not diffs:
                rows.append((beta, float("nan"), float("nan"), float("nan")))
                continue
            diffs = np.asarray(diffs)
            rows.append((beta, float(np.median(diffs)),
                         float(diffs.min()), float(diffs.max())))
        return rows


def _solve_one(mode: str, beta: float, target_measure, source_measure,
               conditionals, proportions, cost_full, class_costs,
               source_labels, target_labels, n_classes):
    start = time.perf_counter()
    if mode == MODE_GLOBAL:
        value, plan = partial_ot_global(target_measure, source_measure,
                                        cost_full, beta)
        labels = propagate_labels(plan, source_labels, n_classes)
    else:
        plan_set = partial_ot_beta_split(target_measure, conditionals,
                                         proportions, beta, class_costs)
        value = plan_set.objective
        labels = propagate_labels(plan_set, source_labels, n_classes)
    elapsed = time.perf_counter() - start
    return accuracy(labels, target_labels), value, elapsed


def _run_draw(args):
    draw, seed, config, beta_grid, modes = args
    cfg = replace(config, seed=int(seed))
    source, target = generate_pair(cfg)
    source_measure = empirical_measure(source)
    target_measure = empirical_measure(target)
    conditionals, proportions = class_conditionals(source)
    cost_full = cost_matrix(target.points, source.points)
    class_costs = [CostMatrix(cost_full.entries[:, source.class_indices(k)])
                   for k in range(1, config.n_classes + 1)]
    records, failures = [], []
    for beta in beta_grid:
        for mode in modes:
            try:
                acc, value, elapsed = _solve_one(
                    mode, beta, target_measure, source_measure, conditionals,
                    proportions, cost_full, class_costs, source.labels,
                    target.labels, config.n_classes)
            except Exception as exc:  # recorded, never silently dropped
                records.append(DrawRecord(draw, int(seed), float(beta), mode,
                                          float("nan"), float("nan"), 0.0))
                failures.append((draw, float(beta), mode, repr(exc)))
                continue
            records.append(DrawRecord(draw, int(seed), float(beta), mode,
                                      acc, value, elapsed))
    return records, failures


def run_sweep(config: ToyConfig, beta_grid, draws: int,
              mode: str = "both", jobs: int = 1) -> SweepResult:
    """Paired relaxation sweep over fresh draws.

    Each draw generates one source/target pair and solves every requested
    mode at every ``beta`` on that same pair.  Draws are independent and run
    in parallel when ``jobs > 1``; records are gathered in draw order so the
    result is identical either way.
    """
    if draws < 1:
        raise ValueError("need at least one draw")
    if mode not in ("both", MODE_GLOBAL, MODE_SPLIT):
        raise ValueError(f"unknown mode {mode!r}")
    modes = (MODE_GLOBAL, MODE_SPLIT) if mode == "both" else (mode,)
    beta_grid = tuple(float(b) for b in beta_grid)
    seeds = draw_seeds(config.seed, draws)
    tasks = [(d, seeds[d], config, beta_grid, modes) for d in range(draws)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_draw, tasks))
    else:
        outcomes = [_run_draw(t) for t in tasks]
    records, failures = [], []
    for recs, fails in outcomes:
        records.extend(recs)
        failures.extend(fails)
    return SweepResult(config, beta_grid, mode, draws,
                       tuple(records), tuple(failures))


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def write_draws_csv(result: SweepResult, path, include_timings: bool = False) -> None:
    """Per-draw records as ``draw,seed,beta,mode,accuracy,objective,solve_ms``.

    Timings are left empty unless requested, keeping default output
    byte-identical across reruns with the same seed.
    """
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["draw", "seed", "beta", "mode",
                         "accuracy", "objective", "solve_ms"])
        for r in result.records:
            ms = repr(r.solve_seconds * 1000.0) if include_timings else ""
            writer.writerow([r.draw, r.seed, repr(r.beta), r.mode,
                             repr(r.accuracy), repr(r.objective), ms])


def write_summary_csv(result: SweepResult, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["beta", "median_diff", "min_diff", "max_diff"])
        for beta, med, lo, hi in result.summary():
            writer.writerow([repr(beta), repr(med), repr(lo), repr(hi)])
