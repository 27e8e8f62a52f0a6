"""Exact partial optimal transport with global and per-class relaxation.

The per-class problem transports a probability target onto a class-
decomposed source whose class-``k`` block offers capacity
``(p_k + beta_k) * conditional_k``; its optimal value equals the IMD of
``(target, source + sum_k beta_k conditional_k)`` over nonnegative
1-Lipschitz functions, which is also computed here directly as the dual LP
on potentials.  All problems go through :mod:`imdot.lp`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

from .families import ground_union, weights_on_ground
from .lp import LinearProgram, LpError, solve
from .measures import CostMatrix, DiscreteMeasure

__all__ = [
    "TransportPlanSet",
    "LipschitzPotential",
    "wasserstein1",
    "partial_ot_global",
    "partial_ot_per_class",
    "partial_ot_beta_split",
    "lipschitz_imd_dual",
    "support_distance_imd",
    "plan_set_to_dict",
]

#: Marginal residual allowed on a returned plan.
PLAN_TOL = 1e-8


@dataclass(frozen=True)
class TransportPlanSet:
    """Per-class transport plans with the relaxation that produced them.

    ``plans[k]`` is ``(n_target, n_source_class_k)`` nonnegative mass whose
    row sums, summed over classes, reproduce the target weights, and whose
    column sums respect the class capacity ``(p_k + beta[k]) * conditional``.
    """

    plans: tuple
    beta: np.ndarray
    objective: float

    def full_matrix(self, class_indices: Sequence[np.ndarray],
                    n_source: int) -> np.ndarray:
        """Assemble one (n_target, n_source) matrix from the class blocks.

        ``class_indices[k]`` gives the source columns of class ``k + 1`` in
        the original source ordering.
        """
        n_target = self.plans[0].shape[0] if self.plans else 0
        full = np.zeros((n_target, n_source))
        for plan, idx in zip(self.plans, class_indices):
            if plan.shape[1] != len(idx):
                raise ValueError("class block width does not match its indices")
            full[:, idx] = plan
        return full


@dataclass(frozen=True)
class LipschitzPotential:
    """Dual potential: one value per ground atom, nonnegative on supp(S)."""

    values: np.ndarray
    nonneg_on: np.ndarray
    ground_points: np.ndarray


def _check_cost_block(cost: CostMatrix, n_rows: int, n_cols: int, k: int) -> None:
    if cost.entries.shape != (n_rows, n_cols):
        raise ValueError(
            f"cost block {k} is {cost.entries.shape}, expected {(n_rows, n_cols)}"
        )


def _solve_blocks(target: DiscreteMeasure,
                  cond_weights: Sequence[np.ndarray],
                  costs: Sequence[CostMatrix],
                  cap_scale: np.ndarray,
                  split: tuple | None = None):
    """Shared LP assembly for the capacitated block-transport problems.

    Variables are the per-class plan entries (row-major inside each class
    block); with ``split = (p, beta_total)`` one extra capacity variable per
    class is appended and the capacities become ``(p_k + beta_k) * w`` with
    ``sum_k beta_k = beta_total``.
    """
    n_t = target.n_atoms
    t = target.weights
    sizes = [len(w) for w in cond_weights]
    n_cols = int(np.sum(sizes))
    n_plan = n_t * n_cols

    c_parts, data, rows, cols = [], [], [], []
    offset = 0
    cap_rows_start = n_t
    for k, (w, cost) in enumerate(zip(cond_weights, costs)):
        n_k = len(w)
        _check_cost_block(cost, n_t, n_k, k)
        c_parts.append(cost.entries.ravel())
        if n_k == 0:
            continue
        var = offset + np.arange(n_t * n_k)
        # target marginal rows (equality)
        rows.append(np.repeat(np.arange(n_t), n_k))
        cols.append(var)
        data.append(np.ones(n_t * n_k))
        # class capacity rows
        col_in_class = np.tile(np.arange(n_k), n_t)
        rows.append(cap_rows_start + sum(sizes[:k]) + col_in_class)
        cols.append(var)
        data.append(np.ones(n_t * n_k))
        offset += n_t * n_k

    caps = np.concatenate([scale * w for scale, w in zip(cap_scale, cond_weights)]) \
        if n_cols else np.empty(0)
    n_vars = n_plan
    b = np.concatenate([t, caps])
    relations = ["="] * n_t + ["<="] * n_cols
    c = np.concatenate(c_parts) if c_parts else np.empty(0)

    if split is not None:
        p, beta_total = split
        n_classes = len(cond_weights)
        beta_vars = n_plan + np.arange(n_classes)
        # capacity rows gain -w_j on beta_k; rhs is p_k * w_j
        col_cursor = 0
        for k, w in enumerate(cond_weights):
            n_k = len(w)
            if n_k:
                rows.append(cap_rows_start + col_cursor + np.arange(n_k))
                cols.append(np.full(n_k, beta_vars[k]))
                data.append(-np.asarray(w, dtype=float))
                b[cap_rows_start + col_cursor:cap_rows_start + col_cursor + n_k] = (
                    p[k] * np.asarray(w, dtype=float)
                )
            col_cursor += n_k
        # budget row: sum_k beta_k = beta_total
        budget_row = n_t + n_cols
        rows.append(np.full(n_classes, budget_row))
        cols.append(beta_vars)
        data.append(np.ones(n_classes))
        b = np.concatenate([b, [beta_total]])
        relations.append("=")
        c = np.concatenate([c, np.zeros(n_classes)])
        n_vars = n_plan + n_classes

    A = sp.csr_matrix(
        (np.concatenate(data) if data else np.empty(0),
         (np.concatenate(rows) if rows else np.empty(0, dtype=int),
          np.concatenate(cols) if cols else np.empty(0, dtype=int))),
        shape=(len(b), n_vars),
    )
    lp = LinearProgram(c, A, relations, b)
    sol = solve(lp)
    if sol.status != "optimal":
        raise LpError(
            f"transport LP ended {sol.status}; target mass {target.total_mass!r}, "
            f"total capacity {float(np.sum(caps))!r}"
        )

    plans = []
    offset = 0
    for w in cond_weights:
        n_k = len(w)
        plans.append(sol.x[offset:offset + n_t * n_k].reshape(n_t, n_k))
        offset += n_t * n_k
    beta_realized = sol.x[n_plan:] if split is not None else None
    return sol, plans, beta_realized


def _verify_plans(target, cond_weights, cap_scale, plans) -> None:
    row_sum = np.zeros(target.n_atoms)
    for plan, scale, w in zip(plans, cap_scale, cond_weights):
        if plan.size and plan.min() < -1e-12:
            raise LpError(f"negative plan entry {plan.min()!r}")
        if plan.shape[1]:
            col_sums = plan.sum(axis=0)
            if np.max(col_sums - scale * w) > PLAN_TOL:
                raise LpError("plan exceeds a class capacity")
        row_sum += plan.sum(axis=1)
    if np.max(np.abs(row_sum - target.weights), initial=0.0) > PLAN_TOL:
        raise LpError("plan does not reproduce the target marginal")


def wasserstein1(target: DiscreteMeasure, source: DiscreteMeasure,
                 cost: CostMatrix):
    """Classic optimal transport value and plan between equal-mass measures."""
    if abs(target.total_mass - source.total_mass) > 1e-10:
        raise ValueError(
            f"mass mismatch: {target.total_mass!r} vs {source.total_mass!r}"
        )
    _check_cost_block(cost, target.n_atoms, source.n_atoms, 0)
    n_t, n_s = target.n_atoms, source.n_atoms
    var = np.arange(n_t * n_s)
    rows = np.concatenate([np.repeat(np.arange(n_t), n_s),
                           n_t + np.tile(np.arange(n_s), n_t)])
    A = sp.csr_matrix((np.ones(2 * n_t * n_s), (rows, np.tile(var, 2))),
                      shape=(n_t + n_s, n_t * n_s))
    lp = LinearProgram(cost.entries.ravel(), A,
                       ["="] * (n_t + n_s),
                       np.concatenate([target.weights, source.weights]))
    sol = solve(lp)
    if sol.status != "optimal":
        raise LpError(f"transport LP ended {sol.status}")
    plan = sol.x.reshape(n_t, n_s)
    _verify_plans(target, [source.weights], np.ones(1), [plan])
    return sol.value, plan


def partial_ot_global(target: DiscreteMeasure, source: DiscreteMeasure,
                      cost: CostMatrix, beta: float):
    """Partial transport with uniformly relaxed source capacity ``(1+beta)s``.

    Equals the IMD of ``(target, (1+beta) source)`` over nonnegative
    1-Lipschitz functions; nonincreasing in ``beta``.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if not target.is_probability:
        raise ValueError("the target must be a probability measure")
    scale = np.array([1.0 + beta])
    sol, plans, _ = _solve_blocks(target, [source.weights], [cost], scale)
    _verify_plans(target, [source.weights], scale, plans)
    return sol.value, plans[0]


def partial_ot_per_class(target: DiscreteMeasure,
                         conditionals: Sequence[DiscreteMeasure],
                         proportions,
                         beta_vec,
                         costs: Sequence[CostMatrix]) -> TransportPlanSet:
    """Per-class partial transport at a fixed relaxation vector.

    Class ``k`` offers capacity ``(p_k + beta_vec[k])`` times its conditional
    weights.  Empty classes are permitted; relaxation assigned to them is
    simply unusable capacity.
    """
    p = np.asarray(proportions, dtype=float)
    beta_vec = np.asarray(beta_vec, dtype=float)
    if np.any(beta_vec < 0):
        raise ValueError("beta_vec must be nonnegative")
    if not (len(conditionals) == len(p) == len(beta_vec) == len(costs)):
        raise ValueError("conditionals, proportions, beta_vec and costs must align")
    if not target.is_probability:
        raise ValueError("the target must be a probability measure")
    cond_weights = [c.weights for c in conditionals]
    scale = p + beta_vec
    sol, plans, _ = _solve_blocks(target, cond_weights, costs, scale)
    _verify_plans(target, cond_weights, scale, plans)
    return TransportPlanSet(tuple(plans), beta_vec.copy(), sol.value)


def partial_ot_beta_split(target: DiscreteMeasure,
                          conditionals: Sequence[DiscreteMeasure],
                          proportions,
                          beta_total: float,
                          costs: Sequence[CostMatrix]) -> TransportPlanSet:
    """Jointly optimal plans and split of a total relaxation budget.

    The capacities enter linearly in ``beta``, so plans and split come out
    of a single LP with ``sum_k beta_k = beta_total``.  At degenerate optima
    the returned split is solver-determined (only the objective is unique).
    """
    if beta_total < 0:
        raise ValueError("beta_total must be nonnegative")
    p = np.asarray(proportions, dtype=float)
    if not (len(conditionals) == len(p) == len(costs)):
        raise ValueError("conditionals, proportions and costs must align")
    if not target.is_probability:
        raise ValueError("the target must be a probability measure")
    cond_weights = [c.weights for c in conditionals]
    sol, plans, beta = _solve_blocks(
        target, cond_weights, costs, p, split=(p, float(beta_total))
    )
    if abs(float(np.sum(beta)) - beta_total) > 1e-8:
        raise LpError(f"split budget violated: {np.sum(beta)!r} != {beta_total!r}")
    beta = np.maximum(beta, 0.0)
    _verify_plans(target, cond_weights, p + beta, plans)
    return TransportPlanSet(tuple(plans), beta, sol.value)


def lipschitz_imd_dual(target: DiscreteMeasure, source: DiscreteMeasure,
                       zero_on_support: bool = False):
    """IMD of (target, source) over nonnegative 1-Lipschitz potentials.

    Maximizes ``sum_i t_i f_i - sum_j s_j f_j`` over one value per ground
    atom (the deduplicated union of both supports) under ``f(u) - f(v) <=
    d(u, v)`` for every atom pair, with the nonnegativity constraint imposed
    only on the source support.  With ``zero_on_support`` the potential is
    pinned to 0 there instead, which evaluates the zero-localized IMD
    ``E_target[d(x, supp source)]``.

    The source is passed already relaxed (its weights are whatever capacity
    the comparison is against), so this is the dual of the per-class
    transport problem on the mixed measure.
    """
    if source.total_mass <= 0:
        raise ValueError("the source must carry positive mass")
    ground = ground_union(target.points, source.points)
    wt = weights_on_ground(target, ground)
    ws = weights_on_ground(source, ground)
    n = len(ground)
    dist = cdist(ground, ground)

    i_idx, j_idx = np.where(~np.eye(n, dtype=bool))
    n_pairs = len(i_idx)
    rows = np.repeat(np.arange(n_pairs), 2)
    cols = np.empty(2 * n_pairs, dtype=int)
    cols[0::2], cols[1::2] = i_idx, j_idx
    data = np.empty(2 * n_pairs)
    data[0::2], data[1::2] = 1.0, -1.0
    A = sp.csr_matrix((data, (rows, cols)), shape=(n_pairs, n))

    support = ws > 0
    lower = np.where(support, 0.0, -np.inf)
    upper = np.where(support & zero_on_support, 0.0, np.inf)
    lp = LinearProgram(ws - wt, A, ["<="] * n_pairs, dist[i_idx, j_idx],
                       lower=lower, upper=upper)
    sol = solve(lp)
    if sol.status != "optimal":
        raise LpError(f"dual LP ended {sol.status}")
    f = sol.x
    slack = f[i_idx] - f[j_idx] - dist[i_idx, j_idx]
    if slack.size and slack.max() > 1e-8:
        raise LpError(f"potential violates the Lipschitz constraint by {slack.max()!r}")
    if np.any(f[support] < -1e-10):
        raise LpError("potential is negative on the source support")
    potential = LipschitzPotential(f, np.flatnonzero(support), ground)
    return -sol.value, potential


def support_distance_imd(target: DiscreteMeasure, source: DiscreteMeasure) -> float:
    """Expected distance from the target to the source support.

    ``sum_i t_i min_j d(x_i, supp source)``; the distance-to-support function
    attains the zero-localized Lipschitz IMD.
    """
    support = source.support_points()
    if len(support) == 0:
        raise ValueError("the source support is empty")
    if target.n_atoms == 0:
        return 0.0
    dist = cdist(target.points, support)
    return float(target.weights @ dist.min(axis=1))


def plan_set_to_dict(plan_set: TransportPlanSet, threshold: float = 1e-12) -> dict:
    """JSON-ready export: per-class sparse triplets plus beta and objective."""
    blocks = []
    for k, plan in enumerate(plan_set.plans):
        ti, sj = np.nonzero(plan > threshold)
        blocks.append({
            "class": k + 1,
            "triplets": [
                [int(i), int(j), float(plan[i, j])] for i, j in zip(ti, sj)
            ],
        })
    return {
        "beta": [float(b) for b in plan_set.beta],
        "objective": float(plan_set.objective),
        "plans": blocks,
    }
