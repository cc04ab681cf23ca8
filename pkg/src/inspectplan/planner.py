"""Greedy cost-benefit solver for budgeted view selection.

gcb() grows a pose set by the best marginal-quality-to-marginal-cost ratio
within the budget; gcb_plus() post-processes with 2-opt reordering and
greedy re-insertion; brute_force() is the exact oracle used in tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .quality import objective_f
from .viewgraph import path_cost

# default constant for the optimum upper bound derived from the greedy
# approximation guarantee
DEFAULT_KAPPA = 0.5 * (1.0 - math.exp(-1.0))

_EPS = 1e-9


class UndefinedMetricError(ValueError):
    pass


@dataclass(frozen=True)
class PlanningProblem:
    graph: object            # ViewGraph
    qm: object               # QualityMatrix
    cost_model: object       # CostModel
    budget: float

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        if self.qm.k != self.graph.k:
            raise ValueError("quality matrix pose count does not match graph")


@dataclass
class PlanSolution:
    """Selected poses, their traversal order and the greedy iteration log."""

    order: list               # traversal order, each selected pose once
    f_value: float
    cost: float
    budget: float
    log: list = field(default_factory=list)  # (index, gain, marginal cost)

    @property
    def indices(self):
        return sorted(self.order)

    def to_json(self):
        return json.dumps({
            "schema": 1,
            "indices": [int(i) for i in self.indices],
            "order": [int(i) for i in self.order],
            "f": self.f_value,
            "cost": self.cost,
            "budget": self.budget,
            "log": [[int(i), float(g), float(c)] for i, g, c in self.log],
        })


def _nn_order(closure, selected):
    """Nearest-neighbor open walk over the metric closure.

    Starts at the first selected pose (insertion order) for determinism.
    """
    if not selected:
        return []
    order = [selected[0]]
    remaining = list(selected[1:])
    while remaining:
        cur = order[-1]
        dists = [closure[cur, j] for j in remaining]
        best = int(np.argmin(dists))
        order.append(remaining.pop(best))
    return order


def _order_cost(graph, order, cost_model):
    return path_cost(graph, order, cost_model)


def _set_cost(problem, selected):
    """Budget of a selection, charged along the NN open-walk order."""
    order = _nn_order(problem.graph.metric_closure, selected)
    return _order_cost(problem.graph, order, problem.cost_model), order


def gcb(problem):
    """Greedy cost-benefit: add the best gain/cost pose while budget allows.

    Zero marginal cost with positive gain outranks every finite ratio; ties
    break to the lowest pose index.  Deterministic.
    """
    if problem.graph.k == 0:
        raise ValueError("empty view graph")
    qm = problem.qm
    best_q = np.zeros(qm.n)
    selected = []
    cur_cost = 0.0
    log = []
    remaining = set(range(problem.graph.k))
    while remaining:
        best_key = None
        best_idx = None
        best_new = None
        for x in sorted(remaining):
            idx, vals = qm.columns[x]
            gain = float(np.maximum(vals - best_q[idx], 0.0).sum())
            if gain <= 0.0:
                continue
            try:
                new_cost, _ = _set_cost(problem, selected + [x])
            except Exception:
                continue
            if new_cost > problem.budget + _EPS:
                continue
            marginal = max(new_cost - cur_cost, 0.0)
            if marginal <= _EPS:
                key = (1, gain)
            else:
                key = (0, gain / marginal)
            if best_key is None or key > best_key:
                best_key = key
                best_idx = x
                best_new = (new_cost, gain, marginal)
        if best_idx is None:
            break
        new_cost, gain, marginal = best_new
        selected.append(best_idx)
        remaining.discard(best_idx)
        idx, vals = qm.columns[best_idx]
        np.maximum.at(best_q, idx, vals)
        log.append((best_idx, gain, marginal))
        cur_cost = new_cost
    cost, order = _set_cost(problem, selected)
    return PlanSolution(order=order, f_value=objective_f(qm, order),
                        cost=cost, budget=problem.budget, log=log)


def _two_opt(graph, order, cost_model):
    """2-opt segment reversal over the metric closure until no improvement."""
    order = list(order)
    if len(order) < 3:
        return order
    closure = graph.metric_closure
    improved = True
    while improved:
        improved = False
        n = len(order)
        for i in range(n - 1):
            for j in range(i + 1, n):
                # reversing order[i..j] changes only the two boundary hops
                before = 0.0
                after = 0.0
                if i > 0:
                    before += closure[order[i - 1], order[i]]
                    after += closure[order[i - 1], order[j]]
                if j < n - 1:
                    before += closure[order[j], order[j + 1]]
                    after += closure[order[i], order[j + 1]]
                if after < before - _EPS:
                    order[i:j + 1] = reversed(order[i:j + 1])
                    improved = True
    return order


def _best_insertion(graph, order, x, cost_model):
    """Cheapest position to splice pose x into an existing order."""
    closure = graph.metric_closure
    if not order:
        return 0, cost_model.alpha
    best_pos, best_add = None, np.inf
    for pos in range(len(order) + 1):
        if pos == 0:
            add = closure[x, order[0]]
        elif pos == len(order):
            add = closure[order[-1], x]
        else:
            a, b = order[pos - 1], order[pos]
            add = closure[a, x] + closure[x, b] - closure[a, b]
        if add < best_add:
            best_pos, best_add = pos, add
    return best_pos, float(best_add) + cost_model.alpha


def gcb_plus(problem, base):
    """Improvement pass: 2-opt the order, then greedily insert more poses.

    Alternates both moves until a full round changes nothing.  Never loses
    quality and never exceeds the budget.
    """
    qm = problem.qm
    order = list(base.order)
    while True:
        changed = False
        improved = _two_opt(problem.graph, order, problem.cost_model)
        if improved != order:
            order = improved
            changed = True
        cost = _order_cost(problem.graph, order, problem.cost_model)
        best_q = np.zeros(qm.n)
        for j in order:
            idx, vals = qm.columns[j]
            np.maximum.at(best_q, idx, vals)
        inserted = True
        while inserted:
            inserted = False
            best_key, best_x, best_pos, best_add = None, None, None, None
            for x in range(problem.graph.k):
                if x in order:
                    continue
                idx, vals = qm.columns[x]
                gain = float(np.maximum(vals - best_q[idx], 0.0).sum())
                if gain <= 0.0:
                    continue
                pos, add = _best_insertion(problem.graph, order, x,
                                           problem.cost_model)
                if not np.isfinite(add) or cost + add > problem.budget + _EPS:
                    continue
                key = (1, gain) if add <= _EPS else (0, gain / add)
                if best_key is None or key > best_key:
                    best_key, best_x, best_pos, best_add = key, x, pos, add
            if best_x is not None:
                order.insert(best_pos, best_x)
                cost += best_add
                idx, vals = qm.columns[best_x]
                np.maximum.at(best_q, idx, vals)
                inserted = True
                changed = True
        if not changed:
            break
    cost = _order_cost(problem.graph, order, problem.cost_model)
    return PlanSolution(order=order, f_value=objective_f(qm, order),
                        cost=cost, budget=problem.budget, log=list(base.log))


def brute_force(problem):
    """Exact maximizer over all pose subsets and visiting orders.

    Held-Karp dynamic programming gives the optimal open-walk cost of every
    subset; the best feasible subset by objective wins.  Test oracle only;
    refuses k > 12.
    """
    k = problem.graph.k
    if k > 12:
        raise ValueError("brute force limited to k <= 12")
    closure = problem.graph.metric_closure
    alpha = problem.cost_model.alpha
    qm = problem.qm
    # dp[mask][last] = min open-walk cost visiting mask, ending at last
    dp = np.full((1 << k, k), np.inf)
    parent = np.full((1 << k, k), -1, dtype=np.int64)
    for j in range(k):
        dp[1 << j, j] = 0.0
    for mask in range(1, 1 << k):
        for last in range(k):
            if not (mask >> last) & 1 or not np.isfinite(dp[mask, last]):
                continue
            base = dp[mask, last]
            for nxt in range(k):
                if (mask >> nxt) & 1:
                    continue
                cand = base + closure[last, nxt]
                nm = mask | (1 << nxt)
                if cand < dp[nm, nxt]:
                    dp[nm, nxt] = cand
                    parent[nm, nxt] = last
    best_f, best_mask, best_last = 0.0, 0, -1
    for mask in range(1, 1 << k):
        size = bin(mask).count("1")
        last = int(np.argmin(dp[mask]))
        cost = dp[mask, last] + alpha * size
        if cost > problem.budget + _EPS:
            continue
        f = objective_f(qm, [j for j in range(k) if (mask >> j) & 1])
        if f > best_f + _EPS:
            best_f, best_mask, best_last = f, mask, last
    if best_mask == 0:
        return PlanSolution(order=[], f_value=0.0, cost=0.0,
                            budget=problem.budget)
    order = []
    mask, last = best_mask, best_last
    while last >= 0:
        order.append(last)
        prev = parent[mask, last]
        mask &= ~(1 << last)
        last = int(prev)
    order.reverse()
    cost = _order_cost(problem.graph, order, problem.cost_model)
    return PlanSolution(order=order, f_value=best_f, cost=cost,
                        budget=problem.budget)


def opt_metric(solution_f, gcb_f, kappa=DEFAULT_KAPPA):
    """Fraction of the derived optimum upper bound a solution achieves.

    The bound is gcb_f / kappa, from the greedy near-optimality guarantee.
    """
    if gcb_f <= 0.0:
        raise UndefinedMetricError("opt metric undefined when the greedy "
                                   "solution has zero quality")
    return float(solution_f * kappa / gcb_f)
