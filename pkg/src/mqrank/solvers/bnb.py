"""Best-first branch and bound over the binary indicators.

Each node fixes some indicators to zero (their constraints become hard) and
some to one (their constraints are dropped).  The remaining indicators are
relaxed to ``x >= 0`` and the resulting LP over the simplex is solved with the
dense simplex in :mod:`.lp`.  Every LP solution also yields a feasible
weight vector whose true objective seeds the incumbent.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .instance import MilpInstance, SolveReport, objective_values, simplex_vertices
from .lp import INFEASIBLE, OPTIMAL, linprog_dense
from .sweep import canonical_alpha_2d

DEFAULT_NODE_BUDGET = 1_000_000
INT_TOL = 1e-9


class _Presolved:
    """Rows that can actually bind, grouped by indicator.

    A row whose left side is nonpositive on the whole simplex never binds; an
    indicator with a row that is positive on the whole simplex is always on.
    With ``tighten`` the big-M of each row is lowered to the row's maximum
    over the simplex, which is still valid.
    """

    def __init__(self, instance: MilpInstance, tighten: bool):
        coef = instance.coef
        hi = coef.max(axis=1)
        lo = coef.min(axis=1)
        always_on = np.zeros(instance.n_indicators, dtype=bool)
        always_on[instance.row_indicator[lo > 0]] = True
        live = (hi > 0) & ~always_on[instance.row_indicator]
        self.forced_on = int(always_on.sum())
        self.coef = coef[live]
        self.ind = instance.row_indicator[live]
        m = instance.row_m[live]
        self.m = np.minimum(m, hi[live]) if tighten else m
        self.active = np.unique(self.ind)  # ascending id order
        self.J = instance.J

    def relaxation(self, zeros: frozenset, ones: frozenset):
        free = [i for i in self.active if i not in zeros and i not in ones]
        col = {i: self.J + c for c, i in enumerate(free)}
        hard = np.isin(self.ind, list(zeros)) if zeros else np.zeros(self.ind.size, dtype=bool)
        soft = np.isin(self.ind, free)
        rows = hard | soft
        A = np.zeros((int(rows.sum()), self.J + len(free)))
        A[:, : self.J] = self.coef[rows]
        for r, (i, m) in enumerate(zip(self.ind[rows], self.m[rows])):
            if i in col:
                A[r, col[i]] = -m
        # unit row scale keeps pivots on narrow feasible regions well conditioned
        A /= np.abs(A).max(axis=1, keepdims=True)
        c = np.concatenate([np.zeros(self.J), np.ones(len(free))])
        A_eq = np.concatenate([np.ones(self.J), np.zeros(len(free))])[None, :]
        return free, c, A, A_eq


def _clean_alpha(a: np.ndarray) -> np.ndarray:
    a = np.clip(a, 0.0, None)
    return a / a.sum()


def branch_and_bound(
    instance: MilpInstance,
    node_budget: int = DEFAULT_NODE_BUDGET,
    tighten: bool = True,
    rule: str = "bland",
) -> SolveReport:
    """Exact minimum of the indicator program for any number of layers.

    Branches on the lowest-id fractional indicator.  Nodes are explored in
    order of their parent's LP bound, ties by creation order.  If more than
    ``node_budget`` LPs are needed the best incumbent is returned with
    ``optimal=False``.
    """
    pre = _Presolved(instance, tighten)
    J = instance.J

    # the simplex vertices give the starting incumbent
    starts = simplex_vertices(J)
    values = objective_values(instance, starts)
    best = int(values.argmin())
    incumbent, inc_alpha = int(values[best]), starts[best].copy()

    heap = [(0.0, 0, frozenset(), frozenset())]
    seq = 1
    nodes = 0
    proven = True
    while heap:
        bound, _, zeros, ones = heapq.heappop(heap)
        if math.ceil(bound - INT_TOL) >= incumbent:
            heap.clear()
            break
        if nodes >= node_budget:
            heapq.heappush(heap, (bound, -1, zeros, ones))
            proven = False
            break
        nodes += 1
        free, c, A, A_eq = pre.relaxation(zeros, ones)
        res = linprog_dense(c, A, np.zeros(A.shape[0]), A_eq, np.ones(1), rule=rule)
        if res.status not in (OPTIMAL, INFEASIBLE):
            # the relaxation is bounded, so this is a numerical failure: retry
            other = "dantzig" if rule == "bland" else "bland"
            res = linprog_dense(c, A, np.zeros(A.shape[0]), A_eq, np.ones(1), rule=other)
        if res.status == INFEASIBLE:
            continue
        if res.status != OPTIMAL:
            raise RuntimeError(f"LP relaxation failed with status {res.status}")
        node_bound = pre.forced_on + len(ones) + res.fun
        alpha = _clean_alpha(res.x[:J])
        value = int(objective_values(instance, alpha)[0])
        if value < incumbent:
            incumbent, inc_alpha = value, alpha
        if math.ceil(node_bound - INT_TOL) >= incumbent:
            continue
        x = res.x[J:]
        frac = np.flatnonzero((x > INT_TOL) & (x < 1.0 - INT_TOL))
        if frac.size == 0:
            # integral relaxation: its value is attained (and beaten or matched) above
            continue
        v = free[int(frac[0])]
        heapq.heappush(heap, (node_bound, seq, zeros | {v}, ones))
        heapq.heappush(heap, (node_bound, seq + 1, zeros, ones | {v}))
        seq += 2

    lower = float(incumbent) if proven else float(min(b for b, *_ in heap))
    if J == 2 and proven:
        alpha2, exact, _ = canonical_alpha_2d(instance)
        if exact == incumbent and int(objective_values(instance, alpha2)[0]) == incumbent:
            inc_alpha = alpha2
    return SolveReport(
        alpha=inc_alpha,
        objective=int(objective_values(instance, inc_alpha)[0]),
        engine="branch-and-bound",
        optimal=proven,
        nodes=nodes,
        lower_bound=lower,
    )
