"""Indicator/big-M encoding of the single- and multi-query ranking programs.

For every task ``k`` and candidate ``v`` in ``C_k = V - ({q_k} | S_k)`` there is
a binary indicator ``x[k, v]`` and, for every ``s`` in ``S_k``, a constraint::

    sum_j a_j d^j(q_k, s) <= sum_j a_j d^j(q_k, v) + M_k x[k, v]

The objective is the number of indicators switched on.  An indicator may be
zero only when ``v`` is at least as dissimilar to ``q_k`` as every ``s``; ties
are not violations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..ranking import DissimilarityStack, as_alpha

# Combined values closer than TIE_RTOL * M_k count as ties.  Solutions that sit
# exactly on a tie hyperplane are only reproducible up to rounding.
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class QueryTask:
    q: int
    S: tuple[int, ...]

    def __post_init__(self):
        S = tuple(int(s) for s in self.S)
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "S", S)
        if not S:
            raise ValueError(f"query {self.q}: the similar set S is empty")
        if self.q in S:
            raise ValueError(f"query {self.q} appears in its own similar set")
        if len(set(S)) != len(S):
            raise ValueError(f"query {self.q}: similar set has duplicates {S}")

    def check(self, n: int) -> None:
        for v in (self.q, *self.S):
            if not 0 <= v < n:
                raise ValueError(f"vertex id {v} out of range for n={n}")


@dataclass(frozen=True)
class MultiQueryTask:
    """``tasks[0]`` is the nomination target ``(v*, S)``."""

    tasks: tuple[QueryTask, ...]

    def __post_init__(self):
        tasks = tuple(self.tasks)
        if not tasks:
            raise ValueError("a multi-query task needs at least one (q, S) pair")
        object.__setattr__(self, "tasks", tasks)

    @classmethod
    def single(cls, task: QueryTask) -> "MultiQueryTask":
        return cls((task,))

    @property
    def K(self) -> int:
        return len(self.tasks)

    @property
    def target(self) -> QueryTask:
        return self.tasks[0]


@dataclass(frozen=True)
class TaskBlock:
    """Dissimilarity data for one ``(q_k, S_k)`` pair."""

    q: int
    S: np.ndarray
    C: np.ndarray
    dS: np.ndarray  # (J, |S_k|)
    dC: np.ndarray  # (J, |C_k|)
    big_m: float
    offset: int  # index of this block's first indicator

    @property
    def tol(self) -> float:
        return TIE_RTOL * max(self.big_m, np.finfo(float).tiny)


@dataclass(frozen=True)
class MilpInstance:
    stack: DissimilarityStack
    task: MultiQueryTask
    blocks: tuple[TaskBlock, ...]
    n_indicators: int
    # one row per (k, s, v): coefficients of d_alpha(s) - d_alpha(v) <= M x
    coef: np.ndarray = field(repr=False)
    row_indicator: np.ndarray = field(repr=False)
    row_m: np.ndarray = field(repr=False)

    @property
    def J(self) -> int:
        return self.stack.J

    @property
    def n_constraints(self) -> int:
        return self.coef.shape[0]

    @property
    def indicator_task(self) -> np.ndarray:
        return np.concatenate([np.full(b.C.size, k) for k, b in enumerate(self.blocks)])

    @property
    def indicator_vertex(self) -> np.ndarray:
        return np.concatenate([b.C for b in self.blocks])


def build_instance(
    stack: DissimilarityStack,
    task: MultiQueryTask | QueryTask,
    big_m: float | Sequence[float] | None = None,
) -> MilpInstance:
    """Encode ``task`` against ``stack``.

    ``big_m`` defaults to ``M_k = max_{j, v} d^j(q_k, v)`` per task.  A scalar
    or per-task sequence overrides it; values below the per-task bound are
    rejected because they would cut off feasible rankings.
    """
    if isinstance(task, QueryTask):
        task = MultiQueryTask.single(task)
    n = stack.n
    if big_m is not None:
        big_m = np.broadcast_to(np.asarray(big_m, dtype=float), (task.K,))
    blocks = []
    coef, row_ind, row_m = [], [], []
    offset = 0
    for k, t in enumerate(task.tasks):
        t.check(n)
        rows = stack.rows(t.q)
        S = np.array(t.S, dtype=int)
        mask = np.ones(n, dtype=bool)
        mask[t.q] = False
        mask[S] = False
        C = np.flatnonzero(mask)
        m_k = float(rows.max(initial=0.0))
        if big_m is not None:
            if big_m[k] < m_k:
                raise ValueError(f"task {k}: big-M {big_m[k]} is below the valid bound {m_k}")
            m_k = float(big_m[k])
        block = TaskBlock(t.q, S, C, rows[:, S], rows[:, C], m_k, offset)
        blocks.append(block)
        # (|S|, |C|, J) differences d^j(q, s) - d^j(q, v)
        diff = block.dS.T[:, None, :] - block.dC.T[None, :, :]
        coef.append(diff.reshape(-1, stack.J))
        row_ind.append(np.tile(offset + np.arange(C.size), S.size))
        row_m.append(np.full(S.size * C.size, m_k))
        offset += C.size
    return MilpInstance(
        stack=stack,
        task=task,
        blocks=tuple(blocks),
        n_indicators=offset,
        coef=np.concatenate(coef),
        row_indicator=np.concatenate(row_ind),
        row_m=np.concatenate(row_m),
    )


def violations(instance: MilpInstance, alphas: np.ndarray) -> np.ndarray:
    """Boolean ``(G, n_indicators)`` matrix: does candidate beat some ``s``?"""
    alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
    out = []
    for b in instance.blocks:
        worst_s = (alphas @ b.dS).max(axis=1, keepdims=True)
        out.append(alphas @ b.dC < worst_s - b.tol)
    return np.concatenate(out, axis=1)


def objective_values(instance: MilpInstance, alphas: np.ndarray) -> np.ndarray:
    """Objective at each row of ``alphas`` (no simplex validation)."""
    alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
    total = np.zeros(alphas.shape[0], dtype=np.int64)
    chunk = max(1, 2_000_000 // max(1, instance.n_indicators))
    for start in range(0, alphas.shape[0], chunk):
        part = alphas[start:start + chunk]
        total[start:start + chunk] = violations(instance, part).sum(axis=1)
    return total


def objective_at(instance: MilpInstance, alpha) -> int:
    """Number of candidates, over all tasks, ranked strictly ahead of some ``s``."""
    a = as_alpha(alpha, instance.J)
    return int(objective_values(instance, a[None, :])[0])


def simplex_vertices(J: int) -> np.ndarray:
    return np.eye(J)


@dataclass
class SolveReport:
    alpha: np.ndarray
    objective: int
    engine: str
    optimal: bool
    nodes: int = 0
    breakpoints: int = 0
    lower_bound: float = float("nan")

    def as_dict(self) -> dict:
        return {
            "alpha": [float(a) for a in self.alpha],
            "objective": int(self.objective),
            "engine": self.engine,
            "optimal": bool(self.optimal),
            "nodes": int(self.nodes),
            "breakpoints": int(self.breakpoints),
        }
