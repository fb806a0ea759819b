"""The three weight estimates compared throughout: single-query, multi-query
and their average."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .ranking import SIMPLEX_TOL, DissimilarityStack
from .solvers import MultiQueryTask, SolveReport, ilp_solve, mqilp_solve


class EstimatorKind(str, enum.Enum):
    SINGLE = "single"
    MULTI = "multi"
    COMBINED = "combined"


def mix(alpha_single: np.ndarray, alpha_multi: np.ndarray, weight: float = 0.5) -> np.ndarray:
    """``weight * alpha_single + (1 - weight) * alpha_multi``."""
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"mixing weight must lie in [0, 1], got {weight}")
    a = weight * np.asarray(alpha_single, dtype=float) + (1.0 - weight) * np.asarray(alpha_multi, dtype=float)
    if abs(a.sum() - 1.0) > SIMPLEX_TOL:
        a = a / a.sum()
    return a


@dataclass
class Estimates:
    single: SolveReport
    multi: SolveReport
    combined: np.ndarray

    def alpha(self, kind: EstimatorKind | str) -> np.ndarray:
        kind = EstimatorKind(kind)
        if kind is EstimatorKind.SINGLE:
            return self.single.alpha
        if kind is EstimatorKind.MULTI:
            return self.multi.alpha
        return self.combined


def estimate_all(
    stack: DissimilarityStack,
    task: MultiQueryTask,
    engine: str = "sweep2d",
    weight: float = 0.5,
    **options,
) -> Estimates:
    """Solve once for ``(v*, S)`` and once jointly for all pairs."""
    single = ilp_solve(stack, task.target, engine, **options)
    if task.K == 1:
        multi = single
    else:
        multi = mqilp_solve(stack, task, engine, **options)
    return Estimates(single, multi, mix(single.alpha, multi.alpha, weight))


def estimate(
    stack: DissimilarityStack,
    task: MultiQueryTask,
    kind: EstimatorKind | str,
    engine: str = "sweep2d",
    weight: float = 0.5,
    **options,
) -> np.ndarray:
    kind = EstimatorKind(kind)
    if kind is EstimatorKind.SINGLE:
        return ilp_solve(stack, task.target, engine, **options).alpha
    if kind is EstimatorKind.MULTI:
        return mqilp_solve(stack, task, engine, **options).alpha
    return estimate_all(stack, task, engine, weight, **options).combined
