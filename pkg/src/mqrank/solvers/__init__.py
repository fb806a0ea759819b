"""Exact and approximate solvers for the (multi-query) ranking program."""

from __future__ import annotations

from ..ranking import DissimilarityStack
from .bnb import DEFAULT_NODE_BUDGET, branch_and_bound
from .grid import grid_solve, simplex_lattice
from .instance import (
    MilpInstance,
    MultiQueryTask,
    QueryTask,
    SolveReport,
    build_instance,
    objective_at,
    objective_values,
)
from .lp import linprog_dense
from .sweep import sweep2d

ENGINES = ("sweep2d", "bnb", "grid")
DEFAULT_GRID_RESOLUTION = 10_000

__all__ = [
    "ENGINES",
    "MilpInstance",
    "MultiQueryTask",
    "QueryTask",
    "SolveReport",
    "branch_and_bound",
    "build_instance",
    "grid_solve",
    "ilp_solve",
    "linprog_dense",
    "mqilp_solve",
    "objective_at",
    "objective_values",
    "simplex_lattice",
    "solve_instance",
    "sweep2d",
]


def solve_instance(
    instance: MilpInstance,
    engine: str = "sweep2d",
    node_budget: int = DEFAULT_NODE_BUDGET,
    resolution: int | None = None,
) -> SolveReport:
    if engine == "sweep2d":
        return sweep2d(instance)
    if engine in ("bnb", "branch-and-bound"):
        return branch_and_bound(instance, node_budget=node_budget)
    if engine == "grid":
        if resolution is None:
            resolution = DEFAULT_GRID_RESOLUTION if instance.J == 2 else 50
        return grid_solve(instance, resolution)
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def mqilp_solve(
    stack: DissimilarityStack,
    task: MultiQueryTask,
    engine: str = "sweep2d",
    **options,
) -> SolveReport:
    """Weights minimizing the total violation count over all ``K`` pairs."""
    if isinstance(task, QueryTask):
        task = MultiQueryTask.single(task)
    return solve_instance(build_instance(stack, task), engine, **options)


def ilp_solve(stack: DissimilarityStack, task: QueryTask, engine: str = "sweep2d", **options) -> SolveReport:
    """Single-query program: the multi-query program with ``K = 1``."""
    return solve_instance(build_instance(stack, MultiQueryTask.single(task)), engine, **options)
