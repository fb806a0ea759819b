from __future__ import annotations

from itertools import combinations

import numpy as np

from .instance import MilpInstance, SolveReport, objective_values


def simplex_lattice(J: int, resolution: int) -> np.ndarray:
    """All ``c / resolution`` with nonnegative integer ``c`` summing to ``resolution``.

    Rows are ordered lexicographically by ascending first coordinate, then
    second, and so on.
    """
    if resolution < 1 or J < 1:
        raise ValueError(f"need J >= 1 and resolution >= 1, got J={J}, resolution={resolution}")
    if J == 1:
        return np.ones((1, 1))
    # stars and bars: bar positions among resolution + J - 1 slots
    points = []
    for bars in combinations(range(resolution + J - 1), J - 1):
        edges = (-1, *bars, resolution + J - 1)
        points.append([edges[i + 1] - edges[i] - 1 for i in range(J)])
    counts = np.array(points, dtype=float)
    order = np.lexsort(counts.T[::-1])
    return counts[order] / resolution


def grid_solve(instance: MilpInstance, resolution: int) -> SolveReport:
    """First lattice point with the smallest objective; never claims optimality."""
    if resolution < 2:
        raise ValueError(f"grid resolution must be >= 2, got {resolution}")
    lattice = simplex_lattice(instance.J, resolution)
    values = objective_values(instance, lattice)
    best = int(values.argmin())
    return SolveReport(
        alpha=lattice[best],
        objective=int(values[best]),
        engine="grid",
        optimal=False,
        nodes=lattice.shape[0],
    )
