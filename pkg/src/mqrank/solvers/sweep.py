"""Exact solver for two layers.

With ``alpha = (a, 1 - a)`` every constraint ``d_a(s) <= d_a(v)`` holds on a
closed sub-interval of ``[0, 1]``.  An indicator can be zero exactly on the
intersection of its ``|S_k|`` intervals, which is again a closed interval, so
the objective is ``n_indicators`` minus the number of such intervals covering
``a``.  A sorted sweep over interval endpoints finds the best coverage.
"""

from __future__ import annotations

import numpy as np

from .instance import MilpInstance, SolveReport, objective_at


def feasible_intervals(instance: MilpInstance) -> tuple[np.ndarray, np.ndarray]:
    """Per-indicator ``[lo, hi]`` on which it may be zero; empty when ``lo > hi``."""
    if instance.J != 2:
        raise ValueError(f"the breakpoint sweep needs exactly 2 layers, got J={instance.J}")
    los, his = [], []
    for b in instance.blocks:
        # f_s(a) = d_a(s) - d_a(v) = c + a * m, with d_a = a d1 + (1 - a) d2
        c = b.dS[1][:, None] - b.dC[1][None, :]
        m = (b.dS[0] - b.dS[1])[:, None] - (b.dC[0] - b.dC[1])[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            root = -c / m
        lower = np.where(m < 0, root, -np.inf)
        upper = np.where(m > 0, root, np.inf)
        never = (m == 0) & (c > 0)
        lo = np.maximum(lower.max(axis=0), 0.0)
        hi = np.minimum(upper.min(axis=0), 1.0)
        hi[never.any(axis=0)] = -1.0
        los.append(lo)
        his.append(hi)
    return np.concatenate(los), np.concatenate(his)


def best_segment(lo: np.ndarray, hi: np.ndarray) -> tuple[int, float, float, int]:
    """Leftmost segment of ``[0, 1]`` covered by the most closed intervals.

    Returns ``(coverage, left, right, n_events)``.  With no nonempty interval
    the whole of ``[0, 1]`` is optimal with coverage 0.
    """
    live = lo <= hi
    lo, hi = lo[live], hi[live]
    if lo.size == 0:
        return 0, 0.0, 1.0, 0
    coords = np.concatenate([lo, hi])
    # at equal coordinates starts (kind 0) come before ends (kind 1): closed intervals
    kinds = np.concatenate([np.zeros(lo.size, dtype=int), np.ones(hi.size, dtype=int)])
    order = np.lexsort((kinds, coords))
    coords, kinds = coords[order], kinds[order]
    cover = np.cumsum(np.where(kinds == 0, 1, -1))
    best = int(cover.max())
    first = int(np.argmax(cover == best))
    # the segment runs until the next event, which must be an end
    return best, float(coords[first]), float(coords[first + 1]), int(coords.size)


def canonical_alpha_2d(instance: MilpInstance) -> tuple[np.ndarray, int, int]:
    """Midpoint of the leftmost optimal segment, its exact objective, events."""
    lo, hi = feasible_intervals(instance)
    cover, left, right, events = best_segment(lo, hi)
    a = 0.5 * (left + right)
    return np.array([a, 1.0 - a]), instance.n_indicators - cover, events


def sweep2d(instance: MilpInstance) -> SolveReport:
    alpha, exact, events = canonical_alpha_2d(instance)
    objective = objective_at(instance, alpha)
    return SolveReport(
        alpha=alpha,
        objective=objective,
        engine="sweep2d",
        optimal=True,
        breakpoints=events,
        lower_bound=float(exact),
    )
