"""Ranking quality: MRR, normalized MRR and recall at k."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .ranking import RankedList


def _eval_ranks(ranked: RankedList, evalset: Iterable[int]) -> np.ndarray:
    members = [int(v) for v in evalset]
    if not members:
        raise ValueError("evaluation set is empty")
    if len(set(members)) != len(members):
        raise ValueError("evaluation set has duplicate members")
    if ranked.query in members:
        raise ValueError(f"evaluation set contains the query {ranked.query}")
    missing = [v for v in members if v not in ranked.ranks]
    if missing:
        raise ValueError(f"evaluation vertex {missing[0]} is not in the ranked list")
    return np.array([ranked.ranks[v] for v in members], dtype=float)


def mrr(ranked: RankedList, evalset: Iterable[int]) -> float:
    """Mean of ``1 / rank`` over the evaluation set."""
    return float(np.mean(1.0 / _eval_ranks(ranked, evalset)))


def optimal_mrr(size: int) -> float:
    """MRR of a list that puts ``size`` evaluation items at ranks ``1..size``."""
    return float(np.mean(1.0 / np.arange(1, size + 1)))


def normalized_mrr(ranked: RankedList, evalset: Iterable[int]) -> float:
    ranks = _eval_ranks(ranked, evalset)
    return float(np.mean(1.0 / ranks)) / optimal_mrr(ranks.size)


def recall_at_k(ranked: RankedList, evalset: Iterable[int], k: int) -> float:
    """Fraction of the evaluation set within the top ``k`` ranks."""
    if not 1 <= k <= len(ranked):
        raise ValueError(f"k must be in 1..{len(ranked)}, got {k}")
    ranks = _eval_ranks(ranked, evalset)
    return float(np.mean(ranks <= k))
