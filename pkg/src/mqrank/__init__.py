"""Learning convex combinations of dissimilarity measures for ranking."""

from .estimators import EstimatorKind, estimate, estimate_all, mix
from .metrics import mrr, normalized_mrr, optimal_mrr, recall_at_k
from .ranking import DissimilarityStack, RankedList, as_alpha, combine, rank
from .solvers import MultiQueryTask, QueryTask, SolveReport, build_instance, ilp_solve, mqilp_solve

__version__ = "0.1.0"

__all__ = [
    "DissimilarityStack",
    "EstimatorKind",
    "MultiQueryTask",
    "QueryTask",
    "RankedList",
    "SolveReport",
    "as_alpha",
    "build_instance",
    "combine",
    "estimate",
    "estimate_all",
    "ilp_solve",
    "mix",
    "mqilp_solve",
    "mrr",
    "normalized_mrr",
    "optimal_mrr",
    "rank",
    "recall_at_k",
]
