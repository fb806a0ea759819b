"""Dissimilarity stacks, simplex weights, and the rankings they induce."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

SIMPLEX_TOL = 1e-9
MATRIX_TOL = 1e-9


def validate_dissimilarity(D: np.ndarray, label: str = "matrix", tol: float = MATRIX_TOL) -> np.ndarray:
    """Check that ``D`` is a square, symmetric, nonnegative, hollow matrix."""
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError(f"{label}: expected a square matrix, got shape {D.shape}")
    if not np.isfinite(D).all():
        i, j = np.argwhere(~np.isfinite(D))[0]
        raise ValueError(f"{label}: non-finite entry at ({i}, {j})")
    if (D < 0).any():
        i, j = np.argwhere(D < 0)[0]
        raise ValueError(f"{label}: negative entry {D[i, j]!r} at ({i}, {j})")
    scale = max(1.0, float(D.max(initial=0.0)))
    if np.abs(np.diag(D)).max(initial=0.0) > tol * scale:
        i = int(np.argmax(np.abs(np.diag(D))))
        raise ValueError(f"{label}: nonzero diagonal entry at ({i}, {i})")
    asym = np.abs(D - D.T)
    if asym.max(initial=0.0) > tol * scale:
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        raise ValueError(f"{label}: not symmetric at ({i}, {j})")
    return D


@dataclass(frozen=True)
class DissimilarityStack:
    """``J`` dissimilarity matrices over the same ``n`` vertices.

    ``layers`` has shape ``(J, n, n)``.
    """

    layers: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        layers = np.asarray(self.layers, dtype=float)
        if layers.ndim != 3:
            raise ValueError(f"layers must have shape (J, n, n), got {layers.shape}")
        labels = tuple(self.labels) or tuple(f"d{j + 1}" for j in range(layers.shape[0]))
        if len(labels) != layers.shape[0]:
            raise ValueError(f"{len(labels)} labels for {layers.shape[0]} layers")
        if len(set(labels)) != len(labels):
            raise ValueError(f"layer labels must be unique, got {labels}")
        for D, label in zip(layers, labels):
            validate_dissimilarity(D, label)
        layers = layers.copy()
        layers.setflags(write=False)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_matrices(cls, matrices: Sequence[np.ndarray], labels: Sequence[str] = ()) -> "DissimilarityStack":
        shapes = {np.shape(D) for D in matrices}
        if len(shapes) != 1:
            raise ValueError(f"all layers must share one shape, got {sorted(shapes)}")
        return cls(np.stack([np.asarray(D, dtype=float) for D in matrices]), tuple(labels))

    @property
    def J(self) -> int:
        return self.layers.shape[0]

    @property
    def n(self) -> int:
        return self.layers.shape[1]

    def rows(self, query: int) -> np.ndarray:
        """``(J, n)`` array of ``d^j(query, v)``."""
        self.check_vertex(query)
        return self.layers[:, query, :]

    def check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise ValueError(f"vertex id {v} out of range for n={self.n}")


def as_alpha(alpha: Iterable[float], J: int | None = None) -> np.ndarray:
    """Validate a point on the probability simplex and return it as an array."""
    a = np.asarray(list(alpha) if not isinstance(alpha, np.ndarray) else alpha, dtype=float).ravel()
    if J is not None and a.size != J:
        raise ValueError(f"alpha has {a.size} entries but the stack has J={J} layers")
    if a.size == 0 or not np.isfinite(a).all():
        raise ValueError(f"alpha must be a finite nonempty vector, got {a}")
    if (a < -SIMPLEX_TOL).any():
        raise ValueError(f"alpha has negative entries: {a}")
    if abs(a.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"alpha must sum to 1, sums to {float(a.sum())!r}")
    return np.clip(a, 0.0, None)


def combine(stack: DissimilarityStack, alpha, query: int) -> np.ndarray:
    """Length-``n`` row ``sum_j alpha_j d^j(query, .)``.

    The entry at ``query`` itself is zero and is never ranked.
    """
    a = as_alpha(alpha, stack.J)
    return a @ stack.rows(query)


@dataclass(frozen=True)
class RankedList:
    """Candidates for ``query`` in ascending order of combined dissimilarity."""

    query: int
    order: np.ndarray
    values: np.ndarray

    @cached_property
    def ranks(self) -> dict[int, int]:
        return {int(v): r for r, v in enumerate(self.order, start=1)}

    def rank_of(self, v: int) -> int:
        try:
            return self.ranks[int(v)]
        except KeyError:
            raise KeyError(f"vertex {v} is not a candidate in this ranked list") from None

    def __len__(self) -> int:
        return self.order.size


def rank(combined: np.ndarray, query: int, exclude: Iterable[int] = ()) -> RankedList:
    """Sort candidates ascending by value; ties go to the smaller vertex id.

    The query and any ``exclude`` ids are left out of the candidate set.
    """
    combined = np.asarray(combined, dtype=float)
    keep = np.ones(combined.size, dtype=bool)
    keep[query] = False
    for v in exclude:
        keep[v] = False
    ids = np.flatnonzero(keep)
    vals = combined[ids]
    order = np.lexsort((ids, vals))
    return RankedList(int(query), ids[order], vals[order])
