"""Random dot product graph sampling.

Latent positions live on the positive part of the unit ball, so every inner
product is a valid edge probability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PROBABILITY_TOL = 1e-12


@dataclass(frozen=True)
class LatentPositions:
    X: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]


def sample_latent_positions(n: int, m: int, rng: np.random.Generator) -> LatentPositions:
    """Draw ``n`` i.i.d. points uniformly from ``{x >= 0, ||x||_2 <= 1}`` in R^m.

    Rejection sampling from the unit box ``[0, 1]^m``.  Accepted draws are kept
    in generation order so the result depends only on the generator state.
    """
    if n < 1 or m < 1:
        raise ValueError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    accepted = []
    have = 0
    while have < n:
        batch = rng.random((max(2 * (n - have), 16), m))
        keep = batch[np.einsum("ij,ij->i", batch, batch) <= 1.0]
        accepted.append(keep)
        have += keep.shape[0]
    X = np.concatenate(accepted)[:n]
    X.setflags(write=False)
    return LatentPositions(X)


def build_probability_matrix(lp: LatentPositions) -> np.ndarray:
    """Return ``P = X X^T``, rejecting inner products outside [0, 1]."""
    X = np.asarray(lp.X if isinstance(lp, LatentPositions) else lp, dtype=float)
    P = X @ X.T
    # matmul is not guaranteed to produce a bit-symmetric result
    P = np.triu(P) + np.triu(P, 1).T
    bad = (P < -PROBABILITY_TOL) | (P > 1.0 + PROBABILITY_TOL)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValueError(
            f"inner product <X_{i}, X_{j}> = {P[i, j]!r} is not a probability"
        )
    return np.clip(P, 0.0, 1.0)


def sample_graph(P: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sample a hollow undirected graph with independent Bernoulli(P_ij) edges."""
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    iu = np.triu_indices(n, k=1)
    edges = rng.random(iu[0].size) < P[iu]
    A = np.zeros((n, n))
    A[iu] = edges
    A += A.T
    return A


def sample_rdpg(n: int, m: int, rng: np.random.Generator) -> tuple[LatentPositions, np.ndarray]:
    lp = sample_latent_positions(n, m, rng)
    return lp, sample_graph(build_probability_matrix(lp), rng)
