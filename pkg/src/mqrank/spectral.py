"""Adjacency and Laplacian spectral embeddings, and the distances between them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class Embedding:
    Z: np.ndarray
    kind: str
    eigenvalues: np.ndarray

    @property
    def d(self) -> int:
        return self.Z.shape[1]


def _check_symmetric(A: np.ndarray, what: str) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{what} must be square, got shape {A.shape}")
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    if np.abs(A - A.T).max(initial=0.0) > SYMMETRY_TOL * scale:
        raise ValueError(f"{what} is not symmetric")
    return A


def _top_scaled_eigvecs(A: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    n = A.shape[0]
    if not 1 <= d <= n:
        raise ValueError(f"embedding dimension must satisfy 1 <= d <= n={n}, got {d}")
    # eigh only reads one triangle; symmetrize so both agree
    w, U = np.linalg.eigh((A + A.T) / 2.0)
    order = np.argsort(-np.abs(w), kind="stable")[:d]
    w, U = w[order], U[:, order]
    pivots = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[pivots, np.arange(d)])
    signs[signs == 0] = 1.0
    U = U * signs
    return U * np.sqrt(np.abs(w)), w


def ase_embed(A: np.ndarray, d: int) -> Embedding:
    """Adjacency spectral embedding ``U_d |Lambda_d|^{1/2}``.

    The top ``d`` eigenpairs are chosen by eigenvalue magnitude, so strongly
    negative eigenvalues of a sampled adjacency matrix are kept.  Each
    eigenvector is signed so that its largest-magnitude entry is positive.
    """
    A = _check_symmetric(A, "adjacency matrix")
    Z, w = _top_scaled_eigvecs(A, d)
    return Embedding(Z, "ASE", w)


def normalized_adjacency(A: np.ndarray) -> np.ndarray:
    """``D^{-1/2} A D^{-1/2}``; raises if any vertex has zero degree."""
    A = _check_symmetric(A, "adjacency matrix")
    degrees = A.sum(axis=1)
    isolated = np.flatnonzero(degrees <= 0)
    if isolated.size:
        raise ValueError(
            f"vertex {int(isolated[0])} has zero degree "
            f"({isolated.size} isolated vertices); restrict to the largest "
            "connected component first"
        )
    inv_sqrt = 1.0 / np.sqrt(degrees)
    return A * np.outer(inv_sqrt, inv_sqrt)


def lse_embed(A: np.ndarray, d: int) -> Embedding:
    Z, w = _top_scaled_eigvecs(normalized_adjacency(A), d)
    return Embedding(Z, "LSE", w)


def pairwise_dissimilarity(Z: Embedding | np.ndarray) -> np.ndarray:
    """Euclidean distances between embedding rows (symmetric, zero diagonal)."""
    if isinstance(Z, Embedding):
        Z = Z.Z
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    if Z.shape[0] < 2:
        return np.zeros((Z.shape[0], Z.shape[0]))
    return squareform(pdist(Z, metric="euclidean"))


def embed_dissimilarity(A: np.ndarray, kind: str, d: int) -> np.ndarray:
    kind = kind.upper()
    if kind == "ASE":
        return pairwise_dissimilarity(ase_embed(A, d))
    if kind == "LSE":
        return pairwise_dissimilarity(lse_embed(A, d))
    raise ValueError(f"unknown embedding kind {kind!r}; expected ASE or LSE")
