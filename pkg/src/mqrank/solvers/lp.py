"""Dense two-phase primal simplex.

Solves ``min c @ x`` subject to ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq`` and
``x >= 0`` on a full tableau.  Bland's rule (lowest-index entering column,
lowest-index leaving variable on ratio ties) guarantees termination on the
heavily degenerate relaxations produced by big-M constraints.

The tableau is rebuilt from the original data and the current basis every
``REFACTOR_EVERY`` pivots and before optimality is accepted, so rounding
error cannot accumulate across long runs of degenerate pivots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL, ITERATION_LIMIT, INFEASIBLE, UNBOUNDED, NUMERICAL = 0, 1, 2, 3, 4

PIVOT_TOL = 1e-9
COST_TOL = 1e-10
FEAS_TOL = 1e-8
RAY_TOL = 1e-7
REFACTOR_EVERY = 50
# among tied rows, skip pivots this much smaller than the largest candidate
TIE_PIVOT_RATIO = 1e-3


@dataclass
class LPResult:
    status: int
    x: np.ndarray | None
    fun: float
    nit: int

    @property
    def success(self) -> bool:
        return self.status == OPTIMAL


def _pivot(T: np.ndarray, basis: np.ndarray, r: int, col: int) -> None:
    T[r] /= T[r, col]
    factors = T[:, col].copy()
    factors[r] = 0.0
    T -= np.outer(factors, T[r])
    basis[r] = col


def _candidates(costs: np.ndarray, rule: str) -> np.ndarray:
    neg = np.flatnonzero(costs < -COST_TOL)
    if rule == "bland":
        return neg
    return neg[np.argsort(costs[neg], kind="stable")]


def _leaving(T: np.ndarray, basis: np.ndarray, col: int) -> int:
    column = T[:-1, col]
    rows = np.flatnonzero(column > PIVOT_TOL)
    if rows.size == 0:
        return -1
    # rounding can leave tiny negative right-hand sides on degenerate rows
    ratios = np.maximum(T[rows, -1], 0.0) / column[rows]
    best = ratios.min()
    tied = ratios <= best + 1e-12 * max(1.0, abs(best))
    ties, elems = rows[tied], column[rows[tied]]
    ties = ties[elems >= TIE_PIVOT_RATIO * elems.max()]
    return int(ties[np.argmin(basis[ties])])


def _rebuild(F: np.ndarray, rhs: np.ndarray, cost: np.ndarray, basis: np.ndarray) -> np.ndarray | None:
    """Tableau ``[B^-1 F | B^-1 rhs]`` with reduced costs, or None if B is singular."""
    try:
        body = np.linalg.solve(F[:, basis], np.column_stack([F, rhs]))
    except np.linalg.LinAlgError:
        return None
    T = np.empty((body.shape[0] + 1, body.shape[1]))
    T[:-1] = body
    T[-1, :-1] = cost
    T[-1, -1] = 0.0
    T[-1] -= cost[basis] @ body
    return T


def _confirmed_ray(T, ncols, rule) -> bool:
    for col in _candidates(T[-1, :ncols], rule):
        if T[-1, col] < -RAY_TOL and not (T[:-1, col] > PIVOT_TOL).any():
            return True
    return False


def _run(T, basis, F, rhs, cost, ncols, rule, max_iter):
    """Pivot until optimal; returns ``(status, iterations, tableau)``.

    Optimality and unboundedness are only reported after they survive a
    rebuild of the tableau from the original data.
    """
    since_rebuild = 0
    for it in range(max_iter):
        if since_rebuild >= REFACTOR_EVERY:
            fresh = _rebuild(F, rhs, cost, basis)
            if fresh is None:
                return NUMERICAL, it, T
            T = fresh
            since_rebuild = 0
        pivoted = ray = False
        for col in _candidates(T[-1, :ncols], rule):
            r = _leaving(T, basis, col)
            if r >= 0:
                _pivot(T, basis, r, col)
                pivoted = True
                since_rebuild += 1
                break
            # a column without a pivot row is a ray only if its cost is
            # clearly negative; otherwise the cost is rounding noise
            if T[-1, col] < -RAY_TOL:
                ray = True
                break
        if pivoted:
            continue
        if since_rebuild:
            fresh = _rebuild(F, rhs, cost, basis)
            if fresh is None:
                return NUMERICAL, it, T
            T = fresh
            since_rebuild = 0
            if ray and not _confirmed_ray(T, ncols, rule):
                continue
            if not ray and _candidates(T[-1, :ncols], rule).size:
                continue
        return (UNBOUNDED if ray else OPTIMAL), it, T
    return ITERATION_LIMIT, max_iter, T


def linprog_dense(
    c: np.ndarray,
    A_ub: np.ndarray | None = None,
    b_ub: np.ndarray | None = None,
    A_eq: np.ndarray | None = None,
    b_eq: np.ndarray | None = None,
    rule: str = "bland",
    max_iter: int = 100_000,
) -> LPResult:
    """Minimize ``c @ x`` over the nonnegative orthant with linear constraints.

    ``rule`` is ``"bland"`` (default) or ``"dantzig"`` (most negative reduced
    cost; no anti-cycling guarantee).
    """
    if rule not in ("bland", "dantzig"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # rows with a negative right-hand side are negated and need an artificial
    flip_ub = b_ub < 0
    needs_art = np.concatenate([flip_ub, np.ones(m_eq, dtype=bool)])
    n_art = int(needs_art.sum())
    ncols = n + m_ub + n_art
    F = np.zeros((m, ncols))
    rhs = np.zeros(m)
    sign_ub = np.where(flip_ub, -1.0, 1.0)
    F[:m_ub, :n] = A_ub * sign_ub[:, None]
    F[np.arange(m_ub), n + np.arange(m_ub)] = sign_ub
    rhs[:m_ub] = b_ub * sign_ub
    sign_eq = np.where(b_eq < 0, -1.0, 1.0)
    F[m_ub:, :n] = A_eq * sign_eq[:, None]
    rhs[m_ub:] = b_eq * sign_eq

    basis = np.empty(m, dtype=int)
    basis[:m_ub] = n + np.arange(m_ub)
    art_rows = np.flatnonzero(needs_art)
    art_cols = n + m_ub + np.arange(n_art)
    F[art_rows, art_cols] = 1.0
    basis[art_rows] = art_cols

    T = np.zeros((m + 1, ncols + 1))
    T[:-1, :-1] = F
    T[:-1, -1] = rhs
    nit = 0
    if n_art:
        cost1 = np.zeros(ncols)
        cost1[art_cols] = 1.0
        T[-1, :-1] = cost1
        T[-1] -= T[art_rows].sum(axis=0)
        status, it, T = _run(T, basis, F, rhs, cost1, ncols, rule, max_iter)
        nit += it
        if status != OPTIMAL:
            # the phase-one objective is bounded below, so a ray here is numerical
            return LPResult(NUMERICAL if status == UNBOUNDED else status, None, np.nan, nit)
        if -T[-1, -1] > FEAS_TOL * max(1.0, np.abs(rhs).max(initial=0.0)):
            return LPResult(INFEASIBLE, None, np.nan, nit)
        # pivot remaining zero-level artificials out, dropping redundant rows
        keep = np.ones(m, dtype=bool)
        for r in np.flatnonzero(basis >= n + m_ub):
            candidates = np.flatnonzero(np.abs(T[r, : n + m_ub]) > PIVOT_TOL)
            if candidates.size:
                _pivot(T, basis, r, int(candidates[0]))
            else:
                keep[r] = False
        F, rhs, basis = F[keep][:, : n + m_ub], rhs[keep], basis[keep]
        T = np.delete(T[np.append(keep, True)], art_cols, axis=1)
        ncols = n + m_ub

    cost = np.zeros(ncols)
    cost[:n] = c
    fresh = _rebuild(F, rhs, cost, basis)
    if fresh is None:
        T[-1, :] = 0.0
        T[-1, :ncols] = cost
        T[-1] -= cost[basis] @ T[:-1]
    else:
        T = fresh
    status, it, T = _run(T, basis, F, rhs, cost, ncols, rule, max_iter - nit)
    nit += it
    if status != OPTIMAL:
        return LPResult(status, None, np.nan, nit)
    x = np.zeros(ncols)
    x[basis] = np.maximum(T[:-1, -1], 0.0)
    return LPResult(OPTIMAL, x[:n], float(c @ x[:n]), nit)
