"""Small dense linear-programming routine (two-phase tableau simplex).

Solves ``min c @ x`` subject to ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq`` and
``x >= 0``. Problems handled here have at most a few thousand variables, so a
dense tableau is adequate. Dantzig pricing is used, with Bland's rule after a
run of degenerate pivots to rule out cycling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL, INFEASIBLE, UNBOUNDED, ITERATION_LIMIT = 0, 2, 3, 1

_PIV = 1e-11
_FEAS = 1e-9


@dataclass
class LPResult:
    x: np.ndarray
    fun: float
    status: int
    nit: int

    @property
    def success(self) -> bool:
        return self.status == OPTIMAL


def _pivot(T, basis, r, j):
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    basis[r] = j


def _run(T, basis, n_cols, max_iter, nit):
    """Simplex iterations on tableau ``T`` (last row = reduced costs, last column = rhs)."""
    degenerate_run = 0
    while nit < max_iter:
        red = T[-1, :n_cols]
        if degenerate_run > 50:
            cand = np.flatnonzero(red < -_PIV)
            if cand.size == 0:
                return OPTIMAL, nit
            j = int(cand[0])
        else:
            j = int(np.argmin(red))
            if red[j] >= -_PIV:
                return OPTIMAL, nit
        col = T[:-1, j]
        pos = col > _PIV
        if not pos.any():
            return UNBOUNDED, nit
        ratios = np.full(col.shape, np.inf)
        ratios[pos] = T[:-1, -1][pos] / col[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-13)
        r = int(ties[np.argmin(basis[ties])]) if ties.size > 1 else int(ties[0])
        degenerate_run = degenerate_run + 1 if best <= 1e-13 else 0
        _pivot(T, basis, r, j)
        nit += 1
    return ITERATION_LIMIT, nit


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter: int = 50_000) -> LPResult:
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # standard form: [A_ub I; A_eq 0] [x; s] = b
    n_std = n + m_ub
    A = np.zeros((m, n_std))
    A[:m_ub, :n] = A_ub
    A[:m_ub, n:] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    basis = np.full(m, -1, dtype=int)
    for i in range(m_ub):
        if not neg[i]:
            basis[i] = n + i
    need_art = np.flatnonzero(basis < 0)
    n_art = need_art.size
    n_cols = n_std + n_art
    T = np.zeros((m + 1, n_cols + 1))
    T[:m, :n_std] = A
    T[:m, -1] = b
    for k, i in enumerate(need_art):
        T[i, n_std + k] = 1.0
        basis[i] = n_std + k

    nit = 0
    if n_art:
        # phase 1: minimise the sum of artificials
        T[-1, n_std:n_cols] = 1.0
        for i in need_art:
            T[-1] -= T[i]
        status, nit = _run(T, basis, n_cols, max_iter, nit)
        if status == ITERATION_LIMIT:
            return LPResult(np.full(n, np.nan), np.nan, status, nit)
        if -T[-1, -1] > _FEAS * max(1.0, np.abs(b).max()):
            return LPResult(np.full(n, np.nan), np.nan, INFEASIBLE, nit)
        # drive remaining artificials out of the basis; drop redundant rows
        keep = np.ones(m + 1, dtype=bool)
        for r in range(m):
            if basis[r] >= n_std:
                row = T[r, :n_std]
                j = np.flatnonzero(np.abs(row) > 1e-9)
                if j.size:
                    _pivot(T, basis, r, int(j[np.argmax(np.abs(row[j]))]))
                else:
                    keep[r] = False
        T = np.delete(T[keep], np.s_[n_std:n_cols], axis=1)
        basis = basis[keep[:-1]]

    # phase 2
    T[-1, :] = 0.0
    T[-1, :n] = c
    for r, j in enumerate(basis):
        if T[-1, j] != 0.0:
            T[-1] -= T[-1, j] * T[r]
    status, nit = _run(T, basis, n_std, max_iter, nit)
    x_std = np.zeros(n_std)
    x_std[basis] = T[:-1, -1]
    x = np.clip(x_std[:n], 0.0, None)
    if status != OPTIMAL:
        return LPResult(x, np.nan, status, nit)
    return LPResult(x, float(c @ x), OPTIMAL, nit)


def transport_vertex(cost: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vertex of the transportation polytope {S >= 0 : S 1 = a, S^T 1 = b} minimising <cost, S>."""
    r, k = cost.shape
    if r == 1 or k == 1:
        return np.outer(a, b) / max(a.sum(), 1e-300) if r == 1 else np.outer(a, b) / max(b.sum(), 1e-300)
    A_eq = np.zeros((r + k - 1, r * k))
    for i in range(r):
        A_eq[i, i * k:(i + 1) * k] = 1.0
    # the last column-sum constraint is implied by the others
    for j in range(k - 1):
        A_eq[r + j, j::k] = 1.0
    b_eq = np.concatenate([a, b[:-1]])
    res = linprog(cost.ravel(), A_eq=A_eq, b_eq=b_eq)
    if not res.success:
        raise RuntimeError(f"transport LP failed with status {res.status}")
    S = res.x.reshape(r, k)
    # clean round-off so marginals hold to machine precision
    S[S < 1e-15] = 0.0
    return S
