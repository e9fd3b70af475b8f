"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves

    maximize    c @ x
    subject to  A_ub @ x <= b_ub,  A_eq @ x == b_eq,  x >= 0

Bland's rule (lowest-index entering column, lowest-index leaving basic
variable on ratio ties) is slow on big degenerate problems but never
cycles, and the pivot sequence is fully deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LPError

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    objective: float
    iterations: int


class _Tableau:
    def __init__(self, T: np.ndarray, basis: list[int]):
        self.T = T
        self.basis = basis
        self.iterations = 0

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] /= T[row, col]
        col_vals = T[:, col].copy()
        col_vals[row] = 0.0
        T -= np.outer(col_vals, T[row])
        T[:, col] = 0.0
        T[row, col] = 1.0
        self.basis[row] = col
        self.iterations += 1

    def run(self, n_cols: int, max_iter: int) -> None:
        """Pivot until no reduced cost in the first ``n_cols`` columns is negative."""
        T = self.T
        m = T.shape[0] - 1
        while True:
            if self.iterations >= max_iter:
                raise LPError(f"simplex exceeded {max_iter} pivots")
            costs = T[-1, :n_cols]
            candidates = np.flatnonzero(costs < -PIVOT_TOL)
            if candidates.size == 0:
                return
            col = int(candidates[0])
            column = T[:m, col]
            rows = np.flatnonzero(column > PIVOT_TOL)
            if rows.size == 0:
                raise LPError("linear program is unbounded")
            ratios = T[rows, -1] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
            row = int(min(ties, key=lambda r: self.basis[r]))
            self.pivot(row, col)


def linprog_max(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    max_iter: int = 100_000,
) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # columns: originals | slacks (one per <= row) | artificials
    flip_ub = b_ub < 0
    flip_eq = b_eq < 0
    needs_art = np.concatenate([flip_ub, np.ones(m_eq, dtype=bool)])
    n_art = int(np.count_nonzero(needs_art))
    n_tot = n + m_ub + n_art
    T = np.zeros((m + 1, n_tot + 1))
    T[:m_ub, :n] = np.where(flip_ub[:, None], -A_ub, A_ub)
    T[:m_ub, n : n + m_ub] = np.diag(np.where(flip_ub, -1.0, 1.0))
    T[:m_ub, -1] = np.abs(b_ub)
    T[m_ub:m, :n] = np.where(flip_eq[:, None], -A_eq, A_eq)
    T[m_ub:m, -1] = np.abs(b_eq)
    basis = []
    art = n + m_ub
    for i in range(m):
        if needs_art[i]:
            T[i, art] = 1.0
            basis.append(art)
            art += 1
        else:
            basis.append(n + i)

    tab = _Tableau(T, basis)
    if n_art:
        # phase 1: maximize -(sum of artificials)
        T[-1, n + m_ub : n_tot] = 1.0
        for i in range(m):
            if needs_art[i]:
                T[-1] -= T[i]
        tab.run(n_tot, max_iter)
        if -T[-1, -1] > FEAS_TOL:
            raise LPError(f"linear program is infeasible (phase-1 residual {-T[-1, -1]:.3g})")
        # drive zero-valued artificials out of the basis, drop redundant rows
        keep = []
        for i in range(m):
            if tab.basis[i] >= n + m_ub:
                nz = np.flatnonzero(np.abs(T[i, : n + m_ub]) > PIVOT_TOL)
                if nz.size == 0:
                    continue
                tab.pivot(i, int(nz[0]))
            keep.append(i)
        T = np.vstack([T[keep], T[-1:]])
        T = np.delete(T, np.s_[n + m_ub : n_tot], axis=1)
        tab.T = T
        tab.basis = [tab.basis[i] for i in keep]
        m = len(keep)

    T = tab.T
    T[-1] = 0.0
    T[-1, :n] = -c
    for i, b in enumerate(tab.basis):
        if T[-1, b] != 0.0:
            T[-1] -= T[-1, b] * T[i]
    tab.run(n + m_ub, max_iter)

    x = np.zeros(n + m_ub)
    for i, b in enumerate(tab.basis):
        x[b] = T[i, -1]
    x = x[:n]
    return LPResult(x=x, objective=float(c @ x), iterations=tab.iterations)
