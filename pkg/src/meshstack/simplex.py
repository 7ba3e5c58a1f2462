"""Self-contained dense two-phase simplex for small covering LPs.

Solves   minimize    c . x
         subject to  A x >= b,   x >= 0
with b >= 0, via surplus + artificial variables and Bland's rule (no cycling).
Problem sizes here are tiny (tens of variables, a few hundred constraints),
so a dense numpy tableau is the simplest reliable choice.
"""

from __future__ import annotations

import numpy as np

from .errors import SolverFailureError

_TOL = 1e-9


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    basis[row] = col


def _iterate(tableau: np.ndarray, basis: np.ndarray, ncols: int) -> None:
    """Run simplex iterations on the tableau (objective in the last row)."""
    max_pivots = 50 * (tableau.shape[0] + ncols)
    for _ in range(max_pivots):
        reduced = tableau[-1, :ncols]
        entering = -1
        for j in range(ncols):  # Bland: first improving column
            if reduced[j] < -_TOL:
                entering = j
                break
        if entering < 0:
            return
        ratios = np.full(tableau.shape[0] - 1, np.inf)
        col = tableau[:-1, entering]
        positive = col > _TOL
        ratios[positive] = tableau[:-1, -1][positive] / col[positive]
        if not positive.any():
            raise SolverFailureError("LP is unbounded")
        rmin = ratios.min()
        leaving = -1
        for i in range(len(ratios)):  # Bland tie-break: smallest basis index
            if ratios[i] <= rmin + _TOL and (leaving < 0 or basis[i] < basis[leaving]):
                leaving = i
        _pivot(tableau, basis, leaving, entering)
    raise SolverFailureError("simplex exceeded its pivot budget")


def solve_cover_lp(c, a_mat, b) -> tuple[np.ndarray, float]:
    """Return (x, objective) minimizing c.x subject to a_mat @ x >= b, x >= 0.

    Raises SolverFailureError if infeasible or unbounded.
    """
    c = np.asarray(c, dtype=float)
    a_mat = np.asarray(a_mat, dtype=float)
    b = np.asarray(b, dtype=float)
    n = c.size
    m = b.size
    if m == 0:
        return np.zeros(n), 0.0
    if np.any(b < 0):
        raise SolverFailureError("right-hand side must be nonnegative")

    # columns: [x (n)] [surplus (m)] [artificial (m)] | rhs
    ncols = n + 2 * m
    tableau = np.zeros((m + 2, ncols + 1))
    tableau[:m, :n] = a_mat
    tableau[:m, n:n + m] = -np.eye(m)
    tableau[:m, n + m:ncols] = np.eye(m)
    tableau[:m, -1] = b
    basis = np.arange(n + m, ncols)

    # phase 1: minimize sum of artificials
    tableau[m + 1, n + m:ncols] = 1.0
    tableau[m + 1] -= tableau[:m].sum(axis=0)  # price out the artificial basis
    phase1 = tableau[[*range(m), m + 1]]
    _iterate(phase1, basis, ncols)
    tableau[[*range(m), m + 1]] = phase1
    if tableau[m + 1, -1] < -1e-7:
        raise SolverFailureError("LP is infeasible")

    # drive any artificial still in the basis out (degenerate rows)
    for i in range(m):
        if basis[i] >= n + m:
            row = tableau[i, :n + m]
            candidates = np.flatnonzero(np.abs(row) > _TOL)
            if candidates.size:
                _pivot(tableau, basis, i, int(candidates[0]))

    # phase 2: original objective, artificials frozen out
    tableau[m, :n] = c
    for i in range(m):
        if basis[i] < n:
            tableau[m] -= tableau[m, basis[i]] * tableau[i]
    tableau[:, n + m:ncols] = 0.0  # forbid artificials from re-entering
    phase2 = tableau[:m + 1]
    _iterate(phase2, basis, n + m)

    x = np.zeros(n)
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = tableau[i, -1]
    return np.maximum(x, 0.0), float(c @ x)
