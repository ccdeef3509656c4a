"""
Phase-1 simplex for small dense feasibility problems.

Finds x ≥ 0 with A_ub·x ≤ b_ub and A_eq·x = b_eq (all right-hand sides ≥ 0)
by minimizing the sum of artificial variables. Bland's rule picks both the
entering and the leaving variable, so the method cannot cycle.
"""
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .session_log import get_session_log

ARTIFICIAL_TOL = 1e-10


@dataclass
class PhaseOneResult:
    feasible: bool
    x: Optional[np.ndarray]
    objective: float
    iterations: int
    status: str


def _pivot(T: np.ndarray, row: int, col: int):
    T[row, :] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r, :] -= T[r, col] * T[row, :]


def _enter(cost_row: np.ndarray, pivot_tol: float) -> int:
    """Bland: the lowest-index column with a negative reduced cost."""
    candidates = np.flatnonzero(cost_row[:-1] < -pivot_tol)
    return int(candidates[0]) if candidates.size else -1


def _leave(T: np.ndarray, col: int, basis: List[int], pivot_tol: float) -> int:
    """Minimum ratio test; ties go to the lowest basic variable index."""
    best_row, best_ratio = -1, np.inf
    for i in range(T.shape[0] - 1):
        a = T[i, col]
        if a > pivot_tol:
            ratio = T[i, -1] / a
            if ratio < best_ratio - 1e-15 or (abs(ratio - best_ratio) <= 1e-15 and basis[i] < basis[best_row]):
                best_row, best_ratio = i, ratio
    return best_row


def phase_one(
    A_ub: np.ndarray,
    b_ub: np.ndarray,
    A_eq: np.ndarray,
    b_eq: np.ndarray,
    pivot_tol: float = 1e-11,
    max_iterations: Optional[int] = None,
) -> PhaseOneResult:
    """
    Phase-1 simplex on the tableau [A_ub I 0 | b_ub; A_eq 0 I | b_eq].

    Slack variables start basic for the inequality rows and artificial
    variables for the equality rows. The problem is feasible when the
    artificial sum reaches zero (within 1e-10).

    Args:
        A_ub: Inequality matrix, shape (p, n).
        b_ub: Inequality bounds, shape (p,), nonnegative.
        A_eq: Equality matrix, shape (q, n).
        b_eq: Equality right-hand side, shape (q,), nonnegative.
        pivot_tol: Smallest pivot / reduced cost treated as nonzero.
        max_iterations: Pivot limit; 50·(rows + columns) by default.

    Returns:
        PhaseOneResult with x (the original n variables) when feasible.

    Raises:
        ValueError: If a right-hand side is negative or shapes disagree.
    """
    A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
    A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_ub = np.asarray(b_ub, dtype=float).reshape(-1)
    b_eq = np.asarray(b_eq, dtype=float).reshape(-1)
    n = A_eq.shape[1]
    p, q = A_ub.shape[0], A_eq.shape[0]
    if A_ub.size and A_ub.shape[1] != n:
        raise ValueError("A_ub and A_eq must have the same number of columns")
    if np.any(b_ub < 0) or np.any(b_eq < 0):
        raise ValueError("Right-hand sides must be nonnegative")
    if A_ub.size == 0:
        p = 0
        A_ub = np.zeros((0, n))

    cols = n + p + q
    T = np.zeros((p + q + 1, cols + 1))
    T[:p, :n] = A_ub
    T[:p, n:n + p] = np.eye(p)
    T[:p, -1] = b_ub
    T[p:p + q, :n] = A_eq
    T[p:p + q, n + p:n + p + q] = np.eye(q)
    T[p:p + q, -1] = b_eq
    basis = list(range(n, n + p + q))

    # Reduced costs of "minimize Σ artificials" with the artificials basic
    T[-1, n + p:n + p + q] = 1.0
    T[-1, :] -= T[p:p + q, :].sum(axis=0)

    limit = max_iterations or 50 * (T.shape[0] + cols)
    status = "optimal"
    iterations = 0
    while True:
        col = _enter(T[-1, :], pivot_tol)
        if col == -1:
            break
        row = _leave(T, col, basis, pivot_tol)
        if row == -1:
            status = "unbounded"
            break
        _pivot(T, row, col)
        basis[row] = col
        iterations += 1
        if iterations >= limit:
            status = "iteration_limit"
            get_session_log().warning(f"Phase-1 simplex stopped after {iterations} pivots")
            break

    values = np.zeros(cols)
    for r, var in enumerate(basis):
        values[var] = T[r, -1]
    artificial_sum = float(values[n + p:].sum())
    feasible = status == "optimal" and artificial_sum <= ARTIFICIAL_TOL
    x = np.clip(values[:n], 0.0, None) if feasible else None
    return PhaseOneResult(feasible=feasible, x=x, objective=artificial_sum, iterations=iterations, status=status)
