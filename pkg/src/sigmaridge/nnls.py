"""Nonnegative least squares by the Lawson-Hanson active-set method.

The systems solved here are tiny (one row/column per feature group), so an
exact active-set method is the right tool: it terminates finitely and the
passive-set subproblems are solved by ``lstsq``, which returns the
minimum-norm solution and therefore behaves sensibly on rank-deficient
inputs (the solver flags those via ``rank_deficient``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NumericError, ValidationError


@dataclass(frozen=True)
class NnlsSolution:
    """Solution of ``min ||A d - b||_2`` over ``d >= 0``.

    ``active_set`` holds the indices with ``d > 0``.  ``rank_deficient`` is
    set when ``A`` does not have full rank; the returned point is then still
    a KKT point (every passive-set subproblem is solved minimum-norm) but
    the optimum is no longer unique.
    """

    d: np.ndarray
    residual_norm: float
    active_set: np.ndarray
    rank_deficient: bool = False


def solve_nnls(A: np.ndarray, b: np.ndarray, max_cycles: int | None = None) -> NnlsSolution:
    """Minimize ``||A d - b||_2`` subject to ``d >= 0``.

    Parameters
    ----------
    A : array, shape (m, k)
    b : array, shape (m,)
    max_cycles : int, optional
        Cap on passive-set insertions, default ``10 * k``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValidationError("A must be a non-empty 2-d array")
    if b.shape != (A.shape[0],):
        raise ValidationError("b must have one entry per row of A")
    if not (np.isfinite(A).all() and np.isfinite(b).all()):
        raise ValidationError("NNLS inputs must be finite")

    k = A.shape[1]
    if max_cycles is None:
        max_cycles = 10 * k
    d = np.zeros(k)
    passive = np.zeros(k, dtype=bool)
    rank_deficient = np.linalg.matrix_rank(A) < min(A.shape)

    grad0 = A.T @ b
    tol = 1e-11 * max(1.0, float(np.abs(grad0).max()))

    cycles = 0
    while True:
        w = A.T @ (b - A @ d)
        w_free = np.where(passive, -np.inf, w)
        j = int(np.argmax(w_free))
        if w_free[j] <= tol:
            break
        cycles += 1
        if cycles > max_cycles:
            raise NumericError(
                f"NNLS did not converge within {max_cycles} active-set cycles")
        passive[j] = True

        while True:
            cols = np.flatnonzero(passive)
            sol, _, rank, _ = np.linalg.lstsq(A[:, cols], b, rcond=None)
            if rank < cols.size:
                rank_deficient = True
            s = np.zeros(k)
            s[cols] = sol
            if (s[cols] > 0).all():
                d = s
                break
            # step toward s until the first passive coordinate hits zero
            blocking = passive & (s <= 0)
            ratios = d[blocking] / (d[blocking] - s[blocking])
            alpha = float(ratios.min())
            d = d + alpha * (s - d)
            drop = passive & (d <= 1e-14 * max(1.0, float(np.abs(d).max())))
            d[drop] = 0.0
            passive &= ~drop
            if not passive.any():
                d = np.zeros(k)
                break

    d[~passive] = 0.0
    residual = float(np.linalg.norm(A @ d - b))
    return NnlsSolution(d=d, residual_norm=residual,
                        active_set=np.flatnonzero(d > 0),
                        rank_deficient=rank_deficient)
