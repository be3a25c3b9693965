"""Group-regularized ridge regression.

The estimator solves

    min_w  (1/2n) ||Y - X w||^2  +  (1/2) sum_g lambda_g ||w_g||^2,

whose normal equations are ``(X'X/n + diag(lam)) w = X'Y/n``.  All leverage
and cross-validation quantities use the smoother consistent with this
objective, ``H = X (X'X + n diag(lam))^{-1} X'``, so that the fitted values
are exactly ``X w``.

Two factorizations are used depending on shape: a Cholesky factorization of
the p' x p' penalized gram when ``p' <= 4n`` (p' counts the columns whose
group penalty is finite), and otherwise the Woodbury identity through the
n x n matrix ``I + X diag(1/lam) X'/n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .core import (GroupedDesign, NumericError, RegVector, ValidationError,
                   expand_diagonal)

CHOLESKY_ASPECT_LIMIT = 4  # Cholesky when p' <= 4 n, Woodbury otherwise
LEVERAGE_TOL = 1e-12


class FlatResponseError(ValidationError):
    """``X'Y = 0``: there is no signal to set a penalty scale from."""


class DegenerateLeverageError(NumericError):
    """Some leverage is within 1e-12 of 1; the leave-one-out shortcut blows up."""


@dataclass(frozen=True)
class RidgeFit:
    """A fitted group-ridge model.

    Attributes
    ----------
    reg : RegVector
        Per-group penalties used for the fit.
    coefficients : np.ndarray
        Length-``p`` coefficient vector; exactly zero on dropped groups.
    fitted : np.ndarray
        In-sample predictions ``X w``.
    hat_diag : np.ndarray
        Diagonal of the smoother ``H``.
    cv_star : float
        Shortcut leave-one-out error at this penalty.
    """

    reg: RegVector
    coefficients: np.ndarray
    fitted: np.ndarray
    hat_diag: np.ndarray
    cv_star: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coefficients


def _loo_shortcut(y: np.ndarray, fitted: np.ndarray, hat_diag: np.ndarray) -> float:
    if (hat_diag >= 1.0 - LEVERAGE_TOL).any():
        raise DegenerateLeverageError(
            "a leverage H_ii is numerically 1; leave-one-out error is undefined")
    r = (y - fitted) / (1.0 - hat_diag)
    return float(r @ r) / y.size


def cv_star(fit: RidgeFit, design: GroupedDesign) -> float:
    """Shortcut leave-one-out error ``mean(((Y - Yhat)/(1 - H_ii))^2)``.

    Equals the explicit leave-one-out error when every held-out refit keeps
    the penalty matrix fixed.
    """
    return _loo_shortcut(design.Y, fit.fitted, fit.hat_diag)


def _solve_cholesky(X, y, lam_col, gram=None):
    n = X.shape[0]
    S = gram if gram is not None else (X.T @ X) / n
    C = S + np.diag(lam_col)
    try:
        L, low = sla.cho_factor(C, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise NumericError(f"penalized gram is not positive definite: {exc}") from exc
    w = sla.cho_solve((L, low), X.T @ y / n, check_finite=False)
    # leverage: H_ii = ||L^{-1} x_i||^2 / n
    V = sla.solve_triangular(L, X.T, lower=True, check_finite=False)
    hat = np.einsum("ij,ij->j", V, V) / n
    return w, hat


def _solve_woodbury(X, y, lam_col):
    n = X.shape[0]
    Xs = X / lam_col  # X diag(1/lam)
    G = (Xs @ X.T) / n
    F = G + np.eye(n)
    try:
        L, low = sla.cho_factor(F, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise NumericError(f"Woodbury system is not positive definite: {exc}") from exc
    t = sla.cho_solve((L, low), y, check_finite=False)
    w = Xs.T @ t / n
    hat = np.diag(sla.cho_solve((L, low), G, check_finite=False)).copy()
    np.clip(hat, 0.0, None, out=hat)  # PSD up to roundoff
    return w, hat


def fit_group_ridge(design: GroupedDesign, reg: RegVector, solver: str = "auto",
                    gram: np.ndarray | None = None) -> RidgeFit:
    """Solve the group-ridge problem at a fixed penalty vector.

    Parameters
    ----------
    design : GroupedDesign
    reg : RegVector
        Finite entries must be positive; ``inf`` entries zero out their group.
    solver : {"auto", "cholesky", "woodbury"}
        "auto" picks Cholesky when the active column count is at most 4n.
    gram : np.ndarray, optional
        Precomputed ``X'X/n`` (full p x p), reused across penalty vectors.
    """
    if solver not in ("auto", "cholesky", "woodbury"):
        raise ValidationError(f"unknown solver {solver!r}")
    lam_col = expand_diagonal(reg, design.layout)
    active = np.isfinite(lam_col)
    X, y = design.X, design.Y
    n, p = design.n, design.p

    w = np.zeros(p)
    if not active.any():
        fitted = np.zeros(n)
        hat = np.zeros(n)
        return RidgeFit(reg=reg, coefficients=w, fitted=fitted, hat_diag=hat,
                        cv_star=_loo_shortcut(y, fitted, hat))

    Xa = X if active.all() else X[:, active]
    la = lam_col[active]
    p_active = Xa.shape[1]
    if solver == "auto":
        solver = "cholesky" if p_active <= CHOLESKY_ASPECT_LIMIT * n else "woodbury"

    if solver == "cholesky":
        sub = None
        if gram is not None:
            sub = gram if active.all() else gram[np.ix_(active, active)]
        wa, hat = _solve_cholesky(Xa, y, la, gram=sub)
    else:
        wa, hat = _solve_woodbury(Xa, y, la)

    w[active] = wa
    fitted = Xa @ wa
    return RidgeFit(reg=reg, coefficients=w, fitted=fitted, hat_diag=hat,
                    cv_star=_loo_shortcut(y, fitted, hat))


class DesignSpectrum:
    """Spectral cache for one design: everything needed to sweep a *uniform*
    penalty (coefficients, fitted values, leverages, CV) at O(n+p) per value.

    Uses an eigendecomposition of the smaller gram matrix, so the setup cost
    is one symmetric eigensolve plus one matrix product.
    """

    def __init__(self, design: GroupedDesign):
        X, y = design.X, design.Y
        n, p = X.shape
        self.n, self.p = n, p
        if p <= n:
            S = (X.T @ X) / n
            ev, V = sla.eigh(S, driver="evd", check_finite=False)
            ev = np.clip(ev, 0.0, None)
            W = X @ V
        else:
            T = (X @ X.T) / n
            ev, U = sla.eigh(T, driver="evd", check_finite=False)
            keep = ev > max(ev.max(), 0.0) * 1e-13
            ev = ev[keep]
            U = U[:, keep]
            d = np.sqrt(ev)
            V = (X.T @ U) / (math.sqrt(n) * d)
            W = math.sqrt(n) * U * d
        self.eigenvalues = ev
        self.V = V
        self.W = W
        self._Wsq = W * W
        self.c = V.T @ (X.T @ y) / n
        self.xty = X.T @ y / n
        self._y = y

    def coefficients(self, lam: float) -> np.ndarray:
        return self.V @ (self.c / (self.eigenvalues + lam))

    def fitted(self, lam: float) -> np.ndarray:
        return self.W @ (self.c / (self.eigenvalues + lam))

    def hat_diag(self, lam: float) -> np.ndarray:
        return (self._Wsq @ (1.0 / (self.eigenvalues + lam))) / self.n

    def cv(self, lam: float) -> float:
        return _loo_shortcut(self._y, self.fitted(lam), self.hat_diag(lam))


def lambda_grid_max(design: GroupedDesign) -> float:
    """Default grid ceiling ``1e3 * ||X'Y/n||_inf``."""
    return 1e3 * float(np.abs(design.X.T @ design.Y).max()) / design.n


def tune_single_lambda(design: GroupedDesign, n_grid: int = 100,
                       lambda_max: float | None = None,
                       spectrum: DesignSpectrum | None = None,
                       ) -> tuple[float, np.ndarray]:
    """Tune one shared ridge penalty by the leave-one-out shortcut.

    Evaluates CV* on a logarithmically equidistant grid of ``n_grid`` points
    from ``1e-6 * lambda_max`` to ``lambda_max`` and returns the minimizer
    (ties broken toward the larger, more conservative penalty) together with
    the full ``(lambda, cv)`` curve.
    """
    if lambda_max is None:
        lambda_max = lambda_grid_max(design)
    if lambda_max <= 0:
        raise FlatResponseError(
            "X'Y = 0 (flat response); no penalty scale can be derived")
    if spectrum is None:
        spectrum = DesignSpectrum(design)
    grid = np.logspace(math.log10(lambda_max) - 6.0, math.log10(lambda_max), n_grid)
    cv = np.array([spectrum.cv(lam) for lam in grid])
    best = int(np.flatnonzero(cv == cv.min())[-1])
    curve = np.column_stack([grid, cv])
    return float(grid[best]), curve
