"""The map from a single tuning scalar ``sigma`` to a full penalty vector.

A pilot ridge fit at one shared penalty ``lambda_init`` yields group-wise
moment statistics: writing ``M = (X'X/n + lambda_init I)^{-1} X'X/n`` and
``N = (X'X/n + lambda_init I)^{-1} X' / sqrt(n)``,

    A[g, h] = ||M[G_g, G_h]||_F^2 / n
    u[g]    = ||w_pilot[G_g]||_2^2
    v[g]    = ||N[G_g, :]||_F^2 / n.

For a candidate noise level ``sigma`` the reciprocal penalties solve the
nonnegative least squares problem ``min ||A d - (u/sigma^2 - v)||`` over
``d >= 0`` and ``lambda_g(sigma) = 1/d_g`` (``inf`` where ``d_g = 0``, which
excludes the group).  The scalar ``sigma`` is then chosen by the accelerated
leave-one-out error: the map ``sigma -> lambda(sigma)`` is built once on the
full data and held fixed across folds, so CV* reduces to the hat-matrix
shortcut.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .core import GroupedDesign, NumericError, RegVector, ValidationError
from .nnls import solve_nnls
from .ridge import DesignSpectrum, RidgeFit, fit_group_ridge, tune_single_lambda

D_ZERO_THRESHOLD = 1e-12  # reciprocal penalties below this count as dropped


class DegeneratePilotError(NumericError):
    """The pilot fit carries no usable signal (some ``v_g = 0`` or all
    pilot group norms vanish)."""


@dataclass(frozen=True)
class MomentSystem:
    """Group-wise moment statistics of the pilot ridge fit."""

    A: np.ndarray
    u_hat: np.ndarray
    v: np.ndarray
    lambda_init: float
    n: int
    sizes: np.ndarray

    @property
    def n_groups(self) -> int:
        return int(self.u_hat.size)


@dataclass(frozen=True)
class SigmaPathPoint:
    """One point of the regularization path ``sigma -> lambda(sigma)``."""

    sigma: float
    reg: RegVector
    active_set: np.ndarray
    cv_star: float | None = None


def build_moment_system(design: GroupedDesign, lambda_init: float,
                        spectrum: DesignSpectrum | None = None) -> MomentSystem:
    """Compute ``A``, ``u`` and ``v`` from the pilot fit at ``lambda_init``.

    Works from one eigendecomposition of the gram matrix; the matrices
    ``M`` and ``N`` are never materialized (block Frobenius norms come from
    group-restricted products of the scaled eigenvector rows).
    """
    if not (np.isfinite(lambda_init) and lambda_init > 0):
        raise ValidationError("lambda_init must be a positive finite scalar")
    if spectrum is None:
        spectrum = DesignSpectrum(design)
    layout = design.layout
    n, K = design.n, layout.n_groups
    ev, V = spectrum.eigenvalues, spectrum.V

    w_pilot = spectrum.coefficients(lambda_init)
    u_hat = np.bincount(layout.membership, weights=w_pilot * w_pilot, minlength=K)

    # v_g: row sums of N N' restricted to the group; N N' has eigenvalues
    # ev/(ev + lam)^2 on the right-singular basis.
    nn = ev / (ev + lambda_init) ** 2
    row_nn = (V * V) @ nn
    v = np.bincount(layout.membership, weights=row_nn, minlength=K) / n

    # A[g, h] = ||M_block||_F^2 / n with M = V diag(m) V'; one block per
    # unordered pair, mirrored (M is symmetric).
    m = ev / (ev + lambda_init)
    Vm = V * m
    rows = [layout.indices(g) for g in range(K)]
    A = np.empty((K, K))
    for g in range(K):
        for h in range(g, K):
            block = Vm[rows[g]] @ V[rows[h]].T
            A[g, h] = A[h, g] = float(np.sum(block * block)) / n
    return MomentSystem(A=A, u_hat=u_hat, v=v, lambda_init=float(lambda_init),
                        n=n, sizes=layout.sizes.copy())


def sigma_max(ms: MomentSystem) -> float:
    """Smallest ``sigma`` at which every penalty is infinite (zero fit)."""
    if (ms.v <= 0).any():
        raise DegeneratePilotError(
            "some v_g = 0 in the pilot moment system; sigma_max is undefined")
    if (ms.u_hat <= 0).all():
        raise DegeneratePilotError("the pilot fit is identically zero")
    return math.sqrt(float(np.max(ms.u_hat / ms.v)))


def lambda_of_sigma(ms: MomentSystem, sigma: float) -> SigmaPathPoint:
    """Evaluate the penalty map at one ``sigma``.

    Groups whose pilot norm is exactly zero are excluded up front (their
    moment equation carries no information); a rank-deficient ``A`` is
    reported with a warning and the minimum-norm NNLS point is used.
    """
    if not (np.isfinite(sigma) and sigma > 0):
        raise ValidationError("sigma must be a positive finite scalar")
    K = ms.n_groups
    b = ms.u_hat / sigma**2 - ms.v
    usable = ms.u_hat > 0
    if not usable.all():
        warnings.warn("pilot norm is zero for some group(s); their penalty "
                      "is set to inf", RuntimeWarning)
    d = np.zeros(K)
    if usable.any():
        sol = solve_nnls(ms.A[:, usable], b)
        if sol.rank_deficient:
            warnings.warn("moment matrix A is rank deficient; using the "
                          "minimum-norm NNLS point", RuntimeWarning)
        d[usable] = sol.d
    d[d < D_ZERO_THRESHOLD] = 0.0
    lam = np.full(K, np.inf)
    pos = d > 0
    lam[pos] = 1.0 / d[pos]
    return SigmaPathPoint(sigma=float(sigma), reg=RegVector(lam),
                          active_set=np.flatnonzero(pos))


@dataclass(frozen=True)
class SigmaRidgeFit:
    """Result of the full pipeline: tuned ``sigma``, final fit and path."""

    best: SigmaPathPoint
    fit: RidgeFit
    path: tuple
    moment_system: MomentSystem
    lambda_init: float
    sigma_grid: np.ndarray


def fit_sigma_ridge(design: GroupedDesign, n_grid: int = 100,
                    grid_lo_frac: float = 1e-3,
                    lambda_init: float | None = None,
                    solver: str = "auto") -> SigmaRidgeFit:
    """Fit the full estimator: pilot tune, build the moment system, sweep an
    equidistant ``sigma`` grid on ``[grid_lo_frac * sigma_max, sigma_max]``
    and keep the CV*-minimizing point (ties toward larger ``sigma``).

    ``lambda_init`` defaults to the tuned single-penalty value; any positive
    override is accepted.
    """
    if design.n < 3:
        raise ValidationError("sigma-ridge needs at least three observations")
    spectrum = DesignSpectrum(design)
    if lambda_init is None:
        lambda_init, _ = tune_single_lambda(design, spectrum=spectrum)
    ms = build_moment_system(design, lambda_init, spectrum=spectrum)
    smax = sigma_max(ms)
    grid = np.linspace(grid_lo_frac * smax, smax, n_grid)

    gram = None
    if solver == "cholesky" or (solver == "auto" and design.p <= 4 * design.n):
        gram = (design.X.T @ design.X) / design.n

    path = []
    fits = []
    for sigma in grid:
        point = lambda_of_sigma(ms, sigma)
        fit = fit_group_ridge(design, point.reg, solver=solver, gram=gram)
        path.append(replace(point, cv_star=fit.cv_star))
        fits.append(fit)

    cv = np.array([pt.cv_star for pt in path])
    best_idx = int(np.flatnonzero(cv == cv.min())[-1])
    best = path[best_idx]
    if best.active_set.size == 0:
        warnings.warn("the selected sigma drops every group: the fitted model "
                      "is the zero predictor", RuntimeWarning)
    return SigmaRidgeFit(best=best, fit=fits[best_idx], path=tuple(path),
                         moment_system=ms, lambda_init=float(lambda_init),
                         sigma_grid=grid)


def path_table(result: SigmaRidgeFit, labels) -> tuple[list[str], list[list[str]]]:
    """Flatten a fitted path into CSV-ready header and string rows.

    Infinite penalties serialize as the literal ``inf``; the active set is a
    semicolon-joined list of group labels.
    """
    labels = list(labels)
    header = ["sigma"] + [f"lambda_{lbl}" for lbl in labels] + ["cv_star", "active_set"]
    rows = []
    for pt in result.path:
        lam = ["inf" if not np.isfinite(v) else repr(float(v)) for v in pt.reg.values]
        act = ";".join(labels[g] for g in pt.active_set)
        rows.append([repr(float(pt.sigma))] + lam + [repr(float(pt.cv_star)), act])
    return header, rows
