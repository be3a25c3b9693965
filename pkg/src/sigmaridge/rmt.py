"""Asymptotic prediction risk of group-regularized ridge under a
high-dimensional random-effects model with block-diagonal feature covariance.

With per-group aspect ratios ``gamma_g = p_g/n``, signal strengths
``alpha_g^2``, spectral distributions ``H_g`` and unit noise, the limiting
risk at penalties ``lam`` is

    1 + gamma f + sum_j (gamma/gamma_j) (gamma_j lam_j - alpha_j^2 lam_j^2) df/dlam_j

where ``f >= 0`` is the unique root of

    f = sum_j (gamma_j/gamma) integral (lam_j/t + 1/(1+gamma f))^{-1} dH_j(t).

Everything here works through the substitution ``u = 1/(1+gamma f)``, which
turns the root-finding problem into a strictly increasing scalar equation

    u + sum_j gamma_j integral u/(lam_j/t + u) dH_j(t) = 1

with a unique solution in (0, 1].  Two solvers are provided: the monotone
fixed-point iteration ``u <- G(u)`` and plain bisection; both converge for
every valid spec.  The gradient of ``f`` comes from implicit differentiation
of the ``u`` equation (one scalar division per group, no step sizes).

Noise levels other than 1 are handled by the exact scaling identity
``risk(sigma^2, alpha^2, lam) = sigma^2 * risk(1, alpha^2/sigma^2, lam)``
(the penalties themselves do not rescale).

An infinite ``lam_g`` removes group ``g`` from the regression.  Its summand
in the root equation vanishes, but its lost signal still inflates the risk:
the limit of the derivative term is ``alpha_g^2 * mean(H_g) / (u * kappa)``
with ``kappa`` the implicit-differentiation denominator, and that term is
included exactly (for all groups dropped this reduces to the zero-predictor
risk ``sigma^2 + sum alpha_g^2 mean(H_g)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import NumericError, RegVector, ValidationError

MAX_FIXED_POINT_ITER = 10_000
RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class SpectralDist:
    """Discrete spectral distribution: positive atoms with masses summing to 1."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if atoms.ndim != 1 or atoms.size < 1 or atoms.shape != weights.shape:
            raise ValidationError("atoms and weights must be matching 1-d arrays")
        if not np.isfinite(atoms).all() or (atoms <= 0).any():
            raise ValidationError("spectral atoms must be finite and positive")
        if (weights < 0).any() or abs(weights.sum() - 1.0) > 1e-12:
            raise ValidationError("spectral masses must be nonnegative and sum to 1")
        order = np.argsort(atoms, kind="stable")
        object.__setattr__(self, "atoms", atoms[order])
        object.__setattr__(self, "weights", weights[order])

    @classmethod
    def point_mass(cls, t: float = 1.0) -> "SpectralDist":
        return cls(np.array([float(t)]), np.array([1.0]))

    @classmethod
    def from_quantile_function(cls, quantile_fn, m: int = 2000) -> "SpectralDist":
        """Discretize a named distribution at ``m`` evenly spaced (midpoint)
        quantiles with uniform masses."""
        q = (np.arange(m) + 0.5) / m
        return cls(np.asarray([quantile_fn(x) for x in q], dtype=float),
                   np.full(m, 1.0 / m))

    @classmethod
    def exponential_quantiles(cls, rate: float = 0.5, m: int = 2000) -> "SpectralDist":
        q = (np.arange(m) + 0.5) / m
        return cls(-np.log1p(-q) / rate, np.full(m, 1.0 / m))

    def mean(self) -> float:
        return float(self.atoms @ self.weights)

    def quantiles(self, k: int) -> np.ndarray:
        """``k`` evenly spaced (midpoint) quantiles of this discrete law."""
        cum = np.cumsum(self.weights)
        q = (np.arange(k) + 0.5) / k
        return self.atoms[np.searchsorted(cum, q, side="left").clip(0, self.atoms.size - 1)]

    def is_identity(self) -> bool:
        return self.atoms.size == 1 and self.atoms[0] == 1.0


def same_spectrum(a: SpectralDist, b: SpectralDist, tol: float = 1e-12) -> bool:
    return (a.atoms.shape == b.atoms.shape
            and np.allclose(a.atoms, b.atoms, rtol=0, atol=tol)
            and np.allclose(a.weights, b.weights, rtol=0, atol=tol))


@dataclass(frozen=True)
class RiskSpec:
    """Asymptotic problem description for the risk oracle."""

    gammas: np.ndarray
    alphas_sq: np.ndarray
    spectra: tuple
    noise: float = 1.0

    def __post_init__(self):
        gammas = np.asarray(self.gammas, dtype=float)
        alphas = np.asarray(self.alphas_sq, dtype=float)
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "alphas_sq", alphas)
        object.__setattr__(self, "spectra", tuple(self.spectra))
        k = gammas.size
        if k < 1 or alphas.shape != (k,) or len(self.spectra) != k:
            raise ValidationError("gammas, alphas_sq and spectra must share a length")
        if not np.isfinite(gammas).all() or (gammas <= 0).any():
            raise ValidationError("aspect ratios must be positive and finite")
        if not np.isfinite(alphas).all() or (alphas < 0).any():
            raise ValidationError("signal strengths must be nonnegative")
        if not (np.isfinite(self.noise) and self.noise > 0):
            raise ValidationError("noise variance must be positive")

    @property
    def n_groups(self) -> int:
        return int(self.gammas.size)

    @property
    def gamma_total(self) -> float:
        return float(self.gammas.sum())


@dataclass(frozen=True)
class FixedPointSolution:
    """Root of the risk fixed-point equation and its gradient.

    ``kappa`` is the implicit-differentiation denominator
    ``1 + sum_j gamma_j integral (lam_j/t) (lam_j/t + u)^{-2} dH_j``; it is
    exposed because the infinite-penalty risk terms reuse it.
    """

    f: float
    u: float
    grad_f: np.ndarray
    residual: float
    kappa: float = field(default=1.0)


def _u_equation_terms(spec: RiskSpec, lam: np.ndarray, u: float) -> float:
    """``sum_j gamma_j integral u/(lam_j/t + u) dH_j`` over finite-penalty groups."""
    total = 0.0
    for g in range(spec.n_groups):
        if not math.isfinite(lam[g]):
            continue
        h = spec.spectra[g]
        total += spec.gammas[g] * float(np.sum(h.weights * u / (lam[g] / h.atoms + u)))
    return total


def _polish_u(spec: RiskSpec, lam: np.ndarray, u: float) -> float:
    # a few Newton steps on the increasing scalar equation; the slope is
    # always >= 1, so this only sharpens an already-converged estimate
    for _ in range(3):
        value = u + _u_equation_terms(spec, lam, u) - 1.0
        slope = 1.0
        for g in range(spec.n_groups):
            if not math.isfinite(lam[g]):
                continue
            h = spec.spectra[g]
            ratio = lam[g] / h.atoms
            slope += spec.gammas[g] * float(np.sum(h.weights * ratio / (ratio + u) ** 2))
        step = value / slope
        u = min(max(u - step, 1e-300), 1.0)
        if abs(step) <= 1e-17 * u:
            break
    return u


def _solve_u(spec: RiskSpec, lam: np.ndarray, method: str) -> float:
    def excess(u: float) -> float:
        return u + _u_equation_terms(spec, lam, u) - 1.0

    if method == "bisection":
        lo, hi = 0.0, 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if hi - lo <= 4e-16 * max(mid, 1e-300):
                break
            if excess(mid) < 0.0:
                lo = mid
            else:
                hi = mid
        return _polish_u(spec, lam, 0.5 * (lo + hi))

    # monotone fixed-point iteration on G(u); u0 = 1 >= u*, so iterates
    # decrease to the root
    u = 1.0
    for _ in range(MAX_FIXED_POINT_ITER):
        denom = 1.0
        for g in range(spec.n_groups):
            if not math.isfinite(lam[g]):
                continue
            h = spec.spectra[g]
            denom += spec.gammas[g] * float(np.sum(h.weights / (lam[g] / h.atoms + u)))
        u_next = 1.0 / denom
        if abs(u_next - u) <= 1e-16 * max(u_next, 1e-300):
            return _polish_u(spec, lam, u_next)
        u = u_next
    raise NumericError("fixed-point iteration for u did not converge")


def solve_fixed_point(spec: RiskSpec, reg: RegVector,
                      method: str = "iteration") -> FixedPointSolution:
    """Solve the risk fixed-point equation at the given penalties.

    Parameters
    ----------
    spec : RiskSpec
    reg : RegVector
        Penalties per group; ``inf`` removes the group's summand.
    method : {"iteration", "bisection"}
        Monotone fixed-point iteration (default) or plain bisection on the
        increasing scalar equation; both reach the same root.
    """
    if reg.n_groups != spec.n_groups:
        raise ValidationError("penalty vector length must match the spec")
    if method not in ("iteration", "bisection"):
        raise ValidationError(f"unknown method {method!r}")
    lam = reg.values
    gamma = spec.gamma_total

    u = _solve_u(spec, lam, method)
    f = (1.0 / u - 1.0) / gamma

    kappa = 1.0
    grad = np.zeros(spec.n_groups)
    for g in range(spec.n_groups):
        if not math.isfinite(lam[g]):
            continue
        h = spec.spectra[g]
        ratio = lam[g] / h.atoms
        kappa += spec.gammas[g] * float(np.sum(h.weights * ratio / (ratio + u) ** 2))
    for g in range(spec.n_groups):
        if not math.isfinite(lam[g]):
            continue
        h = spec.spectra[g]
        itilde = float(np.sum(h.weights / (h.atoms * (lam[g] / h.atoms + u) ** 2)))
        grad[g] = -spec.gammas[g] * itilde / (gamma * u * kappa)

    # residual of the f-form of the equation, with u recomputed from f
    u_check = 1.0 / (1.0 + gamma * f)
    p_of_f = _u_equation_terms(spec, lam, u_check) / (gamma * u_check)
    residual = abs(f - p_of_f)
    if residual > 1e-9:
        raise NumericError(f"fixed-point residual {residual:.3e} is too large")
    return FixedPointSolution(f=f, u=u, grad_f=grad, residual=residual, kappa=kappa)


def asymptotic_risk(spec: RiskSpec, reg: RegVector, method: str = "iteration") -> float:
    """Limiting out-of-sample prediction risk at the given penalties.

    General noise is handled by the scaling identity; infinite penalties
    contribute their exact lost-signal limit terms.
    """
    sol = solve_fixed_point(spec, reg, method=method)
    gamma = spec.gamma_total
    alphas = spec.alphas_sq / spec.noise
    lam = reg.values
    risk = 1.0 + gamma * sol.f
    for g in range(spec.n_groups):
        if math.isfinite(lam[g]):
            risk += (gamma / spec.gammas[g]) * (
                spec.gammas[g] * lam[g] - alphas[g] * lam[g] ** 2) * sol.grad_f[g]
        else:
            risk += alphas[g] * spec.spectra[g].mean() / (sol.u * sol.kappa)
    return spec.noise * risk


def optimal_vector_lambda(spec: RiskSpec) -> RegVector:
    """Risk-minimizing penalty vector ``lam_g = gamma_g * sigma^2 / alpha_g^2``
    (``inf`` for zero-signal groups)."""
    lam = np.full(spec.n_groups, np.inf)
    pos = spec.alphas_sq > 0
    lam[pos] = spec.gammas[pos] * spec.noise / spec.alphas_sq[pos]
    return RegVector(lam)


def optimal_single_lambda(spec: RiskSpec) -> float:
    """Risk-minimizing shared penalty ``gamma * sigma^2 / sum(alpha_g^2)``.

    Only valid when every group has the same limiting spectrum.
    """
    first = spec.spectra[0]
    if not all(same_spectrum(first, h) for h in spec.spectra[1:]):
        raise ValidationError("a closed-form shared penalty needs equal spectra")
    total = float(spec.alphas_sq.sum())
    if total <= 0:
        raise ValidationError("all signals are zero; the optimal penalty is "
                              "infinite (zero predictor)")
    return spec.gamma_total * spec.noise / total


def single_lambda_risk_identity(gammas, alphas_sq, lam: float) -> float:
    """Closed-form limiting risk at a shared penalty under identity
    covariance and unit noise."""
    gamma = float(np.sum(gammas))
    total = float(np.sum(alphas_sq))
    u = 0.5 * (1.0 - gamma - lam + math.sqrt((lam + gamma - 1.0) ** 2 + 4.0 * lam))
    return 1.0 / u - (gamma * lam - total * lam**2) / ((lam + u) ** 2 - gamma * u**2)


def _optimal_shared_risk_identity(gamma: float, lam_star: float) -> float:
    return (gamma + lam_star - 1.0
            + math.sqrt((gamma + lam_star - 1.0) ** 2 + 4.0 * lam_star)) / (2.0 * lam_star)


@dataclass(frozen=True)
class TwoAnalystRisks:
    """Optimally tuned risks for the two-analyst comparison: ridge on the
    first feature group alone versus one shared penalty on both groups."""

    risk_first_only: float
    lam_first_only: float
    risk_shared: float
    lam_shared: float


def two_analyst_risks(gamma1: float, gamma2: float,
                      alpha1_sq: float, alpha2_sq: float) -> TwoAnalystRisks:
    """Closed forms under identity covariance and unit noise.

    The first analyst regresses on group 1 only (group 2's signal acts as
    extra noise ``1 + alpha2^2``); the second uses both groups with a single
    shared penalty.
    """
    if alpha1_sq <= 0:
        raise ValidationError("the first group must carry signal (alpha1^2 > 0)")
    gamma = gamma1 + gamma2
    lam1 = gamma1 * (alpha2_sq + 1.0) / alpha1_sq
    risk1 = (alpha2_sq + 1.0) * _optimal_shared_risk_identity(gamma1, lam1)
    lam2 = gamma / (alpha1_sq + alpha2_sq)
    risk2 = _optimal_shared_risk_identity(gamma, lam2)
    return TwoAnalystRisks(risk_first_only=risk1, lam_first_only=lam1,
                           risk_shared=risk2, lam_shared=lam2)
