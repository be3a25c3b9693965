"""Data model shared by every estimator: grouped designs, per-group penalty
vectors, and standardization.

A design is an ``(X, Y)`` pair together with a :class:`GroupLayout` that
partitions the columns of ``X`` into disjoint feature groups.  Penalties are
held in a :class:`RegVector`, one value per group, where ``inf`` means the
group is excluded from the fit (its coefficients are exactly zero).  All
containers are frozen dataclasses and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np


class SigmaRidgeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SigmaRidgeError):
    """Invalid user input (bad shapes, non-finite values, schema problems)."""


class NumericError(SigmaRidgeError):
    """A numerical routine failed (singular system, no convergence)."""


class ConstantColumnError(ValidationError):
    """A column (or the response) has zero sample variance."""


@dataclass(frozen=True)
class GroupLayout:
    """Partition of columns ``0..p-1`` into ``n_groups`` disjoint groups.

    Attributes
    ----------
    n_groups : int
        Number of groups (``K``).
    membership : np.ndarray
        Length-``p`` integer array mapping column index to group index.
    sizes : np.ndarray
        Length-``K`` array of group sizes ``p_g``.
    labels : tuple of str
        Group names, in group order.
    """

    n_groups: int
    membership: np.ndarray
    sizes: np.ndarray
    labels: tuple

    def __post_init__(self):
        membership = np.asarray(self.membership, dtype=np.intp)
        sizes = np.asarray(self.sizes, dtype=np.intp)
        object.__setattr__(self, "membership", membership)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "labels", tuple(str(l) for l in self.labels))
        if self.n_groups < 1:
            raise ValidationError("a layout needs at least one group")
        if len(self.labels) != self.n_groups or sizes.shape != (self.n_groups,):
            raise ValidationError("labels/sizes length must equal the group count")
        if membership.ndim != 1 or membership.size < 1:
            raise ValidationError("membership must be a non-empty 1-d map")
        if membership.min() < 0 or membership.max() >= self.n_groups:
            raise ValidationError("membership refers to a group outside 0..K-1")
        counts = np.bincount(membership, minlength=self.n_groups)
        if not np.array_equal(counts, sizes):
            raise ValidationError("group sizes do not match the membership counts")
        if (sizes < 1).any():
            empty = self.labels[int(np.argmin(sizes))]
            raise ValidationError(f"group {empty!r} has no columns")

    @property
    def n_features(self) -> int:
        return int(self.membership.size)

    def indices(self, g: int) -> np.ndarray:
        """Column indices belonging to group ``g``."""
        return np.flatnonzero(self.membership == g)


def build_layout(membership: Sequence | Mapping[int, object],
                 labels: Sequence[str] | None = None) -> GroupLayout:
    """Build a :class:`GroupLayout` from a column -> group-id map.

    ``membership`` is either a length-``p`` sequence of group ids or a dict
    keyed by column index ``0..p-1``.  Groups are ordered by first appearance
    unless an explicit ``labels`` order is given; every explicit label must
    occur in the map.
    """
    if isinstance(membership, Mapping):
        keys = sorted(membership)
        if keys != list(range(len(keys))):
            raise ValidationError("membership map must cover columns 0..p-1")
        ids = [membership[k] for k in keys]
    else:
        ids = list(membership)
    if not ids:
        raise ValidationError("membership is empty")

    seen: dict = {}
    for gid in ids:
        if gid not in seen:
            seen[gid] = len(seen)
    if labels is not None:
        order = [str(l) for l in labels]
        present = {str(g) for g in seen}
        missing = [l for l in order if l not in present]
        if missing:
            raise ValidationError(f"groups {missing} are named but have no columns")
        if len(order) != len(seen):
            raise ValidationError("labels must name every group exactly once")
        index = {l: i for i, l in enumerate(order)}
        mem = np.array([index[str(g)] for g in ids], dtype=np.intp)
        final_labels = tuple(order)
    else:
        mem = np.array([seen[g] for g in ids], dtype=np.intp)
        final_labels = tuple(str(g) for g in sorted(seen, key=seen.get))
    sizes = np.bincount(mem, minlength=len(final_labels))
    return GroupLayout(n_groups=len(final_labels), membership=mem,
                       sizes=sizes, labels=final_labels)


@dataclass(frozen=True)
class GroupedDesign:
    """Design matrix, response and the feature grouping.

    ``X`` has shape ``(n, p)`` with one row per observation; ``Y`` has length
    ``n``.  All entries must be finite.
    """

    X: np.ndarray
    Y: np.ndarray
    layout: GroupLayout

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValidationError("X must be a non-empty 2-d array")
        if Y.shape != (X.shape[0],):
            raise ValidationError("Y must be a vector with one entry per row of X")
        if not np.isfinite(X).all() or not np.isfinite(Y).all():
            raise ValidationError("design contains non-finite entries")
        if self.layout.n_features != X.shape[1]:
            raise ValidationError(
                f"layout covers {self.layout.n_features} columns, X has {X.shape[1]}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class RegVector:
    """Per-group penalties in ``(0, inf]``; ``inf`` drops the group."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValidationError("penalty vector must be 1-d and non-empty")
        if np.isnan(values).any() or (values <= 0).any():
            raise ValidationError("penalties must be strictly positive (inf allowed)")
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, lam: float, n_groups: int) -> "RegVector":
        return cls(np.full(n_groups, float(lam)))

    @property
    def n_groups(self) -> int:
        return int(self.values.size)

    @property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    @property
    def all_infinite(self) -> bool:
        return not self.finite_mask.any()

    def expand(self, layout: GroupLayout) -> np.ndarray:
        return expand_diagonal(self, layout)


def expand_diagonal(reg: RegVector, layout: GroupLayout) -> np.ndarray:
    """Expand per-group penalties to the length-``p`` diagonal: column ``j``
    gets the penalty of its group.  ``inf`` entries are preserved."""
    if reg.n_groups != layout.n_groups:
        raise ValidationError(
            f"penalty vector has {reg.n_groups} groups, layout has {layout.n_groups}")
    return reg.values[layout.membership]


@dataclass(frozen=True)
class StandardizationState:
    """Means/scales needed to undo column and response standardization."""

    feature_means: np.ndarray
    feature_scales: np.ndarray
    response_mean: float
    response_scale: float

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.feature_means) / self.feature_scales

    def destandardize_coefficients(self, w_std: np.ndarray) -> tuple[np.ndarray, float]:
        """Map standardized-scale coefficients to original-scale
        ``(coefficients, intercept)`` so that predictions agree exactly."""
        beta = self.response_scale * np.asarray(w_std, dtype=float) / self.feature_scales
        intercept = self.response_mean - float(self.feature_means @ beta)
        return beta, intercept

    def predict_original(self, X: np.ndarray, w_std: np.ndarray) -> np.ndarray:
        beta, intercept = self.destandardize_coefficients(w_std)
        return np.asarray(X, dtype=float) @ beta + intercept


def standardize(design: GroupedDesign) -> tuple[GroupedDesign, StandardizationState]:
    """Center and scale every column and the response to sample mean 0 and
    sample variance 1 (denominator ``n - 1``).

    Raises :class:`ConstantColumnError` naming the offending column when a
    column (or the response) has zero sample variance.  Requires ``n >= 2``.
    """
    X, Y = design.X, design.Y
    n = design.n
    if n < 2:
        raise ValidationError("standardization needs at least two observations")
    mu = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1)
    dead = np.flatnonzero(sd == 0)
    if dead.size:
        raise ConstantColumnError(
            f"column {int(dead[0])} is constant and cannot be standardized")
    y_mu = float(Y.mean())
    y_sd = float(Y.std(ddof=1))
    if y_sd == 0:
        raise ConstantColumnError("the response is constant and cannot be standardized")
    Xs = (X - mu) / sd
    Ys = (Y - y_mu) / y_sd
    state = StandardizationState(feature_means=mu, feature_scales=sd,
                                 response_mean=y_mu, response_scale=y_sd)
    return GroupedDesign(X=Xs, Y=Ys, layout=design.layout), state
