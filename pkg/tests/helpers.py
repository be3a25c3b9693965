"""Shared test fixtures: random problem instances and independent oracles.

The leave-one-out oracle here deliberately avoids every production code
path: it refits the normal equations from scratch with plain
``np.linalg.solve``, holding the (unnormalized) penalty matrix fixed while
row ``i`` is removed from the loss.
"""

import numpy as np

from sigmaridge import GroupedDesign, RegVector, build_layout, expand_diagonal


def random_layout(rng, p, n_groups):
    """Random partition of p columns into n_groups non-empty groups."""
    if n_groups > p:
        raise ValueError("cannot split p columns into more than p groups")
    ids = np.concatenate([np.arange(n_groups),
                          rng.integers(0, n_groups, size=p - n_groups)])
    rng.shuffle(ids)
    return build_layout([f"g{i}" for i in ids])


def random_design(rng, n, p, n_groups, signal=1.0, noise=1.0, corr=0.0):
    layout = random_layout(rng, p, n_groups)
    X = rng.standard_normal((n, p))
    if corr:
        shared = rng.standard_normal((n, 1))
        X = np.sqrt(1 - corr) * X + np.sqrt(corr) * shared
    w = rng.normal(0.0, signal / np.sqrt(p), p)
    Y = X @ w + rng.normal(0.0, noise, n)
    return GroupedDesign(X=X, Y=Y, layout=layout)


def random_reg(rng, n_groups, lo=0.05, hi=20.0):
    return RegVector(np.exp(rng.uniform(np.log(lo), np.log(hi), n_groups)))


def loo_explicit(design, reg):
    """Brute-force leave-one-out error with the penalty matrix held fixed.

    For each held-out row the refit solves
    ``(sum_{j != i} x_j x_j' / n + diag(lam)) w = sum_{j != i} x_j Y_j / n``
    (active columns only), then the error averages the held-out residuals.
    """
    lam_col = expand_diagonal(reg, design.layout)
    active = np.isfinite(lam_col)
    X = design.X[:, active]
    Y = design.Y
    n = design.n
    total = 0.0
    for i in range(n):
        keep = np.arange(n) != i
        Xi, Yi = X[keep], Y[keep]
        if X.shape[1]:
            C = Xi.T @ Xi / n + np.diag(lam_col[active])
            w = np.linalg.solve(C, Xi.T @ Yi / n)
            pred = X[i] @ w
        else:
            pred = 0.0
        total += (Y[i] - pred) ** 2
    return total / n
