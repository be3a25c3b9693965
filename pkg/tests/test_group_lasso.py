import numpy as np
import pytest

from helpers import random_design
from sigmaridge import (GroupedDesign, NumericError, build_layout,
                        fit_group_lasso, fit_group_ridge, holdout_split,
                        lambda_gl_max, tune_group_lasso)
from sigmaridge.group_lasso import group_weights


def kkt_check(design, fit):
    """Independent KKT evaluation straight from the objective."""
    layout = design.layout
    grad = design.X.T @ (design.X @ fit.coefficients - design.Y) / design.n
    kappa = fit.lam * group_weights(layout)
    worst = 0.0
    for g in range(layout.n_groups):
        idx = layout.indices(g)
        wg = fit.coefficients[idx]
        nrm = np.linalg.norm(wg)
        if nrm > 0:
            worst = max(worst, np.abs(grad[idx] + kappa[g] * wg / nrm).max())
        else:
            worst = max(worst, max(0.0, np.linalg.norm(grad[idx]) - kappa[g]))
    return worst


def test_zero_fit_at_max_penalty():
    rng = np.random.default_rng(0)
    for _ in range(20):
        design = random_design(rng, 30, int(rng.integers(4, 16)),
                               int(rng.integers(1, 5)))
        lam = max(lambda_gl_max(design, norm="inf"),
                  lambda_gl_max(design, norm="l2"))
        fit = fit_group_lasso(design, lam)
        assert (fit.coefficients == 0.0).all()
        assert fit.active_groups.size == 0
        # just above the exact threshold the fit is still zero; just below,
        # some group enters
        below = fit_group_lasso(design, 0.99 * lambda_gl_max(design, norm="l2"))
        assert below.active_groups.size >= 1


def test_lambda_zero_recovers_ols():
    rng = np.random.default_rng(1)
    design = random_design(rng, 50, 8, 3)
    ols = np.linalg.lstsq(design.X, design.Y, rcond=None)[0]
    fit = fit_group_lasso(design, 0.0)
    assert np.abs(fit.coefficients - ols).max() < 1e-6 * (1 + np.abs(ols).max())
    assert fit.induced is None


def test_kkt_invariants_every_fit():
    rng = np.random.default_rng(2)
    for _ in range(30):
        design = random_design(rng, 40, int(rng.integers(4, 20)),
                               int(rng.integers(1, 5)))
        lam = float(rng.uniform(0.05, 1.0)) * lambda_gl_max(design)
        fit = fit_group_lasso(design, lam)
        assert kkt_check(design, fit) <= 1e-6


def test_objective_trace_monotone():
    rng = np.random.default_rng(3)
    for _ in range(10):
        design = random_design(rng, 30, 12, 3, corr=0.4)
        lam = 0.1 * lambda_gl_max(design)
        fit = fit_group_lasso(design, lam)
        trace = np.array(fit.objective_trace)
        assert (np.diff(trace) <= 1e-12).all()


def test_induced_penalties_reproduce_lasso_fit():
    rng = np.random.default_rng(4)
    done = 0
    while done < 30:
        design = random_design(rng, 45, int(rng.integers(4, 24)),
                               int(rng.integers(2, 5)))
        lam = float(rng.uniform(0.05, 0.6)) * lambda_gl_max(design)
        fit = fit_group_lasso(design, lam, tol=1e-10)
        if fit.active_groups.size == 0:
            continue
        ridge = fit_group_ridge(design, fit.induced)
        scale = np.abs(fit.coefficients).max()
        assert np.abs(ridge.coefficients - fit.coefficients).max() <= 1e-6 * scale
        done += 1


def test_induced_penalty_values():
    rng = np.random.default_rng(5)
    design = random_design(rng, 40, 9, 3)
    lam = 0.2 * lambda_gl_max(design)
    fit = fit_group_lasso(design, lam)
    w = group_weights(design.layout)
    for g in range(3):
        idx = design.layout.indices(g)
        nrm = np.linalg.norm(fit.coefficients[idx])
        if nrm > 0:
            assert fit.induced.values[g] == pytest.approx(lam * w[g] / nrm)
        else:
            assert np.isinf(fit.induced.values[g])


def test_holdout_split_floor_rule():
    train, test = holdout_split(10, 0.3, seed=0)
    assert len(test) == 3 and len(train) == 7
    assert sorted(np.concatenate([train, test])) == list(range(10))
    train2, test2 = holdout_split(10, 0.3, seed=0)
    assert np.array_equal(test, test2) and np.array_equal(train, train2)


def test_tune_pure_noise_prefers_strong_penalty():
    rng = np.random.default_rng(6)
    hits = 0
    for seed in range(50):
        X = rng.standard_normal((40, 12))
        Y = rng.standard_normal(40)
        design = GroupedDesign(X=X, Y=Y, layout=build_layout(
            ["a"] * 3 + ["b"] * 3 + ["c"] * 3 + ["d"] * 3))
        lam, _ = tune_group_lasso(design, seed=seed)
        grid_hi = lambda_gl_max(design, norm="inf")
        if lam >= grid_hi * 1e-3:  # upper half of the log grid
            hits += 1
    assert hits >= 40


def test_tune_single_strong_group_selected():
    rng = np.random.default_rng(7)
    hits = 0
    for seed in range(50):
        X = rng.standard_normal((60, 16))
        layout = build_layout(["a"] * 4 + ["b"] * 4 + ["c"] * 4 + ["d"] * 4)
        w = np.zeros(16)
        w[4:8] = rng.normal(0, 1.5, 4)  # group b carries all the signal
        Y = X @ w + rng.normal(0, 0.5, 60)
        design = GroupedDesign(X=X, Y=Y, layout=layout)
        _, fit = tune_group_lasso(design, seed=seed)
        if 1 in fit.active_groups:
            hits += 1
    assert hits >= 45


def test_sweep_cap_raises_with_residual():
    rng = np.random.default_rng(8)
    design = random_design(rng, 30, 12, 3, corr=0.8)
    lam = 1e-4 * lambda_gl_max(design)
    with pytest.raises(NumericError, match="residual"):
        fit_group_lasso(design, lam, max_sweeps=1)
