import numpy as np
import pytest

from sigmaridge import (RegVector, RiskSpec, SigmaRidgeError, SimConfig,
                        SpectralDist, ValidationError, bayes_oracle_lambda,
                        build_layout, coarsen_groups, empirical_vs_theoretical,
                        fit_group_ridge, generate, run_comparison)
from sigmaridge.core import GroupedDesign


def flat_layout(sizes, prefix="g"):
    return build_layout(sum(([f"{prefix}{i}"] * s for i, s in enumerate(sizes)), []))


def test_zero_signal_gives_zero_coefficients():
    config = SimConfig(layout=flat_layout([5, 5]), n=20, n_test=10,
                       alphas=np.zeros(2), sigma=1.0, seed=1)
    _, _, w = generate(config)
    assert np.linalg.norm(w) == 0.0


def test_within_group_coefficient_variance():
    # single-draw sample variances fluctuate with relative sd ~ sqrt(2/p_g),
    # so the 20%/3% bands are checked on a small pooled sample
    layout = flat_layout([25, 2500])
    small, big = [], []
    for seed in range(16):
        config = SimConfig(layout=layout, n=5, n_test=5,
                           alphas=np.array([2.0, 3.0]), sigma=1.0, seed=seed)
        _, _, w = generate(config)
        small.append(w[layout.indices(0)].var())
        big.append(w[layout.indices(1)].var())
    assert np.mean(small) == pytest.approx(4.0 / 25, rel=0.2)
    assert np.mean(big) == pytest.approx(9.0 / 2500, rel=0.03)


def test_ar1_lag_one_correlation():
    layout = flat_layout([3, 3])
    config = SimConfig(layout=layout, n=10_000, n_test=2,
                       alphas=np.zeros(2), sigma=1.0, covariance="ar1", rho=0.8,
                       seed=3)
    train, _, _ = generate(config)
    lags = [np.corrcoef(train.X[:, j], train.X[:, j + 1])[0, 1] for j in range(5)]
    assert np.allclose(lags, 0.8, atol=0.02)
    # marginals stay unit variance
    assert np.allclose(train.X.var(axis=0, ddof=1), 1.0, atol=0.05)


def test_block_covariance_spectra():
    layout = flat_layout([200, 200])
    spectra = (SpectralDist.point_mass(4.0), SpectralDist.point_mass(0.25))
    config = SimConfig(layout=layout, n=4000, n_test=2, alphas=np.zeros(2),
                       sigma=1.0, covariance="blocks", block_spectra=spectra,
                       seed=5)
    train, _, _ = generate(config)
    assert train.X[:, :200].var() == pytest.approx(4.0, rel=0.05)
    assert train.X[:, 200:].var() == pytest.approx(0.25, rel=0.05)


def test_rademacher_laws():
    layout = flat_layout([4, 4])
    config = SimConfig(layout=layout, n=50, n_test=10,
                       alphas=np.array([2.0, 1.0]), sigma=3.0,
                       coef_law="rademacher", noise_law="rademacher", seed=9)
    train, _, w = generate(config)
    assert set(np.abs(w[:4]).round(12)) == {1.0}  # alpha/sqrt(p_g) = 2/2
    eps = train.Y - train.X @ w
    assert set(np.abs(eps).round(12)) == {3.0}


def test_seed_determinism():
    layout = flat_layout([6, 6])
    config = SimConfig(layout=layout, n=30, n_test=15,
                       alphas=np.array([1.0, 2.0]), sigma=2.0, seed=42)
    a_train, a_test, a_w = generate(config)
    b_train, b_test, b_w = generate(config)
    assert np.array_equal(a_train.X, b_train.X)
    assert np.array_equal(a_test.Y, b_test.Y)
    assert np.array_equal(a_w, b_w)
    other = generate(SimConfig(layout=layout, n=30, n_test=15,
                               alphas=np.array([1.0, 2.0]), sigma=2.0, seed=43))
    assert not np.array_equal(other[0].X, a_train.X)


def test_coarsen_32_to_2():
    layout = flat_layout([25] * 32)
    merged = coarsen_groups(layout, 2)
    assert list(merged.sizes) == [400, 400]
    assert merged.n_groups == 2


def test_coarsen_identity_and_pairs():
    layout = flat_layout([2, 3, 4, 5])
    same = coarsen_groups(layout, 4)
    assert np.array_equal(same.membership, layout.membership)
    pairs = coarsen_groups(layout, 2)
    assert list(pairs.sizes) == [5, 9]
    assert pairs.labels == ("g0+g1", "g2+g3")
    with pytest.raises(ValidationError):
        coarsen_groups(layout, 3)


def test_bayes_oracle_lambda():
    layout = flat_layout([10, 20])
    reg = bayes_oracle_lambda(layout, n=40, alphas=np.array([0.0, 2.0]), sigma=3.0)
    assert np.isinf(reg.values[0])
    assert reg.values[1] == pytest.approx(20 * 9.0 / (40 * 4.0))


def test_first_group_only_equals_restricted_fit():
    rng = np.random.default_rng(11)
    layout = flat_layout([8, 6])
    X = rng.standard_normal((40, 14))
    Y = rng.standard_normal(40)
    full = GroupedDesign(X=X, Y=Y, layout=layout)
    fit_full = fit_group_ridge(full, RegVector([0.7, np.inf]))
    only = GroupedDesign(X=X[:, :8], Y=Y, layout=flat_layout([8]))
    fit_only = fit_group_ridge(only, RegVector([0.7]))
    assert np.abs(fit_full.coefficients[:8] - fit_only.coefficients).max() <= 1e-12
    assert (fit_full.coefficients[8:] == 0).all()


def test_empirical_vs_theoretical_identity_panel():
    spec = RiskSpec(gammas=np.array([0.25, 0.25]), alphas_sq=np.array([2.0, 0.0]),
                    spectra=(SpectralDist.point_mass(), SpectralDist.point_mass()))
    rows = empirical_vs_theoretical(spec, n=1000, n_test=20000, seed=0)
    assert {r.strategy for r in rows} == {"optimal-vector", "optimal-common",
                                          "first-group-only"}
    for row in rows:
        assert row.rel_error < 0.03, (row.strategy, row.rel_error)


def test_universality_rademacher_laws_match_theory():
    spec = RiskSpec(gammas=np.array([0.25, 0.25]), alphas_sq=np.array([2.0, 1.0]),
                    spectra=(SpectralDist.point_mass(), SpectralDist.point_mass()))
    rows = empirical_vs_theoretical(spec, n=1000, n_test=20000, seed=1,
                                    coef_law="rademacher", noise_law="rademacher")
    for row in rows:
        assert row.rel_error < 0.03, (row.strategy, row.rel_error)


def test_run_comparison_structure_and_determinism():
    layout = flat_layout([4] * 4)
    config = SimConfig(layout=layout, n=40, n_test=60,
                       alphas=np.linspace(0.0, 3.0, 4), sigma=1.5, seed=5)
    rows = run_comparison(config, ["sigma-ridge", "single-ridge", "bayes-oracle"],
                          n_reps=3)
    again = run_comparison(config, ["sigma-ridge", "single-ridge", "bayes-oracle"],
                           n_reps=3)
    assert [r.mean_mse for r in rows] == [r.mean_mse for r in again]
    assert all(np.isfinite(r.mean_mse) for r in rows)
    assert all(r.n == 40 for r in rows)
    with pytest.raises(ValidationError):
        run_comparison(config, ["nonsense"], 2)


def test_run_comparison_coarsening_and_failures(monkeypatch):
    layout = flat_layout([4] * 4)
    config = SimConfig(layout=layout, n=30, n_test=40,
                       alphas=np.linspace(0.0, 3.0, 4), sigma=1.0, seed=6)
    rows = run_comparison(config, ["sigma-ridge"], n_reps=2, coarsen_to=2)
    assert rows[0].k_groups == 2

    import sigmaridge.sim as sim_mod

    def broken(*a, **k):
        raise SigmaRidgeError("boom")

    monkeypatch.setattr(sim_mod, "tune_group_lasso", broken)
    with pytest.warns(RuntimeWarning, match="boom"):
        rows = run_comparison(config, ["group-lasso", "single-ridge"], n_reps=2)
    lasso_row = rows[0]
    assert np.isnan(lasso_row.mean_mse) and lasso_row.n_failed == 2
    assert np.isfinite(rows[1].mean_mse)


def test_multi_ridge_runs():
    rng = np.random.default_rng(13)
    from sigmaridge import tune_multi_ridge
    layout = flat_layout([3, 3])
    X = rng.standard_normal((30, 6))
    Y = X @ rng.normal(0, 0.5, 6) + rng.normal(0, 0.5, 30)
    design = GroupedDesign(X=X, Y=Y, layout=layout)
    fit = tune_multi_ridge(design, np.random.default_rng(0), n_candidates=200)
    assert np.isfinite(fit.cv_star)
    assert fit.reg.values.shape == (2,)
