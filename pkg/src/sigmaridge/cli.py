"""Command-line front end.

Subcommands: ``fit`` / ``predict`` on CSV data with a group manifest,
``path`` for the penalty path and CV curve, ``risk-curve`` for theoretical
risk sweeps, ``simulate`` for theory-vs-Monte-Carlo tables and ``compare``
for the multi-method simulation study.

Every output file carries a reproducibility header (version, seed, full
config and its hash) and is byte-identical across reruns with the same seed
and inputs.  Exit codes: 0 success, 2 input error, 3 numeric error.
"""

from __future__ import annotations

import os

_threads = os.environ.get("SIGMARIDGE_THREADS")
if _threads:  # must happen before the BLAS runtime is loaded
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                 "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import json
import sys
import time
import warnings

import numpy as np

from . import __version__
from .core import (GroupedDesign, NumericError, RegVector, ValidationError,
                   standardize)
from .group_lasso import tune_group_lasso
from .io import load_design, repro_meta, write_csv, write_json
from .ridge import fit_group_ridge, tune_single_lambda
from .rmt import RiskSpec, SpectralDist, asymptotic_risk
from .sigma_path import fit_sigma_ridge, path_table
from .sim import (METHODS, SimConfig, empirical_vs_theoretical,
                  linear_alpha_design, run_comparison, strategy_lambda,
                  STRATEGIES)

FIT_METHODS = ("sigma-ridge", "single-ridge", "multi-ridge", "group-lasso")


def _parse_sigma_grid(text: str) -> tuple[int, float]:
    try:
        n, lo = text.split(",")
        return int(n), float(lo)
    except ValueError as exc:
        raise ValidationError(
            f"--sigma-grid expects 'count,lo_frac', got {text!r}") from exc


def _spectrum_from_json(obj: dict) -> SpectralDist:
    kind = obj.get("type", "identity")
    if kind == "identity":
        return SpectralDist.point_mass(1.0)
    if kind == "exponential":
        return SpectralDist.exponential_quantiles(rate=obj.get("rate", 0.5),
                                                  m=obj.get("m", 2000))
    if kind == "atoms":
        return SpectralDist(np.asarray(obj["atoms"], dtype=float),
                            np.asarray(obj["weights"], dtype=float))
    raise ValidationError(f"unknown spectrum type {kind!r}")


def _load_risk_spec(path: str, alphas_sq=None) -> RiskSpec:
    with open(path) as fh:
        obj = json.load(fh)
    gammas = np.asarray(obj["gammas"], dtype=float)
    if alphas_sq is None:
        alphas_sq = np.asarray(obj["alphas_sq"], dtype=float)
    spectra = [_spectrum_from_json(s) for s in
               obj.get("spectra", [{"type": "identity"}] * gammas.size)]
    return RiskSpec(gammas=gammas, alphas_sq=alphas_sq, spectra=tuple(spectra),
                    noise=float(obj.get("noise", 1.0)))


def _fit_by_method(design: GroupedDesign, method: str, args):
    """Fit a standardized design; returns (w_std, tuning dict, cv_star)."""
    labels = design.layout.labels
    if method == "sigma-ridge":
        n_grid, lo_frac = _parse_sigma_grid(args.sigma_grid)
        lam_init = None
        if args.lambda_init != "auto":
            lam_init = float(args.lambda_init)
            if lam_init == 0.0:
                floor = 1e-6 * tune_single_lambda(design)[0]
                warnings.warn("lambda-init 0 is outside the model; using the "
                              f"smallest grid value {floor:g}", RuntimeWarning)
                lam_init = floor
        res = fit_sigma_ridge(design, n_grid=n_grid, grid_lo_frac=lo_frac,
                              lambda_init=lam_init)
        tuning = {"sigma_hat": res.best.sigma, "lambda_init": res.lambda_init,
                  "lambda_hat": dict(zip(labels, res.best.reg.values))}
        return res.fit.coefficients, tuning, res.fit.cv_star
    if method == "single-ridge":
        lam, _ = tune_single_lambda(design)
        fit = fit_group_ridge(design, RegVector.uniform(lam, len(labels)))
        tuning = {"lambda_hat": dict(zip(labels, fit.reg.values))}
        return fit.coefficients, tuning, fit.cv_star
    if method == "multi-ridge":
        from .sim import tune_multi_ridge
        fit = tune_multi_ridge(design, np.random.default_rng(args.seed))
        tuning = {"lambda_hat": dict(zip(labels, fit.reg.values))}
        return fit.coefficients, tuning, fit.cv_star
    if method == "group-lasso":
        lam, fit = tune_group_lasso(design, seed=args.seed)
        induced = (dict(zip(labels, fit.induced.values))
                   if fit.induced is not None else None)
        tuning = {"lambda_gl": lam, "lambda_hat": induced}
        return fit.coefficients, tuning, None
    raise ValidationError(f"unknown method {method!r}; choose from {FIT_METHODS}")


def cmd_fit(args) -> int:
    t0 = time.perf_counter()
    design, feature_names = load_design(args.data, args.response, args.groups)
    std_design, state = standardize(design)
    w_std, tuning, cv = _fit_by_method(std_design, args.method, args)
    beta, intercept = state.destandardize_coefficients(w_std)
    wall = time.perf_counter() - t0

    config = {"command": "fit", "data": args.data, "groups": args.groups,
              "response": args.response, "method": args.method,
              "seed": args.seed, "sigma_grid": args.sigma_grid,
              "lambda_init": args.lambda_init}
    payload = {"format": "sigmaridge-model", "version": __version__,
               "seed": args.seed, "config": config,
               "config_hash": repro_meta(__version__, args.seed, config)["config_hash"],
               "method": args.method, "response": args.response,
               "feature_names": feature_names,
               "group_labels": list(design.layout.labels),
               "group_of_feature": {f: design.layout.labels[g] for f, g in
                                    zip(feature_names, design.layout.membership)},
               "tuning": tuning, "cv_star": cv,
               "coefficients": dict(zip(feature_names, beta)),
               "intercept": intercept,
               "standardization": {
                   "feature_means": dict(zip(feature_names, state.feature_means)),
                   "feature_scales": dict(zip(feature_names, state.feature_scales)),
                   "response_mean": state.response_mean,
                   "response_scale": state.response_scale}}
    write_json(args.out, payload)
    print(f"fit[{args.method}] wrote {args.out}")
    for key, value in tuning.items():
        print(f"  {key}: {value}")
    if cv is not None:
        print(f"  cv_star: {cv:.6g}")
    print(f"  wall_time_s: {wall:.3f}")
    return 0


def cmd_predict(args) -> int:
    with open(args.model) as fh:
        model = json.load(fh)
    import pandas as pd
    frame = pd.read_csv(args.data)
    names = model["feature_names"]
    missing = [f for f in names if f not in frame.columns]
    if missing:
        raise ValidationError(f"prediction data lacks feature(s) {missing[:5]}")
    X = frame[names].to_numpy(dtype=float)
    beta = np.array([model["coefficients"][f] for f in names], dtype=float)
    preds = X @ beta + model["intercept"]
    meta = repro_meta(__version__, model.get("seed", 0),
                      {"command": "predict", "model": args.model, "data": args.data})
    write_csv(args.out, ["prediction"], [[p] for p in preds], meta=meta)
    print(f"predict wrote {args.out} ({preds.size} rows)")
    return 0


def cmd_path(args) -> int:
    design, _ = load_design(args.data, args.response, args.groups)
    std_design, _ = standardize(design)
    n_grid, lo_frac = _parse_sigma_grid(args.sigma_grid)
    res = fit_sigma_ridge(std_design, n_grid=n_grid, grid_lo_frac=lo_frac)
    config = {"command": "path", "data": args.data, "groups": args.groups,
              "response": args.response, "seed": args.seed,
              "sigma_grid": args.sigma_grid}
    meta = repro_meta(__version__, args.seed, config)
    header, rows = path_table(res, std_design.layout.labels)
    write_csv(args.out, header, rows, meta=meta)
    print(f"path wrote {args.out} ({len(rows)} grid points, "
          f"sigma_hat={res.best.sigma:.6g})")
    if args.coef_out:
        labels = std_design.layout.labels
        coef_header = ["sigma"] + [f"w_{j}_{labels[g]}" for j, g in
                                   enumerate(std_design.layout.membership)]
        coef_rows = []
        for pt in res.path:
            fit = fit_group_ridge(std_design, pt.reg)
            coef_rows.append([pt.sigma] + list(fit.coefficients))
        write_csv(args.coef_out, coef_header, coef_rows, meta=meta)
        print(f"path wrote per-coefficient trajectories to {args.coef_out}")
    return 0


def cmd_risk_curve(args) -> int:
    spec = _load_risk_spec(args.spec, alphas_sq=np.zeros(2))
    if spec.n_groups != 2:
        raise ValidationError("risk-curve sweeps the two-group signal split; "
                              "the spec must have exactly 2 groups")
    with open(args.spec) as fh:
        raw = json.load(fh)
    total = float(raw.get("total_signal", args.total_signal))
    if total <= 0:
        raise ValidationError("total_signal must be positive")
    fractions = np.linspace(0.0, 1.0, args.points) if args.points > 1 \
        else np.array([0.5])
    config = {"command": "risk-curve", "spec": args.spec, "points": args.points,
              "total_signal": total, "seed": args.seed}
    rows = []
    for s in fractions:
        alphas_sq = np.array([s * total, (1.0 - s) * total])
        panel = RiskSpec(gammas=spec.gammas, alphas_sq=alphas_sq,
                         spectra=spec.spectra, noise=spec.noise)
        row = [s, alphas_sq[0], alphas_sq[1]]
        for strategy in STRATEGIES:
            try:
                row.append(asymptotic_risk(panel, strategy_lambda(panel, strategy)))
            except ValidationError:
                row.append("")
        rows.append(row)
    header = (["signal_fraction_group1", "alpha1_sq", "alpha2_sq"]
              + [f"risk_{s.replace('-', '_')}" for s in STRATEGIES])
    write_csv(args.out, header, rows, meta=repro_meta(__version__, args.seed, config))
    print(f"risk-curve wrote {args.out} ({len(rows)} rows)")
    return 0


def cmd_simulate(args) -> int:
    spec = _load_risk_spec(args.spec)
    rows = empirical_vs_theoretical(spec, n=args.n, n_test=args.n_test,
                                    seed=args.seed)
    config = {"command": "simulate", "spec": args.spec, "n": args.n,
              "n_test": args.n_test, "seed": args.seed}
    header = ["strategy"] + [f"lambda_{g + 1}" for g in range(spec.n_groups)] \
        + ["empirical_risk", "theoretical_risk", "rel_error"]
    out_rows = [[r.strategy, *r.lambdas, r.empirical_risk, r.theoretical_risk,
                 r.rel_error] for r in rows]
    write_csv(args.out, header, out_rows,
              meta=repro_meta(__version__, args.seed, config))
    print(f"simulate wrote {args.out}")
    return 0


def cmd_compare(args) -> int:
    p = args.p if args.p is not None else (800 if args.full_scale else 200)
    k = args.groups_count if args.groups_count is not None else \
        (32 if args.full_scale else 8)
    reps = args.reps if args.reps is not None else (400 if args.full_scale else 50)
    n = args.n if args.n is not None else p
    layout, alphas = linear_alpha_design(p=p, n_groups=k, alpha_max=args.alpha_max)
    config_dict = {"command": "compare", "n": n, "p": p, "groups": k,
                   "coarsen_to": args.coarsen_to, "cov": args.cov, "rho": args.rho,
                   "sigma": args.sigma, "alpha_max": args.alpha_max, "reps": reps,
                   "methods": args.methods, "seed": args.seed,
                   "n_test": args.n_test, "full_scale": args.full_scale}
    config = SimConfig(layout=layout, n=n, n_test=args.n_test, alphas=alphas,
                       sigma=args.sigma, covariance=args.cov, rho=args.rho,
                       seed=args.seed)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    rows = run_comparison(config, methods, reps, coarsen_to=args.coarsen_to)
    header = ["method", "k_groups", "n", "covariance", "mean_mse", "se",
              "wall_time", "n_failed"]
    out_rows = []
    for r in rows:
        wall = r.wall_time if args.timings else 0.0
        out_rows.append([r.method, r.k_groups, r.n, r.covariance, r.mean_mse,
                         r.se, wall, r.n_failed])
    write_csv(args.out, header, out_rows,
              meta=repro_meta(__version__, args.seed, config_dict))
    print(f"compare wrote {args.out}")
    for r in rows:
        print(f"  {r.method:>14}: mse={r.mean_mse:.4f} (se {r.se:.4f})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigmaridge",
        description="Group-regularized ridge regression with one "
                    "cross-validated tuning parameter")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a model on CSV data")
    fit.add_argument("data")
    fit.add_argument("--response", required=True)
    fit.add_argument("--groups", required=True)
    fit.add_argument("--method", default="sigma-ridge", choices=FIT_METHODS)
    fit.add_argument("--sigma-grid", default="100,0.001",
                     help="grid as 'count,lo_frac' (default 100,0.001)")
    fit.add_argument("--lambda-init", default="auto")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out", default="model.json")
    fit.set_defaults(func=cmd_fit)

    pred = sub.add_parser("predict", help="apply a saved model to new data")
    pred.add_argument("data")
    pred.add_argument("--model", required=True)
    pred.add_argument("--out", default="predictions.csv")
    pred.set_defaults(func=cmd_predict)

    path = sub.add_parser("path", help="export the penalty path and CV curve")
    path.add_argument("data")
    path.add_argument("--response", required=True)
    path.add_argument("--groups", required=True)
    path.add_argument("--sigma-grid", default="100,0.001")
    path.add_argument("--coef-out", default=None,
                      help="also write per-coefficient trajectories")
    path.add_argument("--seed", type=int, default=0)
    path.add_argument("--out", default="path.csv")
    path.set_defaults(func=cmd_path)

    rc = sub.add_parser("risk-curve", help="theoretical risk across a signal split")
    rc.add_argument("--spec", required=True)
    rc.add_argument("--points", type=int, default=25)
    rc.add_argument("--total-signal", type=float, default=2.0)
    rc.add_argument("--seed", type=int, default=0)
    rc.add_argument("--out", default="risk_curve.csv")
    rc.set_defaults(func=cmd_risk_curve)

    simp = sub.add_parser("simulate", help="theory vs Monte Carlo on one replicate")
    simp.add_argument("--spec", required=True)
    simp.add_argument("--n", type=int, default=1000)
    simp.add_argument("--n-test", type=int, default=20000)
    simp.add_argument("--seed", type=int, default=0)
    simp.add_argument("--out", default="simulate.csv")
    simp.set_defaults(func=cmd_simulate)

    cmp_ = sub.add_parser("compare", help="multi-method simulation study")
    cmp_.add_argument("--n", type=int, default=None)
    cmp_.add_argument("--p", type=int, default=None)
    cmp_.add_argument("--groups-count", type=int, default=None)
    cmp_.add_argument("--coarsen-to", type=int, default=None)
    cmp_.add_argument("--cov", default="identity", choices=("identity", "ar1"))
    cmp_.add_argument("--rho", type=float, default=0.8)
    cmp_.add_argument("--sigma", type=float, default=5.0)
    cmp_.add_argument("--alpha-max", type=float, default=10.0)
    cmp_.add_argument("--reps", type=int, default=None)
    cmp_.add_argument("--n-test", type=int, default=1000)
    cmp_.add_argument("--methods",
                      default="sigma-ridge,single-ridge,group-lasso,bayes-oracle",
                      help=f"comma list from {METHODS}")
    cmp_.add_argument("--full-scale", action="store_true",
                      help="defaults p=800, 32 groups, 400 reps")
    cmp_.add_argument("--timings", action="store_true",
                      help="record real wall times (output no longer "
                           "byte-reproducible)")
    cmp_.add_argument("--seed", type=int, default=0)
    cmp_.add_argument("--out", default="compare.csv")
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"sigmaridge: input error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"sigmaridge: numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
