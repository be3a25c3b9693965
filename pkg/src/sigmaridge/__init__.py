"""Group-regularized ridge regression driven by a single tuning scalar.

The estimator maps one cross-validated parameter to a full vector of
per-group ridge penalties through a method-of-moments construction solved by
nonnegative least squares, then picks the scalar by an accelerated
leave-one-out error.  The package also ships the matching asymptotic risk
oracle for block-diagonal covariance, a group-lasso baseline with an exact
bridge into group ridge, and a seeded Monte Carlo harness.
"""

__version__ = "0.1.0"

from .core import (ConstantColumnError, GroupLayout, GroupedDesign, NumericError,
                   RegVector, SigmaRidgeError, StandardizationState,
                   ValidationError, build_layout, expand_diagonal, standardize)
from .group_lasso import (GroupLassoFit, fit_group_lasso, holdout_split,
                          lambda_gl_max, tune_group_lasso)
from .nnls import NnlsSolution, solve_nnls
from .ridge import (DegenerateLeverageError, DesignSpectrum, FlatResponseError,
                    RidgeFit, cv_star, fit_group_ridge, lambda_grid_max,
                    tune_single_lambda)
from .rmt import (FixedPointSolution, RiskSpec, SpectralDist, TwoAnalystRisks,
                  asymptotic_risk, optimal_single_lambda, optimal_vector_lambda,
                  single_lambda_risk_identity, solve_fixed_point,
                  two_analyst_risks)
from .sigma_path import (MomentSystem, SigmaPathPoint, SigmaRidgeFit,
                         build_moment_system, fit_sigma_ridge, lambda_of_sigma,
                         path_table, sigma_max)
from .sim import (ComparisonRow, SimConfig, TheoryCheckRow, bayes_oracle_lambda,
                  coarsen_groups, empirical_vs_theoretical, generate,
                  linear_alpha_design, run_comparison, strategy_lambda,
                  tune_multi_ridge)

__all__ = [name for name in dir() if not name.startswith("_")]
