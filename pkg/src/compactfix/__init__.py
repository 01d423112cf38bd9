"""Weighted-space toolkit for integral equations on unbounded domains.

Compactified coordinates turn prescribed asymptotics into boundary data:
limits at infinity become face values, weighted sup norms become grid
maxima, and the cone fixed-point-index conditions become checkable numbers.
"""

from .casestudy import (NamedProblem, PipelineBundle, PROBLEM_IDS,
                        load_problem, load_problem_file, run_full_pipeline,
                        validate_closed_forms)
from .compactify import (BallCompactification, Extension, ExtensionError,
                         HalfLineOnePoint, IntervalIdentity, LimitResult,
                         LineOnePoint, LineTwoPoint, ProductCompactification,
                         XPoint, ball_inverse, ball_map, classify_ladder,
                         default_levels, extend, halfline_metric, kappa_limit)
from .cones import (ChainError, ConeReport, ConeSpec, IndexCheck, PlanResult,
                    cone_membership, f_inf_rho, f_sup_rho, index_one_check,
                    index_one_sweep, index_zero_check, multiplicity_plan)
from .funcspace import (BumpChain, FaceLimitError, GammaFunction,
                        PrecompactnessReport, WeightedGridFunction,
                        bump_chain, gamma_p, gaussian_family,
                        gaussian_family_separation, load_grid_function,
                        multi_indices, precompactness_report,
                        quotient_derivative, save_grid_function,
                        weighted_norm)
from .greenop import (GridHammersteinOperator, HypothesisReport, Kernel,
                      Nonlinearity, QuadratureError, adaptive_quadrature,
                      apply_T, check_hypotheses, cumulative_weights,
                      kernel_abs_integral, unbounded_quadrature)
from .solver import (IterationError, SolveConfig, SolveResult,
                     asymptotic_profile, pde_residual, picard_solve,
                     write_outputs)

__version__ = "0.1.0"

__all__ = [
    "BallCompactification", "BumpChain", "ChainError", "ConeReport",
    "ConeSpec", "Extension", "ExtensionError", "FaceLimitError",
    "GammaFunction", "GridHammersteinOperator", "HalfLineOnePoint",
    "HypothesisReport", "IndexCheck", "IntervalIdentity", "IterationError",
    "Kernel", "LimitResult", "LineOnePoint", "LineTwoPoint", "NamedProblem",
    "Nonlinearity", "PipelineBundle", "PlanResult", "PrecompactnessReport",
    "PROBLEM_IDS", "ProductCompactification", "QuadratureError",
    "SolveConfig", "SolveResult", "WeightedGridFunction", "XPoint",
    "adaptive_quadrature", "apply_T", "asymptotic_profile", "ball_inverse",
    "ball_map", "bump_chain", "check_hypotheses", "classify_ladder",
    "cone_membership", "cumulative_weights", "default_levels", "extend",
    "f_inf_rho", "f_sup_rho", "gamma_p", "gaussian_family",
    "gaussian_family_separation", "halfline_metric", "index_one_check",
    "index_one_sweep", "index_zero_check", "kappa_limit",
    "kernel_abs_integral", "load_grid_function", "load_problem",
    "load_problem_file", "multi_indices", "multiplicity_plan",
    "pde_residual", "picard_solve", "precompactness_report",
    "quotient_derivative", "run_full_pipeline", "save_grid_function",
    "unbounded_quadrature", "validate_closed_forms", "weighted_norm",
    "write_outputs",
]
