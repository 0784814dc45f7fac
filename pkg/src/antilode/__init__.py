"""antilode: solvers built around the scalar ODE u' = f(x)*conj(u) + g(x).

The conjugate coupling makes that equation real-linear rather than
complex-linear, yet a number of classical one-dimensional problems reduce
to it exactly: the stationary Schrodinger equation, the variable-coefficient
Helmholtz equation, the Zakharov-Shabat spectral system and the two-flux
Kubelka-Munk model.  This package implements the scalar solvers, the 2x2
conjugate-coupled system machinery behind them, the truncated
nested-integral kernels that provide an integrator-free cross-check, the
four reduction pipelines, and a CLI with CSV/figure output plus a built-in
verification harness.
"""

from .antidiagonal import (AntidiagonalProblem, DiagonalMultipliers,
                           FundamentalPair, GeneralSystem,
                           StrongConditionCheck, WeakConditionCheck,
                           check_strong_condition, check_weak_condition,
                           fundamental_pair, remove_diagonal,
                           solve_homogeneous, solve_nonhomogeneous,
                           solve_strong_explicit)
from .antilinear import (AntilinearProblem, DecoupledPair, solve_antilinear,
                         solve_constant_closed_form, solve_decoupled_pair,
                         solve_forced_decoupled_pair)
from .errors import (CompatibilityError, EvaluationError, InvalidProblemError,
                     ParseError, SolverFailure)
from .expr import evaluate, parse, to_str
from .numerics import (CoefficientFunction, ConvergenceStudy, Grid, Trajectory,
                       convergence_order, cumulative_integral,
                       cumulative_samples, finite_difference_derivative,
                       integrate_linear_system)
from .picard import (SeriesKernels, forced_series_kernels,
                     scalar_identity_residuals, series_kernels)
from .reductions import (HelmholtzInput, InverseRecipe, KubelkaMunkInput,
                         PipelineResult, ReducedProblem, SchrodingerInput,
                         ZakharovShabatInput, reduce_helmholtz,
                         reduce_kubelka_munk, reduce_schrodinger,
                         reduce_zakharov_shabat, solve_reduced)

__version__ = "0.1.0"

__all__ = [
    "AntidiagonalProblem", "AntilinearProblem", "CoefficientFunction",
    "CompatibilityError", "ConvergenceStudy", "DecoupledPair",
    "DiagonalMultipliers", "EvaluationError", "FundamentalPair",
    "GeneralSystem", "Grid", "HelmholtzInput", "InvalidProblemError",
    "InverseRecipe", "KubelkaMunkInput", "ParseError", "PipelineResult",
    "ReducedProblem", "SchrodingerInput", "SeriesKernels", "SolverFailure",
    "StrongConditionCheck", "Trajectory", "WeakConditionCheck",
    "ZakharovShabatInput", "check_strong_condition", "check_weak_condition",
    "convergence_order", "cumulative_integral", "cumulative_samples",
    "evaluate", "finite_difference_derivative", "forced_series_kernels",
    "fundamental_pair", "integrate_linear_system", "parse",
    "reduce_helmholtz", "reduce_kubelka_munk", "reduce_schrodinger",
    "reduce_zakharov_shabat", "remove_diagonal", "scalar_identity_residuals",
    "series_kernels", "solve_antilinear", "solve_constant_closed_form",
    "solve_decoupled_pair", "solve_forced_decoupled_pair",
    "solve_homogeneous", "solve_nonhomogeneous", "solve_reduced",
    "solve_strong_explicit", "to_str",
]
