"""Joint+marginal moment relaxations for polynomial optimization.

Each variable in turn is treated as a parameter with a fixed marginal
distribution; the dual of the resulting moment relaxation yields a
univariate polynomial below the problem's value function in that
variable, whose minimizer fixes the variable.
"""
from .algo import AlgoConfig, AlgoTrace, CutVector, algo1, algo2, dichotomy, maxcut_maxgap
from .conic import ConicProgram, ConicSolution, SolverOptions, Status, solve
from .localopt import refine
from .moments import Interval, uniform_moments
from .poly import Polynomial
from .relax import (
    SemialgebraicProblem,
    SignSet,
    build_parametric,
    build_parametric_fixed_prefix,
    build_standard,
    extract_value_poly,
)
from .univar import minimize_on_interval

__version__ = "0.1.0"
