"""Iterative regularization of nonlinear ill-posed problems.

Landweber iteration, Nesterov-accelerated proximal gradient and the general
two-point gradient scheme, with discrepancy-type stopping rules, energy
diagnostics and two benchmark forward problems (a nonlinear diagonal operator
and periodic auto-convolution).
"""

__version__ = "0.1.0"

from .autoconv import AutoconvProblem, HatFunctionSpace
from .diagonal import DiagonalProblem
from .hilbert import BallConstraint, EuclideanSpace, inner, norm, project_ball
from .operators import (ForwardProblem, ObservedData, adjoint_test,
                        estimate_operator_bound, gradient, residual)
from .solvers import (IterationTrace, SolverConfig, landweber_run,
                      nesterov_lambda, nesterov_run, tpg_run)
from .stopping import (StoppingRule, constants_c1_c2, delta_correction,
                       kstar_bound, should_stop, threshold)

__all__ = [
    "AutoconvProblem", "BallConstraint", "DiagonalProblem", "EuclideanSpace",
    "ForwardProblem", "HatFunctionSpace", "IterationTrace", "ObservedData",
    "SolverConfig", "StoppingRule", "adjoint_test", "constants_c1_c2",
    "delta_correction", "estimate_operator_bound", "gradient", "inner",
    "kstar_bound", "landweber_run", "nesterov_lambda", "nesterov_run", "norm",
    "project_ball", "residual", "should_stop", "threshold", "tpg_run",
]
