"""Gradient-type iterations: fixed-step descent, Nesterov acceleration, and
the general two-point gradient scheme they both specialize.

Every method runs the same loop

    z_k     = x_k + lambda_k * (x_k - x_{k-1}),
    x_{k+1} = P( z_k + omega * F'(z_k)^* (y - F(z_k)) ),

with P the (optional) ball projection.  lambda_k == 0 for all k gives the
plain descent method; lambda_k = (k-1)/(k+alpha-1) gives the accelerated one.
Because all variants share this single code path, the degenerate choices are
bit-identical to the dedicated entry points, which the tests rely on.
"""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .hilbert import as_vector, project_ball
from .stopping import should_stop

log = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 1e6


@dataclass
class SolverConfig:
    """Scalar knobs shared by all iteration variants.

    omega : step / scaling parameter (must be positive; should stay below
        1/L for the Lipschitz constant L of the residual gradient when known).
    alpha : momentum shape parameter; >= 3 accepted, but only alpha > 3 is
        covered by the noise-corrected stopping theory.
    tau : discrepancy multiplier handed to stopping rules built from this
        config.  Values <= 1 are outside the convergence theory and only log
        a warning, since the benchmark experiments use tau = 1.
    """

    omega: float
    alpha: float = 3.0
    tau: float = 1.0
    max_iter: int = 10000
    lipschitz_estimate: float | None = None

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.alpha < 3:
            raise ValueError(f"alpha must be >= 3, got {self.alpha}")
        if self.alpha == 3:
            log.warning("alpha = 3 is outside the alpha > 3 convergence theory"
                        " (experiment mode)")
        if self.tau <= 1:
            log.warning("tau = %g <= 1 is outside the stopping-rule theory"
                        " (experiment mode)", self.tau)
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if (self.lipschitz_estimate is not None
                and self.omega >= 1.0 / self.lipschitz_estimate):
            log.warning("omega = %g is not below 1/L = %g",
                        self.omega, 1.0 / self.lipschitz_estimate)


def nesterov_lambda(alpha):
    """Momentum schedule (k-1)/(k+alpha-1), zero while there is no history."""

    def lam(k):
        if k < 1:
            return 0.0
        return (k - 1.0) / (k + alpha - 1.0)

    return lam


def constant_lambda(value):
    def lam(k):
        return value

    return lam


@dataclass
class IterationTrace:
    """Per-iteration record of a solver run; entry k describes iterate x_k.

    Record count is k_star + 1 (the k = 0 state is included).  Iterate
    storage is opt-in because it costs k_star * dim floats; the energy
    diagnostics require it.
    """

    residual_norms: list = field(default_factory=list)
    error_norms: list = field(default_factory=list)
    times: list = field(default_factory=list)
    k_star: int = 0
    stop_reason: str = "max_iter"
    iterates: list | None = None
    momentum_points: list | None = None

    def __len__(self):
        return len(self.residual_norms)


def tpg_run(problem, data, config, x0, ball=None, stop=None, lambda_fn=None,
            x_reference=None, store_iterates=False):
    """Two-point gradient iteration; returns (final iterate, trace).

    `lambda_fn(k)` must land in [0, 1).  `stop` is a StoppingRule consuming
    (k, residual norm); without one the loop runs to `config.max_iter`.
    The iteration aborts as `diverged` when the residual norm stops being
    finite or exceeds 1e6 times its initial value.
    """
    if lambda_fn is None:
        lambda_fn = nesterov_lambda(config.alpha)
    x0 = as_vector(x0)
    if ball is not None and ball.enabled and not ball.contains(x0, problem.domain):
        raise ValueError("x0 lies outside the constraint ball")
    space = problem.range_space
    y = data.y_noisy
    err_norm = None
    if x_reference is not None:
        x_reference = as_vector(x_reference)

    trace = IterationTrace()
    if store_iterates:
        trace.iterates = []
        trace.momentum_points = []

    x_prev = x0
    x_curr = x0
    res0 = None
    t_start = time.perf_counter()

    k = 0
    while True:
        fx = problem.apply(x_curr)
        r = fx - y
        rn = space.norm(r)
        if res0 is None:
            res0 = rn
        trace.residual_norms.append(rn)
        if x_reference is not None:
            trace.error_norms.append(problem.domain.norm(x_curr - x_reference))
        trace.times.append(time.perf_counter() - t_start)
        if store_iterates:
            trace.iterates.append(x_curr.copy())

        if not np.isfinite(rn) or (res0 > 0 and rn > DIVERGENCE_FACTOR * res0):
            trace.k_star = k
            trace.stop_reason = "diverged"
            break
        if stop is not None and should_stop(stop, k, rn):
            trace.k_star = k
            trace.stop_reason = "discrepancy_met"
            break
        if k >= config.max_iter:
            trace.k_star = k
            trace.stop_reason = "max_iter"
            break

        lam = lambda_fn(k)
        if not 0.0 <= lam < 1.0:
            raise ValueError(f"combination parameter {lam} at k={k} outside [0, 1)")
        if lam == 0.0:
            z, fz = x_curr, fx
        else:
            z = x_curr + lam * (x_curr - x_prev)
            fz = problem.apply(z)
        if store_iterates:
            trace.momentum_points.append(z.copy())
        step = problem.adjoint(z, fz - y)
        x_next = z - config.omega * step
        if ball is not None:
            x_next = project_ball(ball, x_next, problem.domain)
        x_prev, x_curr = x_curr, x_next
        k += 1

    return x_curr, trace


def landweber_run(problem, data, config, x0, stop=None, x_reference=None,
                  store_iterates=False):
    """Fixed-step gradient descent on the residual functional."""
    return tpg_run(problem, data, config, x0, ball=None, stop=stop,
                   lambda_fn=constant_lambda(0.0), x_reference=x_reference,
                   store_iterates=store_iterates)


def nesterov_run(problem, data, config, x0, ball=None, stop=None,
                 x_reference=None, store_iterates=False):
    """Accelerated proximal gradient iteration with the (k-1)/(k+alpha-1)
    momentum schedule and optional ball projection."""
    return tpg_run(problem, data, config, x0, ball=ball, stop=stop,
                   lambda_fn=nesterov_lambda(config.alpha),
                   x_reference=x_reference, store_iterates=store_iterates)
