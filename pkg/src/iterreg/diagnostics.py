"""Theory-side instrumentation for solver runs.

Computes the quantities the convergence analysis is phrased in: the
constrained objective Theta, the auxiliary averaged sequence w_k, the
prox-gradient map G, and the per-iteration energy

    E(k) = (2*omega/(alpha-1)) * (k+alpha-2)^2 * (Theta(x_k) - Theta(x_ref))
           + (alpha-1) * ||w_k - x_ref||^2,

which is non-increasing up to the stopping index on locally convex problems.
A sampling probe for the second-order convexity criterion is included.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .hilbert import project_ball
from .operators import gradient, residual, sample_in_ball


def evaluate_theta(problem, data, ball, x):
    """Constrained objective: 0.5*||F(x)-y||^2 inside the ball, inf outside."""
    if ball is not None and ball.enabled and not ball.contains(x, problem.domain):
        return math.inf
    _, rn = residual(problem, x, data)
    return 0.5 * rn * rn


def compute_w(k, alpha, x_curr, x_prev):
    """Averaged sequence w_k = x_k + (k-1)/(alpha-1) * (x_k - x_{k-1})."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return x_curr + ((k - 1.0) / (alpha - 1.0)) * (x_curr - x_prev)


def compute_w_from_momentum(k, alpha, z, x_curr):
    """Equivalent form (k+alpha-1)/(alpha-1) * z_k - k/(alpha-1) * x_k.

    Agrees with :func:`compute_w` when z_k follows the accelerated schedule.
    """
    return ((k + alpha - 1.0) * z - k * x_curr) / (alpha - 1.0)


def compute_G(problem, data, ball, omega, z):
    """Prox-gradient map G(z) = (z - P(z - omega * grad Phi(z))) / omega.

    With the ball disabled the projection is the identity and G reduces to
    the plain gradient, which is returned directly so the identity is exact.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    g = gradient(problem, z, data)
    if ball is None or not ball.enabled:
        return g
    inner_point = z - omega * g
    return (z - project_ball(ball, inner_point, problem.domain)) / omega


@dataclass
class EnergyState:
    """Energy-functional snapshot at iteration k."""

    k: int
    energy: float
    theta_gap: float
    w: np.ndarray
    w_dist: float


def energy_series(trace, problem, data, ball, config, x_star):
    """Energy states for every recorded iterate of a trace.

    Requires the trace to have been produced with ``store_iterates=True``.
    `x_star` is the reference solution the energy is measured against
    (the known synthetic solution in the shipped experiments).
    """
    if trace.iterates is None:
        raise ValueError("trace lacks stored iterates; rerun the solver with "
                         "store_iterates=True to enable energy diagnostics")
    alpha = config.alpha
    omega = config.omega
    theta_star = evaluate_theta(problem, data, ball, x_star)
    states = []
    xs = trace.iterates
    for k in range(len(xs)):
        x_prev = xs[k - 1] if k >= 1 else xs[0]
        w = compute_w(k, alpha, xs[k], x_prev)
        theta_k = evaluate_theta(problem, data, ball, xs[k])
        gap = theta_k - theta_star
        w_dist = problem.domain.norm(w - x_star)
        shift = k + alpha - 2.0
        energy = (2.0 * omega / (alpha - 1.0)) * shift * shift * gap \
            + (alpha - 1.0) * w_dist * w_dist
        states.append(EnergyState(k=k, energy=energy, theta_gap=gap,
                                  w=w, w_dist=w_dist))
    return states


@dataclass
class ConvexityReport:
    samples: int
    min_value: float
    scale: float
    violations: int
    tol: float

    @property
    def passed(self):
        return self.min_value >= -self.tol * self.scale


def convexity_probe(problem, data, samples=200, seed=0, region=None,
                    segment=None, tol=1e-10):
    """Sample the second-order convexity criterion

        ||F'(x) h||^2 + <F(x) - y, F''(x)(h, h)>  >=  0

    at random points of a ball `region` (or along a `segment` (a, b)) with
    random unit directions h.  Reports the minimum sampled value against a
    scale set by the largest sampled magnitude of the two terms.
    """
    if not problem.has_second_deriv:
        raise ValueError(f"{type(problem).__name__} provides no second derivative")
    if (region is None) == (segment is None):
        raise ValueError("provide exactly one of region or segment")
    rng = np.random.default_rng(seed)
    dom = problem.domain
    rng_space = problem.range_space
    y = data.y_noisy

    min_value = math.inf
    scale = 0.0
    violations = 0
    for _ in range(samples):
        if region is not None:
            x = sample_in_ball(region, dom, rng)
        else:
            a, b = segment
            t = rng.uniform()
            x = (1.0 - t) * a + t * b
        h = dom.randn(rng)
        h = h / dom.norm(h)
        jh = problem.deriv(x, h)
        first = rng_space.inner(jh, jh)
        second = rng_space.inner(problem.apply(x) - y,
                                 problem.second_deriv(x, h, h))
        value = first + second
        scale = max(scale, abs(first), abs(second), 1e-300)
        min_value = min(min_value, value)
        if value < -tol * max(scale, 1.0):
            violations += 1
    return ConvexityReport(samples=samples, min_value=min_value, scale=scale,
                           violations=violations, tol=tol)


def _fmt(value):
    if value is None:
        return ""
    return f"{value:.17g}"


def write_diagnostics_csv(path, trace, energies=None):
    """Per-iteration CSV: k, residual, error, energy, theta_gap, w_dist."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "residual", "error", "energy", "theta_gap",
                         "w_dist"])
        for k, rn in enumerate(trace.residual_norms):
            err = trace.error_norms[k] if trace.error_norms else None
            if energies is not None and k < len(energies):
                e = energies[k]
                row = [str(k), _fmt(rn), _fmt(err), _fmt(e.energy),
                       _fmt(e.theta_gap), _fmt(e.w_dist)]
            else:
                row = [str(k), _fmt(rn), _fmt(err), "", "", ""]
            writer.writerow(row)
