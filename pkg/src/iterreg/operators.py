"""Forward-problem interface and generic operator self-tests.

A :class:`ForwardProblem` bundles the nonlinear map F, the action of its
derivative F'(x), the adjoint action F'(x)^* (taken with respect to the
problem's own domain/range inner products) and, optionally, the second
derivative.  The self-tests below (adjoint identity, finite-difference
derivative check, power-iteration norm bound) work for any implementation.
"""

import numpy as np
from dataclasses import dataclass, field

from .hilbert import DimensionMismatch, EuclideanSpace


class ForwardProblem:
    """Base class for discretized forward operators F: R^n -> R^m.

    Subclasses must be immutable after construction and set

    - ``domain`` / ``range_space``: objects with ``inner``, ``norm``, ``randn``,
      used for all geometry (adjoints, residual norms, sampling),
    - ``domain_dim`` / ``range_dim``: vector lengths.

    ``second_deriv`` is optional; only the convexity diagnostics need it.
    """

    has_second_deriv = False

    def __init__(self, domain, range_space):
        self.domain = domain
        self.range_space = range_space

    @property
    def domain_dim(self):
        return self.domain.dim

    @property
    def range_dim(self):
        return self.range_space.dim

    def apply(self, x):
        raise NotImplementedError

    def deriv(self, x, h):
        """Action of F'(x) on the direction h."""
        raise NotImplementedError

    def adjoint(self, x, r):
        """Action of F'(x)^* on a range element r."""
        raise NotImplementedError

    def second_deriv(self, x, h, w):
        """Action of F''(x) on the pair (h, w); optional."""
        raise NotImplementedError(f"{type(self).__name__} has no second derivative")

    def _check_domain(self, x):
        if len(x) != self.domain_dim:
            raise DimensionMismatch(
                f"expected domain vector of length {self.domain_dim}, got {len(x)}")

    def _check_range(self, r):
        if len(r) != self.range_dim:
            raise DimensionMismatch(
                f"expected range vector of length {self.range_dim}, got {len(r)}")


@dataclass
class ObservedData:
    """Measured right-hand side with its noise bound.

    `delta` bounds the distance (in the problem's range norm) between the
    noise-free data and what was measured; the stopping rules consume it.
    """

    y_noisy: np.ndarray
    delta: float
    y_exact: np.ndarray | None = None

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("noise bound delta must be nonnegative")

    def validate(self, space, slack=1e-12):
        """Check the noise bound against `y_exact` when it is known.

        Allows machine roundoff relative to the data magnitude on top of the
        relative slack on delta (adding a perturbation far below the data
        scale rounds at the data scale, not the perturbation scale).
        """
        if self.y_exact is None:
            return True
        dist = space.norm(self.y_exact - self.y_noisy)
        eps_floor = 1e-14 * space.norm(self.y_exact)
        return dist <= self.delta * (1.0 + slack) + eps_floor


def residual(problem, x, data):
    """F(x) - y^noisy and its range norm."""
    r = problem.apply(x) - data.y_noisy
    return r, problem.range_space.norm(r)


def gradient(problem, x, data):
    """Gradient of the residual functional 0.5*||F(x) - y||^2: F'(x)^*(F(x) - y).

    Note the sign: the Landweber-type update direction is the negative of this.
    """
    r = problem.apply(x) - data.y_noisy
    return problem.adjoint(x, r)


def objective(problem, x, data):
    """Value of the residual functional 0.5*||F(x) - y||^2."""
    _, rn = residual(problem, x, data)
    return 0.5 * rn * rn


@dataclass
class AdjointReport:
    trials: int
    max_rel_violation: float
    tol: float
    failures: list = field(default_factory=list)   # (trial index, violation)

    @property
    def passed(self):
        return self.max_rel_violation <= self.tol


def adjoint_test(problem, trials=100, seed=0, tol=1e-10):
    """Dot-product test: <F'(x)h, w>_Y == <h, F'(x)^*w>_X for random x, h, w.

    Violations are measured relative to 1 + |<F'(x)h, w>|.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = []
    for t in range(trials):
        x = problem.domain.randn(rng)
        h = problem.domain.randn(rng)
        w = problem.range_space.randn(rng)
        lhs = problem.range_space.inner(problem.deriv(x, h), w)
        rhs = problem.domain.inner(h, problem.adjoint(x, w))
        viol = abs(lhs - rhs) / (1.0 + abs(lhs))
        if viol > tol:
            failures.append((t, viol))
        worst = max(worst, viol)
    return AdjointReport(trials=trials, max_rel_violation=worst, tol=tol,
                         failures=failures)


@dataclass
class DerivativeCheckReport:
    steps: tuple
    errors: tuple
    ratios: tuple           # successive error quotients; ~step ratio for C^2 maps

    def is_first_order(self, lo=5.0, hi=20.0):
        return all(lo <= r <= hi for r in self.ratios)


def derivative_check(problem, x, h, steps=(1e-3, 1e-4, 1e-5)):
    """Forward-difference consistency of F'(x)h, reported per step size."""
    fx = problem.apply(x)
    dh = problem.deriv(x, h)
    errors = []
    for eps in steps:
        fd = (problem.apply(x + eps * h) - fx) / eps
        errors.append(problem.range_space.norm(fd - dh))
    ratios = tuple(errors[i] / errors[i + 1] for i in range(len(errors) - 1)
                   if errors[i + 1] > 0)
    return DerivativeCheckReport(steps=tuple(steps), errors=tuple(errors),
                                 ratios=ratios)


def fd_gradient_value(problem, x, h, data, step=None):
    """Central-difference directional derivative of the residual functional."""
    if step is None:
        step = 1e-6 * (1.0 + problem.domain.norm(x))
    up = objective(problem, x + step * h, data)
    dn = objective(problem, x - step * h, data)
    return (up - dn) / (2.0 * step)


def sample_in_ball(ball, space, rng):
    """Uniform-ish sample inside the ball (radial in the space's norm)."""
    direction = space.randn(rng)
    direction = direction / space.norm(direction)
    u = rng.uniform() ** (1.0 / space.dim)
    return ball.center + ball.radius * u * direction


def estimate_operator_bound(problem, region, samples=10, seed=0,
                            power_iters=60, safety=1.1):
    """Upper estimate of sup ||F'(x)|| over the region.

    Runs power iteration on F'(x)^* F'(x) at points sampled inside `region`
    and returns the largest singular-value estimate times `safety`.  The
    sample sequence for a fixed seed is a prefix of any longer run, so the
    estimate is nondecreasing in `samples`.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    dom = problem.domain
    best = 0.0
    for _ in range(samples):
        x = sample_in_ball(region, dom, rng)
        b = dom.randn(rng)
        bn = dom.norm(b)
        if bn == 0.0:
            continue
        b = b / bn
        lam = 0.0
        for _ in range(power_iters):
            jb = problem.deriv(x, b)
            g = problem.adjoint(x, jb)
            lam = dom.inner(b, g)
            gn = dom.norm(g)
            if gn == 0.0:
                lam = 0.0
                break
            b = g / gn
        best = max(best, np.sqrt(max(lam, 0.0)))
    return safety * best


@dataclass(frozen=True)
class CertifiedRadius:
    """Result of a convexity-radius computation: the largest certified ball
    radius, or 0 with `feasible=False` when no positive radius qualifies."""

    rho: float
    feasible: bool
    limiting_index: int | None = None
