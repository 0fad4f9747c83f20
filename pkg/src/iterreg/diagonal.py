"""Nonlinear diagonal operator on a truncated sequence space.

Componentwise map (1-based index n):

    F(x)_n = x_n^2 / n   for n <= m_nonlinear,
    F(x)_n = x_n   / n   for n  > m_nonlinear.

Inverting the data amplifies the n-th component by a factor growing with n,
which makes the truncated problem a standard stand-in for an ill-posed one.
Everything (derivative, adjoint, second derivative, exact inverse) is
available in closed form, so this problem doubles as the main test oracle.
"""

import numpy as np

from .hilbert import EuclideanSpace, as_vector
from .operators import CertifiedRadius, ForwardProblem


class DiagonalProblem(ForwardProblem):
    """Diagonal operator with a quadratic head and a linear tail.

    Parameters
    ----------
    m_nonlinear : int
        Number of leading components mapped through z -> z^2 (0 gives the
        purely linear scaling operator).
    dim : int
        Truncation dimension; must be >= m_nonlinear.
    """

    has_second_deriv = True

    def __init__(self, m_nonlinear=100, dim=200):
        if m_nonlinear < 0:
            raise ValueError("m_nonlinear must be >= 0")
        if dim < max(m_nonlinear, 1):
            raise ValueError("dim must be >= max(m_nonlinear, 1)")
        space = EuclideanSpace(dim)
        super().__init__(space, space)
        self.m_nonlinear = int(m_nonlinear)
        self.dim = int(dim)
        self._scale = 1.0 / np.arange(1, dim + 1, dtype=np.float64)
        self._quad = np.arange(dim) < self.m_nonlinear

    def apply(self, x):
        self._check_domain(x)
        return np.where(self._quad, x * x, x) * self._scale

    def deriv(self, x, h):
        # note the linear tail has slope 1/n, with no extra factor
        self._check_domain(x)
        self._check_domain(h)
        return np.where(self._quad, 2.0 * x * h, h) * self._scale

    def adjoint(self, x, r):
        # diagonal in the Euclidean geometry, hence identical multipliers
        self._check_domain(x)
        self._check_range(r)
        return np.where(self._quad, 2.0 * x * r, r) * self._scale

    def second_deriv(self, x, h, w):
        self._check_domain(h)
        self._check_domain(w)
        return np.where(self._quad, 2.0 * h * w, 0.0) * self._scale

    def invert_data(self, y, branch=1.0):
        """Exact solution of F(x) = y (nonnegative branch on the head)."""
        self._check_range(y)
        n = np.arange(1, self.dim + 1, dtype=np.float64)
        head = branch * np.sqrt(np.clip(y * n, 0.0, None))
        return np.where(self._quad, head, n * y)


def reciprocal_solution(dim, amplitude=100.0):
    """The reference solution profile x_n = amplitude / n."""
    return amplitude / np.arange(1, dim + 1, dtype=np.float64)


def alternating_offset(dim, amplitude, decay=1.0):
    """Sign-alternating perturbation (-1)^n * amplitude / n^decay, n from 1."""
    n = np.arange(1, dim + 1, dtype=np.float64)
    signs = np.where(np.arange(1, dim + 1) % 2 == 0, 1.0, -1.0)
    return signs * amplitude / n ** decay


def convexity_radius(xdag, m_nonlinear, data_norm, delta_bar=0.0):
    """Largest ball radius on which the residual functional stays convex.

    For every nonlinear component the certificate requires

        xdag_n^2 >= 28 * |xdag_n| * rho + delta_bar * (2*data_norm + delta_bar),

    so the best radius is the minimum over n of the closed-form bound.  A
    zero component (or a noise floor exceeding some xdag_n^2) makes the
    certificate infeasible and the result carries rho = 0.
    """
    xdag = as_vector(xdag)
    if m_nonlinear == 0:
        return CertifiedRadius(rho=np.inf, feasible=True, limiting_index=None)
    head = xdag[:m_nonlinear]
    noise_term = delta_bar * (2.0 * data_norm + delta_bar)
    best = np.inf
    best_n = None
    for i, v in enumerate(head):
        if v == 0.0:
            return CertifiedRadius(rho=0.0, feasible=False, limiting_index=i + 1)
        bound = (v * v - noise_term) / (28.0 * abs(v))
        if bound <= 0.0:
            return CertifiedRadius(rho=0.0, feasible=False, limiting_index=i + 1)
        if bound < best:
            best = bound
            best_n = i + 1
    return CertifiedRadius(rho=float(best), feasible=True, limiting_index=best_n)
