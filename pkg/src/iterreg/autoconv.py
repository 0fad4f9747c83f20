"""Periodic auto-convolution operator discretized with hat functions.

The unknown is a 1-periodic function on [0, 1], represented by its nodal
values on the uniform grid i/N, i = 0..N.  Node N duplicates node 0, so a
valid vector always satisfies ``x[0] == x[N]``; the extra entry keeps the
plot-friendly closed-curve representation.  The forward map returns the nodal
values of

    (x * x)(i/N) = integral_0^1 x(i/N - t) x(t) dt,

computed per subinterval with a Gauss rule.  Since both factors are piecewise
linear on the shifted grids, the integrand is piecewise quadratic and the
default 4-point rule integrates it exactly; the whole operator collapses to a
fixed third-order tensor contracted twice with the nodal values.

All geometry (norms, adjoints, projections) uses the L2(0,1) inner product of
the piecewise-linear representatives, i.e. the tridiagonal hat-function mass
matrix, not the plain Euclidean dot product.
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .hilbert import DimensionMismatch
from .operators import ForwardProblem


class HatFunctionSpace:
    """Periodic piecewise-linear functions on a uniform grid, with L2 geometry.

    Vectors carry ``n_intervals + 1`` nodal values with the first and last
    entries identified.  Inner products reduce to the first ``n_intervals``
    values against the circulant mass matrix (h/6) * [1, 4, 1].
    """

    def __init__(self, n_intervals):
        if n_intervals < 3:
            raise ValueError("need at least 3 subintervals")
        n = int(n_intervals)
        self.n_intervals = n
        self.dim = n + 1
        self.h = 1.0 / n
        mass = np.zeros((n, n))
        idx = np.arange(n)
        mass[idx, idx] = 4.0 * self.h / 6.0
        mass[idx, (idx + 1) % n] = self.h / 6.0
        mass[idx, (idx - 1) % n] = self.h / 6.0
        self.mass = mass
        self._mass_cho = cho_factor(mass)
        self.nodes = np.arange(n + 1) / n

    def reduce(self, v):
        return np.asarray(v)[: self.n_intervals]

    def extend(self, vals):
        """Append the duplicated node-0 value to an n_intervals vector."""
        out = np.empty(self.dim)
        out[:-1] = vals
        out[-1] = vals[0]
        return out

    def check_periodic(self, v, tol=1e-12):
        v = np.asarray(v)
        if len(v) != self.dim:
            raise DimensionMismatch(
                f"expected vector of length {self.dim}, got {len(v)}")
        if abs(v[0] - v[-1]) > tol * (1.0 + abs(v[0])):
            raise ValueError("endpoint values differ; vector is not periodic")
        return v

    def inner(self, a, b):
        a = self.reduce(a)
        b = self.reduce(b)
        return float(a @ (self.mass @ b))

    def norm(self, a):
        return float(np.sqrt(max(self.inner(a, a), 0.0)))

    def solve_mass(self, rhs):
        return cho_solve(self._mass_cho, rhs)

    def randn(self, rng):
        return self.extend(rng.standard_normal(self.n_intervals))

    def interpolant(self, v):
        """Callable evaluating the periodic piecewise-linear function."""
        v = self.check_periodic(v)
        n = self.n_intervals

        def fun(t):
            s = np.asarray(t, dtype=np.float64) * n
            j = np.floor(s).astype(int)
            theta = s - j
            j = np.mod(j, n)
            return (1.0 - theta) * v[j] + theta * v[(j + 1) % n]

        return fun


def _gauss_rule(order):
    """Gauss-Legendre points/weights on [0, 1] (weights sum to 1)."""
    xi, wi = np.polynomial.legendre.leggauss(order)
    return (xi + 1.0) / 2.0, wi / 2.0


class AutoconvProblem(ForwardProblem):
    """Discretized periodic auto-convolution F(x) = x * x.

    Parameters
    ----------
    n_intervals : int
        Number of grid subintervals on [0, 1].
    quad_order : int
        Gauss points per subinterval.  4 is exact for the piecewise-quadratic
        integrands this discretization produces; larger orders only re-derive
        the same tensor.
    """

    has_second_deriv = True

    def __init__(self, n_intervals=32, quad_order=4):
        space = HatFunctionSpace(n_intervals)
        super().__init__(space, space)
        if quad_order < 1:
            raise ValueError("quad_order must be >= 1")
        self.n_intervals = space.n_intervals
        self.quad_order = int(quad_order)
        self._tensor = self._build_tensor(space.n_intervals, self.quad_order)

    @staticmethod
    def _build_tensor(n, quad_order):
        """T[i, m, l] with (x*x)(i/n) = sum_{m,l} T[i,m,l] x_m x_l (symmetric)."""
        theta, wq = _gauss_rule(quad_order)
        tensor = np.zeros((n, n, n))
        for j in range(n):
            jp = (j + 1) % n
            for th, w in zip(theta, wq):
                scale = w / n
                # x(t) weights on subinterval j at local coordinate th
                b = np.zeros(n)
                b[j] += 1.0 - th
                b[jp] += th
                for i in range(n):
                    # x(i/n - t) lands in subinterval m at local coordinate 1-th
                    m = (i - j - 1) % n
                    a = np.zeros(n)
                    a[m] += th
                    a[(m + 1) % n] += 1.0 - th
                    tensor[i] += scale * np.outer(a, b)
        return 0.5 * (tensor + tensor.transpose(0, 2, 1))

    def _nodal(self, x):
        return self.domain.check_periodic(x)[: self.n_intervals]

    def apply(self, x):
        xv = self._nodal(x)
        return self.domain.extend(np.einsum("iml,m,l->i", self._tensor, xv, xv))

    def deriv(self, x, h):
        xv = self._nodal(x)
        hv = self._nodal(h)
        return self.domain.extend(
            2.0 * np.einsum("iml,m,l->i", self._tensor, xv, hv))

    def adjoint(self, x, r):
        # adjoint of the Jacobian J with respect to the mass-matrix inner
        # product on both sides: J^T must be sandwiched as M^-1 J^T M
        xv = self._nodal(x)
        rv = self._nodal(r)
        weighted = self.domain.mass @ rv
        jt = 2.0 * np.einsum("iml,l,i->m", self._tensor, xv, weighted)
        return self.domain.extend(self.domain.solve_mass(jt))

    def second_deriv(self, x, h, w):
        hv = self._nodal(h)
        wv = self._nodal(w)
        return self.domain.extend(
            2.0 * np.einsum("iml,m,l->i", self._tensor, hv, wv))

    def convolve(self, u, v):
        """Bilinear convolution of two nodal vectors (same quadrature path)."""
        uv = self._nodal(u)
        vv = self._nodal(v)
        return self.domain.extend(np.einsum("iml,m,l->i", self._tensor, uv, vv))


def dense_autoconv_oracle(space, x, points=4096):
    """Rectangle-rule reference for the autoconvolution of a nodal vector.

    Evaluates the periodic piecewise-linear interpolant on a dense grid and
    integrates directly; independent of the tensor/quadrature pipeline.
    """
    fun = space.interpolant(x)
    t = np.arange(points) / points
    xt = fun(t)
    out = np.empty(space.dim)
    for i, s in enumerate(space.nodes):
        out[i] = np.mean(fun(s - t) * xt)
    out[-1] = out[0]
    return out
