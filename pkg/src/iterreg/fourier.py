"""Real trigonometric coefficients of periodic grid functions.

Basis convention (orthonormal in L2(0,1)): index 0 is the constant, positive
index k is sqrt(2)*sin(2*pi*k*t) and negative index -k is sqrt(2)*cos(2*pi*k*t).
Coefficients are extracted from nodal samples by the discrete transform, which
recovers band-limited functions exactly as long as every requested mode stays
strictly below the grid Nyquist frequency.
"""

import numpy as np

from .operators import CertifiedRadius


class AliasingError(ValueError):
    """Requested modes cannot be resolved on the grid."""


def basis_function(k, t):
    t = np.asarray(t, dtype=np.float64)
    if k == 0:
        return np.ones_like(t)
    if k > 0:
        return np.sqrt(2.0) * np.sin(2.0 * np.pi * k * t)
    return np.sqrt(2.0) * np.cos(2.0 * np.pi * (-k) * t)


def max_resolvable_mode(n_intervals):
    return (n_intervals - 1) // 2


def analyze(x, kmax):
    """Coefficients {k: c_k} for |k| <= kmax from the nodal values of `x`.

    `x` carries n+1 periodic nodal values (last duplicates first).
    """
    x = np.asarray(x, dtype=np.float64)
    n = len(x) - 1
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    if kmax > max_resolvable_mode(n):
        raise AliasingError(
            f"mode {kmax} aliases on a grid with {n} subintervals "
            f"(max resolvable mode is {max_resolvable_mode(n)})")
    vals = x[:n]
    t = np.arange(n) / n
    # discrete orthonormality: (1/n) sum_j e_k(t_j) e_l(t_j) = delta_kl
    # for all |k|, |l| strictly below n/2
    coeffs = {0: float(np.mean(vals))}
    for k in range(1, kmax + 1):
        coeffs[k] = float(np.mean(vals * basis_function(k, t)))
        coeffs[-k] = float(np.mean(vals * basis_function(-k, t)))
    return coeffs


def synthesize(coeffs, n_intervals):
    """Nodal values (length n_intervals + 1) of sum_k c_k e_k."""
    n = int(n_intervals)
    for k in coeffs:
        if abs(k) > max_resolvable_mode(n):
            raise AliasingError(
                f"mode {k} aliases on a grid with {n} subintervals")
    t = np.arange(n) / n
    vals = np.zeros(n)
    for k, c in coeffs.items():
        vals += c * basis_function(k, t)
    out = np.empty(n + 1)
    out[:-1] = vals
    out[-1] = vals[0]
    return out


def convexity_radius(xdag_coeffs, data_norm, delta_bar=0.0):
    """Largest certified convexity radius from the solution's coefficients.

    Same closed form as the diagonal case, evaluated over the (finite,
    nonzero) coefficient support of the reference solution.
    """
    if not xdag_coeffs:
        raise ValueError("coefficient support must be nonempty")
    noise_term = delta_bar * (2.0 * data_norm + delta_bar)
    best = np.inf
    best_k = None
    for k, v in xdag_coeffs.items():
        if v == 0.0:
            return CertifiedRadius(rho=0.0, feasible=False, limiting_index=k)
        bound = (v * v - noise_term) / (28.0 * abs(v))
        if bound <= 0.0:
            return CertifiedRadius(rho=0.0, feasible=False, limiting_index=k)
        if bound < best:
            best = bound
            best_k = k
    return CertifiedRadius(rho=float(best), feasible=True, limiting_index=best_k)
