"""Stopping rules tying the iteration count to the noise level.

Two variants:

- ``discrepancy``: stop at the first k with  ||F(x_k) - y|| <= tau * delta.
- ``delta_corrected``: stop at the first k >= 1 with

      ||F(x_k) - y||^2 <= 2 (k+alpha-1)^2 / (k (alpha-3)) * D(delta)
                          + tau^2 delta^2,

  where D(delta) = c1*delta + c2*delta^2 collects the noise-propagation
  constants of the energy analysis.  At k = 0 only the plain discrepancy
  clause can fire (the threshold divides by k).
"""

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StoppingRule:
    """Tagged stopping-rule variant with its scalar parameters.

    The rule consumes only (iteration index, residual norm), which keeps it
    independent of problem internals.
    """

    variant: str                  # "discrepancy" | "delta_corrected"
    tau: float
    delta: float
    alpha: float = 3.0
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        if self.variant not in ("discrepancy", "delta_corrected"):
            raise ValueError(f"unknown stopping variant {self.variant!r}")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.variant == "delta_corrected":
            if not self.alpha > 3:
                raise ValueError(
                    "delta_corrected rule requires alpha > 3 "
                    f"(threshold divides by alpha - 3), got {self.alpha}")
            if self.c1 < 0 or self.c2 < 0:
                raise ValueError("c1 and c2 must be nonnegative")
        if self.tau <= 1:
            log.warning("tau = %g <= 1 is outside the stopping theory", self.tau)


def constants_c1_c2(omega_bar, omega, rho):
    """Noise-propagation constants from the derivative bound, step and radius.

        c1 = 2*omega_bar^3*omega*rho + 20*rho*omega_bar
        c2 = 3 + 0.5*omega_bar^4*omega^2 + 0.5*omega*omega_bar^2
    """
    if omega_bar <= 0 or omega <= 0 or rho <= 0:
        raise ValueError("omega_bar, omega and rho must all be positive")
    c1 = 2.0 * omega_bar**3 * omega * rho + 20.0 * rho * omega_bar
    c2 = 3.0 + 0.5 * omega_bar**4 * omega**2 + 0.5 * omega * omega_bar**2
    return c1, c2


def delta_correction(c1, c2, delta):
    """The additive correction D(delta) = c1*delta + c2*delta^2."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    return c1 * delta + c2 * delta**2


def threshold(rule, k):
    """Squared-residual threshold of the rule at iteration k."""
    base = (rule.tau * rule.delta) ** 2
    if rule.variant == "discrepancy" or k == 0:
        return base
    corr = delta_correction(rule.c1, rule.c2, rule.delta)
    shift = k + rule.alpha - 1.0
    return 2.0 * shift * shift / (k * (rule.alpha - 3.0)) * corr + base


def should_stop(rule, k, residual_norm):
    """Whether the rule fires for the residual norm observed at iteration k."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if residual_norm < 0:
        raise ValueError("residual_norm must be >= 0")
    if rule.variant == "discrepancy":
        return residual_norm <= rule.tau * rule.delta
    return residual_norm * residual_norm <= threshold(rule, k)


def kstar_bound(alpha, omega, tau, energy_at_1, delta):
    """Diagnostic ceiling on the stopping index: the positive root of

        k (k - 1) <= 2 (alpha-1) E(1) / (omega (alpha-3) (tau^2-1) delta^2).

    Only defined for tau > 1 and alpha > 3; infinite for exact data.
    """
    if tau <= 1:
        raise ValueError("kstar_bound is undefined for tau <= 1")
    if not alpha > 3:
        raise ValueError("kstar_bound requires alpha > 3")
    if omega <= 0:
        raise ValueError("omega must be positive")
    if energy_at_1 < 0:
        raise ValueError("energy must be nonnegative")
    if delta == 0:
        return np.inf
    bound = (2.0 * (alpha - 1.0) * energy_at_1
             / (omega * (alpha - 3.0) * (tau**2 - 1.0) * delta**2))
    return 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * bound))
