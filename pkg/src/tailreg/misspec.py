"""Closed-form consequences of omitting a normal covariate from the tail index.

The true index is ``exp(x'beta + theta * x_star)`` with ``x_star ~ N(mu, sigma^2)``
independent of ``x``; the fitted model drops ``x_star``. The MLE intercept
converges to ``beta_1 - ln E[exp(-theta x_star)]`` and its slope variance is
inflated by ``M``; the OLS slopes stay consistent with variance factor
``A = pi^2/6 + theta^2 sigma^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InputError
from .model import GUMBEL_VARIANCE

__all__ = [
    "OmittedVarSpec",
    "mgf_neg",
    "mle_intercept_limit_shift",
    "mle_intercept_shift_first_order",
    "variance_factor_M",
    "variance_factor_M_closed",
    "variance_factor_A",
    "predicted_slope_rmse_ratio",
    "summary",
]


@dataclass(frozen=True)
class OmittedVarSpec:
    theta: float
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise InputError(f"sigma must be positive, got {self.sigma}")


def _normal_mgf(t: float, spec: OmittedVarSpec) -> float:
    return math.exp(t * spec.mu + 0.5 * t**2 * spec.sigma**2)


def mgf_neg(spec: OmittedVarSpec) -> float:
    """``E[exp(-theta x_star)]``."""
    return _normal_mgf(-spec.theta, spec)


def mle_intercept_limit_shift(spec: OmittedVarSpec) -> float:
    """Pseudo-true MLE intercept minus the true intercept.

    Exact root of the misspecified population score:
    ``-ln E[exp(-theta x_star)] = theta mu - theta^2 sigma^2 / 2``.
    """
    return spec.theta * spec.mu - 0.5 * spec.theta**2 * spec.sigma**2


def mle_intercept_shift_first_order(spec: OmittedVarSpec) -> float:
    """One Newton step from the true value, ``(1 - m) / m`` with ``m = E[exp(-theta x_star)]``.

    Agrees with :func:`mle_intercept_limit_shift` to first order in theta only.
    """
    m = mgf_neg(spec)
    return (1.0 - m) / m


def variance_factor_M(spec: OmittedVarSpec) -> float:
    """Slope variance factor of the MLE under omission."""
    m1 = mgf_neg(spec)
    m2 = _normal_mgf(-2.0 * spec.theta, spec)
    return (1.0 - 2.0 * m1 + 2.0 * m2) / m1**2


def variance_factor_M_closed(spec: OmittedVarSpec) -> float:
    """Expanded normal form of ``M``; equals :func:`variance_factor_M`."""
    t, mu, s2 = spec.theta, spec.mu, spec.sigma**2
    return 2.0 * (math.exp(t**2 * s2) - math.exp(t * mu - 0.5 * t**2 * s2)) + math.exp(t * (2.0 * mu - t * s2))


def variance_factor_A(spec: OmittedVarSpec) -> float:
    return GUMBEL_VARIANCE + spec.theta**2 * spec.sigma**2


def predicted_slope_rmse_ratio(spec: OmittedVarSpec) -> float:
    """Asymptotic rmse(OLS)/rmse(MLE) for the slope coefficients."""
    return math.sqrt(variance_factor_A(spec) / variance_factor_M(spec))


def summary(spec: OmittedVarSpec) -> dict[str, float]:
    return {
        "theta": spec.theta,
        "mu": spec.mu,
        "sigma": spec.sigma,
        "intercept_shift": mle_intercept_limit_shift(spec),
        "intercept_shift_first_order": mle_intercept_shift_first_order(spec),
        "M": variance_factor_M(spec),
        "A": variance_factor_A(spec),
        "ratio": predicted_slope_rmse_ratio(spec),
    }
