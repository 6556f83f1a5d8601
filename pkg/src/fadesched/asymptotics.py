"""Large-K throughput laws of the three strategies and the order statistics
of the correlation coefficient they depend on."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .fading_channel import AlphaDistribution, UniformAlpha
from .link_optimizer import AccuracyWarning

__all__ = [
    "Moment",
    "ScalingLaw",
    "theorem2_value",
    "theorem3_value",
    "theorem4_value",
    "scaling_law",
    "e_log_alpha_max_inv_exact",
    "e_log_alpha_max_inv_approx",
    "alpha_moment",
    "jensen_gap_constant",
]

_DIRECT_SUM_LIMIT = 10**6


def _loglog(x):
    # log log x clamped at 0 where it is negative or undefined
    if x <= math.e:
        return 0.0
    return math.log(math.log(x))


def theorem2_value(k, p: float, e_log_alpha_inv: float) -> float:
    """Strategy I: log(P log K / 2) - 2 sqrt(E[log 1/alpha] log log log K)."""
    log_k = math.log(k)
    return math.log(p * log_k / 2.0) - 2.0 * math.sqrt(e_log_alpha_inv * _loglog(log_k))


def theorem3_value(k, p: float, e_sqrt_log_alpha_inv: float) -> float:
    """Strategy II: log(P log K / 2) - 2 E[sqrt(log 1/alpha)] sqrt(log log(P log K / 2))."""
    head = p * math.log(k) / 2.0
    return math.log(head) - 2.0 * e_sqrt_log_alpha_inv * math.sqrt(_loglog(head))


def theorem4_value(k, p: float) -> float:
    """Strategy III, and the quasi-static maximum: log(P log K)."""
    return math.log(p * math.log(k))


class Moment(str, enum.Enum):
    E_LOG_INV = "E_log_inv"
    E_SQRT_LOG_INV = "E_sqrt_log_inv"
    E_CUBEROOT_LOG_INV = "E_cuberoot_log_inv"


_POWERS = {Moment.E_LOG_INV: 1.0, Moment.E_SQRT_LOG_INV: 0.5,
           Moment.E_CUBEROOT_LOG_INV: 1.0 / 3.0}


def alpha_moment(distribution: AlphaDistribution | str = "uniform", which=Moment.E_LOG_INV) -> float:
    """E[X^p] for X = log(1/alpha), p in {1, 1/2, 1/3}.

    Closed forms Gamma(1 + p) for uniform alpha. For other laws the identity
    E[X^p] = int_0^inf F_alpha(exp(-t^(1/p))) dt is integrated numerically.
    """
    which = Moment(which)
    p = _POWERS[which]
    if isinstance(distribution, str):
        if distribution != "uniform":
            raise ValueError(f"unknown alpha distribution {distribution!r}")
        distribution = UniformAlpha()
    if isinstance(distribution, UniformAlpha):
        return math.gamma(1.0 + p)
    cdf = distribution.cdf
    if cdf(0.0) > 1e-12 or cdf(1.0 - 1e-12) < 1.0 - 1e-9:
        raise ValueError("alpha distribution must put no mass at 0 or 1")
    value, _ = integrate.quad(lambda t: float(cdf(math.exp(-t ** (1.0 / p)))), 0.0, np.inf,
                              epsabs=1e-12, epsrel=1e-10, limit=200)
    return value


def jensen_gap_constant(distribution: AlphaDistribution | str = "uniform") -> float:
    """2 (sqrt(E X) - E sqrt X), the Strategy II-over-I gain per sqrt(log log log K)."""
    return 2.0 * (math.sqrt(alpha_moment(distribution, Moment.E_LOG_INV))
                  - alpha_moment(distribution, Moment.E_SQRT_LOG_INV))


@dataclass(frozen=True)
class ScalingLaw:
    strategy: str
    value_at: Callable[[int, float, float], float]


def scaling_law(strategy: str) -> ScalingLaw:
    """Law for strategy I, II, III or max; ``value_at(K, P, moment)`` where the
    moment is E[log 1/alpha] for I, E[sqrt(log 1/alpha)] for II, unused otherwise."""
    laws = {
        "I": theorem2_value,
        "II": theorem3_value,
        "III": lambda k, p, _m=None: theorem4_value(k, p),
        "max": lambda k, p, _m=None: theorem4_value(k, p),
    }
    if strategy not in laws:
        raise ValueError(f"unknown strategy {strategy!r}")
    return ScalingLaw(strategy, laws[strategy])


def e_log_alpha_max_inv_exact(k: int, theta: float) -> float:
    """E[log 1/alpha_max] over the users with u0^2 >= theta, uniform alpha.

    With q = 1 - exp(-theta) this is

        sum_{n=1..K} (1/n) q^(K-n) - q^K H_K  =  sum_{n=1..K} (1/n) q^(K-n) (1 - q^n),

    evaluated in the second form, whose terms are all nonnegative. Terms with
    q^(K-n) below 1e-300 are skipped. An empty set contributes zero.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not theta > 0:
        raise ValueError("theta must be positive")
    log_q = math.log1p(-math.exp(-theta))
    if k > _DIRECT_SUM_LIMIT:
        # only n close to K matter; q^(K-n) decays geometrically
        span = min(k, int(700.0 / -log_q) + 1)
        n = np.arange(k - span + 1, k + 1, dtype=float)
    else:
        n = np.arange(1, k + 1, dtype=float)
    terms = np.exp((k - n) * log_q) * -np.expm1(n * log_q) / n
    return math.fsum(terms)


def e_log_alpha_max_inv_approx(k: int, theta: float) -> float:
    """Leading-order large-K form 1/(K e^-theta) + exp(-K e^-theta) (theta - log K)."""
    mean_above = k * math.exp(-theta)
    if mean_above < 1.0:
        warnings.warn("approximation used with K exp(-theta) < 1", AccuracyWarning, stacklevel=2)
    return 1.0 / mean_above + math.exp(-mean_above) * (theta - math.log(k))
