"""Random-coding error exponent of the correlated fading channel and the
resulting frame-error bound and throughput.

Two routes to the exponent E(rho) are provided: a Monte-Carlo estimate of the
exact expectation over fading traces conditioned on the frame-start gain u0,
and the high-SNR closed form in which the gain decays deterministically as
u0 * alpha**i.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .fading_channel import FadingParams, sample_gains

__all__ = [
    "LinkDesign",
    "ExponentMethod",
    "ExponentEstimate",
    "MIN_MC_SAMPLES",
    "exponent_exact_mc",
    "exponent_curve_mc",
    "exponent_theorem1",
    "theorem1_curve",
    "pe_upper_bound",
    "frame_throughput",
    "golden_section_max",
]

MIN_MC_SAMPLES = 1000
_BLOCK = 20_000
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class LinkDesign:
    """Operating point of one link: rate (nats/use), codeword length, Gallager
    parameter, transmit power, and the throughput it achieves.

    ``length`` is a float so that the relaxed (real-valued) optimum can be
    carried; integer designs simply hold integral values.
    """

    rate: float
    length: float
    rho: float
    power: float
    throughput: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate!r}")
        if not self.length >= 1:
            raise ValueError(f"length must be >= 1, got {self.length!r}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho!r}")
        if not self.power > 0:
            raise ValueError(f"power must be positive, got {self.power!r}")
        if not 0.0 <= self.throughput <= self.rate * (1 + 1e-12):
            raise ValueError(
                f"throughput {self.throughput!r} outside [0, rate={self.rate!r}]")


class ExponentMethod(str, enum.Enum):
    EXACT_MC = "exact_mc"
    THEOREM1 = "theorem1"


@dataclass(frozen=True)
class ExponentEstimate:
    value: float
    std_error: float
    method: ExponentMethod
    # Set by the closed form when u0 is too small for the high-SNR expansion.
    low_accuracy: bool = False

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be nonnegative")
        if self.method is ExponentMethod.THEOREM1 and self.std_error != 0:
            raise ValueError("closed-form estimates carry no sampling error")


def _check_rho(rho):
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho!r}")


def _log_weights(u_sq, rho, power):
    # log prod_i (1 + P u_i^2 / (1 + rho))^(-rho), one value per trace
    return -rho * np.log1p((power / (1.0 + rho)) * u_sq).sum(axis=1)


def _merge_moments(parts):
    """Combine per-block (count, logsumexp(w), logsumexp(2w)) triples."""
    count = sum(p[0] for p in parts)
    lse1 = logsumexp([p[1] for p in parts])
    lse2 = logsumexp([p[2] for p in parts])
    return count, lse1, lse2


def _estimate_from_moments(count, lse1, lse2, n):
    log_mean = lse1 - math.log(count)
    # relative second moment E[w^2] / E[w]^2
    ratio = math.exp(lse2 - 2.0 * lse1 + math.log(count))
    var_rel = max(ratio - 1.0, 0.0) * count / (count - 1)
    se_log = math.sqrt(var_rel / count)
    return -log_mean / n, se_log / n


def exponent_exact_mc(rho: float, u0: float, params: FadingParams, n: int,
                      power: float, samples: int,
                      rng: np.random.Generator) -> ExponentEstimate:
    """Monte-Carlo estimate of

        E(rho) = -(1/n) log E[ prod_i (1 + P u_i^2 / (1 + rho))^(-rho) | u0 ]

    over traces of the Gauss-Markov chain started at u0. The mean is
    accumulated in the log domain block by block; the standard error comes
    from the delta method applied to the log of the sample mean.
    """
    _check_rho(rho)
    if samples < MIN_MC_SAMPLES:
        raise ValueError(
            f"need at least {MIN_MC_SAMPLES} samples for a reliable std_error, got {samples}")
    if n < 1:
        raise ValueError("codeword length must be >= 1")
    if power < 0:
        raise ValueError("power must be nonnegative")
    if rho == 0.0 or power == 0.0:
        return ExponentEstimate(0.0, 0.0, ExponentMethod.EXACT_MC)

    parts = []
    remaining = samples
    while remaining > 0:
        m = min(_BLOCK, remaining)
        u = sample_gains(u0, n, params.alpha, rng, m)
        lw = _log_weights(u * u, rho, power)
        parts.append((m, logsumexp(lw), logsumexp(2.0 * lw)))
        remaining -= m
    value, se = _estimate_from_moments(*_merge_moments(parts), n)
    return ExponentEstimate(float(value), float(se), ExponentMethod.EXACT_MC)


def exponent_curve_mc(u0: float, params: FadingParams, n: int, power: float,
                      samples: int, rng: np.random.Generator) -> Callable[[float], float]:
    """Return rho -> E(rho) estimated on one fixed set of sampled traces.

    Reusing the traces for every rho makes the curve smooth in rho, which the
    bound minimization relies on.
    """
    if samples < MIN_MC_SAMPLES:
        raise ValueError(f"need at least {MIN_MC_SAMPLES} samples, got {samples}")
    u_sq = sample_gains(u0, n, params.alpha, rng, samples) ** 2

    def exponent_at(rho):
        if rho == 0.0:
            return 0.0
        lw = _log_weights(u_sq, rho, power)
        return -(logsumexp(lw) - math.log(samples)) / n

    return exponent_at


def exponent_theorem1(rho: float, u0: float, params: FadingParams, n: int,
                      power: float) -> ExponentEstimate:
    """High-SNR exponent ``(1/n) sum_i rho log(1 + P u0^2 alpha^(2i) / (1 + rho))``.

    The O(1/sqrt(u0)) and O(exp(-u0^2)) corrections are not modeled; the
    result is flagged ``low_accuracy`` when u0 < 3.
    """
    _check_rho(rho)
    if not isinstance(params, FadingParams):
        params = FadingParams(params)
    if n < 1:
        raise ValueError("codeword length must be >= 1")
    i = np.arange(1, int(n) + 1)
    snr = power * u0 * u0 * np.exp(2.0 * i * math.log(params.alpha))
    value = float(np.mean(rho * np.log1p(snr / (1.0 + rho))))
    return ExponentEstimate(value, 0.0, ExponentMethod.THEOREM1, low_accuracy=u0 < 3)


def theorem1_curve(u0: float, params: FadingParams, n: int,
                   power: float) -> Callable[[float], float]:
    """rho -> closed-form exponent, precomputing the per-symbol SNR profile."""
    i = np.arange(1, int(n) + 1)
    snr = power * u0 * u0 * np.exp(2.0 * i * math.log(params.alpha))

    def exponent_at(rho):
        return float(np.mean(rho * np.log1p(snr / (1.0 + rho))))

    return exponent_at


def golden_section_max(f: Callable[[float], float], lo: float = 0.0,
                       hi: float = 1.0, tol: float = 1e-12) -> tuple[float, float]:
    """Maximize a unimodal f on [lo, hi]; returns (argmax, max)."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def pe_upper_bound(design: LinkDesign, exponent_at: Callable[[float], float],
                   rho_hint: float | None = None) -> float:
    """Random-coding bound ``min(1, inf_rho exp(-N (E(rho) - rho R)))``.

    E(rho) - rho R is concave in rho, so a golden-section search on [0, 1]
    finds the infimum; the endpoints and an optional closed-form candidate
    ``rho_hint`` are also evaluated and the best one kept.
    """
    rate = design.rate

    def gap(rho):
        return exponent_at(rho) - rho * rate

    _, best = golden_section_max(gap)
    candidates = [0.0, gap(1.0)]
    if rho_hint is not None:
        candidates.append(gap(min(max(rho_hint, 0.0), 1.0)))
    best = max(best, *candidates)
    return min(1.0, math.exp(-design.length * best))


def frame_throughput(design: LinkDesign, pe: float) -> float:
    """Delivered rate per channel use, ``R * (1 - pe)``."""
    if not 0.0 <= pe <= 1.0:
        raise ValueError(f"pe must lie in [0, 1], got {pe!r}")
    return design.rate * (1.0 - pe)
