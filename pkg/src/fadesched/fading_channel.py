"""Time-correlated Rayleigh fading: densities, scaled Bessel function, samplers.

The per-user channel is the complex Gauss-Markov chain

    h_i = alpha * h_{i-1} + sqrt(1 - alpha**2) * w_i,    w_i ~ CN(0, 1),

whose magnitudes u_i = |h_i| form a Markov chain with Rayleigh marginal
2u exp(-u^2) and Rician transition kernel q(u | v).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "FadingParams",
    "ChannelTrace",
    "AlphaDistribution",
    "UniformAlpha",
    "CustomAlpha",
    "i0_scaled",
    "initial_density",
    "transition_density",
    "sample_initial",
    "complex_chain",
    "sample_trace",
    "sample_gains",
]

# Below this argument the power series is used, above it the Hankel expansion.
# At z = 30 the smallest asymptotic term is ~e^-60, far below double precision.
_SERIES_LIMIT = 30.0


@dataclass(frozen=True)
class FadingParams:
    """Gauss-Markov chain parameters for one user."""

    alpha: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")


@dataclass(frozen=True)
class ChannelTrace:
    """Initial magnitude u0 and the per-symbol magnitudes u_1..u_n."""

    u0: float
    gains: np.ndarray

    def __post_init__(self):
        if self.u0 < 0 or np.any(self.gains < 0):
            raise ValueError("fading magnitudes must be nonnegative")

    def __len__(self):
        return len(self.gains)


def _series_scaled(z):
    t = 0.25 * z * z
    term = np.ones_like(z)
    total = np.ones_like(z)
    k = 0
    while True:
        k += 1
        term = term * t / (k * k)
        total = total + term
        if np.all(term <= 1e-17 * total):
            break
    return total * np.exp(-z)


def _asymptotic_scaled(z):
    term = np.ones_like(z)
    total = np.ones_like(z)
    k = 0
    while True:
        k += 1
        term = term * (2 * k - 1) ** 2 / (8.0 * k * z)
        total = total + term
        if np.all(term <= 1e-17 * total):
            break
    return total / np.sqrt(2.0 * np.pi * z)


def i0_scaled(z):
    """Exponentially scaled modified Bessel function ``exp(-z) * I0(z)``.

    Accepts scalars or arrays of nonnegative arguments; returns a float for
    scalar input. Never overflows, so it can be combined with the Gaussian
    factor of the Rician kernel for arbitrarily large arguments.
    """
    arr = np.asarray(z, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("i0_scaled is defined for z >= 0 only")
    flat = arr.reshape(-1)
    out = np.empty_like(flat)
    small = flat < _SERIES_LIMIT
    if np.any(small):
        out[small] = _series_scaled(flat[small])
    if np.any(~small):
        out[~small] = _asymptotic_scaled(flat[~small])
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def initial_density(u):
    """Rayleigh density ``2u exp(-u^2)`` of the frame-start magnitude (0 for u < 0)."""
    u = np.asarray(u, dtype=float)
    out = np.where(u >= 0, 2.0 * u * np.exp(-u * u), 0.0)
    return float(out) if out.ndim == 0 else out


def transition_density(u, v, params: FadingParams):
    """Rician transition kernel q(u | v) of the magnitude chain.

    Evaluated as ``2u/(1-a^2) * exp(-(u - a v)^2/(1-a^2)) * i0_scaled(2 a u v/(1-a^2))``,
    which equals the textbook form but stays finite for large ``u * v``.
    """
    if not isinstance(params, FadingParams):
        params = FadingParams(params)
    a = params.alpha
    s = 1.0 - a * a
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    uc = np.clip(u, 0.0, None)
    vc = np.clip(v, 0.0, None)
    # Module-level lookup keeps i0_scaled patchable for fault-injection checks.
    bessel = i0_scaled(2.0 * a * uc * vc / s)
    val = 2.0 * uc / s * np.exp(-((uc - a * vc) ** 2) / s) * bessel
    out = np.where(u >= 0, val, 0.0)
    return float(out) if out.ndim == 0 else out


def sample_initial(rng: np.random.Generator, size=None):
    """Draw Rayleigh magnitude(s) with density 2u exp(-u^2) by CDF inversion."""
    x = rng.random(size)
    return np.sqrt(-np.log1p(-x))


def complex_chain(h0: complex, n: int, params: FadingParams,
                  rng: np.random.Generator) -> np.ndarray:
    """Complex gains h_1..h_n of h_i = alpha h_(i-1) + sqrt(1 - alpha^2) w_i,
    w_i standard complex Gaussian (unit total variance)."""
    if n < 1:
        raise ValueError("trace length must be >= 1")
    a = params.alpha
    w = rng.standard_normal((n, 2)) @ np.array([1.0, 1.0j]) * math.sqrt((1.0 - a * a) / 2.0)
    h, _ = lfilter([1.0], [1.0, -a], w, zi=np.array([a * complex(h0)]))
    return h


def sample_trace(u0: float, phase0: float | None, n: int, params: FadingParams,
                 rng: np.random.Generator) -> ChannelTrace:
    """Run the complex AR(1) chain for n steps from h_0 = u0 * exp(j*phase0).

    When ``phase0`` is None it is drawn uniformly on [0, 2*pi) from ``rng``.
    """
    if n < 1:
        raise ValueError("trace length must be >= 1")
    if u0 < 0:
        raise ValueError("u0 must be nonnegative")
    if phase0 is None:
        phase0 = rng.uniform(0.0, 2.0 * np.pi)
    h = complex_chain(u0 * complex(math.cos(phase0), math.sin(phase0)), n, params, rng)
    return ChannelTrace(u0=float(u0), gains=np.abs(h))


def sample_gains(u0: float, n: int, alpha: float, rng: np.random.Generator,
                 size: int) -> np.ndarray:
    """Vectorized version of :func:`sample_trace`: ``size`` independent traces.

    Returns an array of shape (size, n). The chain is started from the real
    value u0; magnitudes do not depend on the initial phase.
    """
    if n < 1:
        raise ValueError("trace length must be >= 1")
    scale = math.sqrt((1.0 - alpha * alpha) / 2.0)
    re = np.full(size, float(u0))
    im = np.zeros(size)
    out = np.empty((size, n))
    for i in range(n):
        w = rng.standard_normal((2, size))
        re = alpha * re + scale * w[0]
        im = alpha * im + scale * w[1]
        out[:, i] = np.hypot(re, im)
    return out


class AlphaDistribution:
    """Law of the per-user correlation coefficient on (0, 1)."""

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def cdf(self, a):
        raise NotImplementedError


class UniformAlpha(AlphaDistribution):
    name = "uniform"

    def sample(self, rng, size=None):
        # (0, 1) open: 1 - U with U in [0, 1) excludes 0, and U == 0 has prob 2^-53.
        return 1.0 - rng.random(size)

    def cdf(self, a):
        return np.clip(a, 0.0, 1.0)

    def __repr__(self):
        return "UniformAlpha()"


class CustomAlpha(AlphaDistribution):
    """User-supplied law given by its CDF and, for sampling, its quantile function."""

    name = "custom"

    def __init__(self, cdf: Callable[[float], float],
                 ppf: Callable[[np.ndarray], np.ndarray] | None = None):
        self._cdf = cdf
        self._ppf = ppf
        if cdf(0.0) > 1e-12 or cdf(1.0 - 1e-12) < 1.0 - 1e-9:
            raise ValueError("alpha distribution must put no mass at 0 or 1")

    def cdf(self, a):
        return self._cdf(a)

    def sample(self, rng, size=None):
        if self._ppf is None:
            raise ValueError("sampling a custom alpha law needs its quantile function")
        return self._ppf(rng.random(size))
