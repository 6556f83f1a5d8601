"""Joint rate / codeword-length optimization for a single user.

In the high-SNR regime the frame-error exponent of a design (R, N) is
N * G(beta) with

    beta = log(P u0^2) + (N + 1) log(alpha) - R,
    G(beta) = max_{0 <= rho <= 1} rho * (beta - log(1 + rho)),

so the throughput of the design is

    T(R, N) = R * (1 - exp(-N * G(beta))).

Setting both partial derivatives to zero gives a coupled fixed point for the
optimal (R, N, rho), solved here by damped alternation over N.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable

from scipy.optimize import brentq

from .error_exponent import LinkDesign, pe_upper_bound, theorem1_curve
from .fading_channel import FadingParams

__all__ = [
    "OptimalityInputs",
    "LinkOptimizerError",
    "NoPositiveRate",
    "NonConvergence",
    "BelowOperatingRegime",
    "AccuracyWarning",
    "RhoBranch",
    "RHO_ONE_THRESHOLD",
    "rho_equation",
    "optimal_rho",
    "exponent_gain",
    "beta_value",
    "throughput_at",
    "rho_from_length",
    "optimal_rate",
    "solve_operating_point",
    "integer_operating_point",
    "throughput_closed_form",
    "asymptotic_user_throughput",
]

RHO_ONE_THRESHOLD = math.log(2.0) + 0.5

MAX_OUTER_ITERS = 500
N_TOL = 1e-9
INNER_TOL = 1e-10
DAMPING = 0.5


class LinkOptimizerError(Exception):
    """Base class for operating-point failures."""


class NoPositiveRate(LinkOptimizerError):
    """The optimal design has nonpositive rate: the user cannot be served."""


class NonConvergence(LinkOptimizerError):
    """The fixed-point iteration hit its iteration cap."""


class BelowOperatingRegime(LinkOptimizerError, ValueError):
    """P * u0^2 <= e: the high-SNR optimality system does not apply."""


class AccuracyWarning(UserWarning):
    """An asymptotic formula is evaluated outside its accurate regime."""


class RhoBranch(str, enum.Enum):
    RHO_ONE = "rho_one"
    RHO_SMALL = "rho_small"


@dataclass(frozen=True)
class OptimalityInputs:
    u0: float
    alpha: float
    power: float = 1.0

    def __post_init__(self):
        if not self.u0 > 0:
            raise ValueError(f"u0 must be positive, got {self.u0!r}")
        if not self.power > 0:
            raise ValueError(f"power must be positive, got {self.power!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")

    @property
    def log_snr(self) -> float:
        """log(P u0^2)."""
        return math.log(self.power) + 2.0 * math.log(self.u0)

    @property
    def decay(self) -> float:
        """log(1/alpha), the per-symbol log-decay of the channel gain."""
        return -math.log(self.alpha)


def rho_equation(rho):
    """Left side log(1 + rho) + rho / (1 + rho) of the optimal-rho condition."""
    return math.log1p(rho) + rho / (1.0 + rho)


def optimal_rho(beta: float) -> float:
    """Gallager parameter maximizing rho * (beta - log(1 + rho)) over [0, 1]."""
    if beta <= 0.0:
        return 0.0
    if beta >= RHO_ONE_THRESHOLD:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if rho_equation(mid) < beta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def exponent_gain(beta: float) -> float:
    """G(beta) = max over rho in [0, 1] of rho * (beta - log(1 + rho))."""
    rho = optimal_rho(beta)
    return rho * (beta - math.log1p(rho))


def beta_value(inputs: OptimalityInputs, rate: float, length: float) -> float:
    return inputs.log_snr - (length + 1.0) * inputs.decay - rate


def throughput_at(rate: float, length: float, inputs: OptimalityInputs) -> float:
    """High-SNR throughput R (1 - exp(-N G(beta))) of an arbitrary design."""
    if rate <= 0:
        return 0.0
    g = exponent_gain(beta_value(inputs, rate, length))
    return rate * -math.expm1(-length * g)


def rho_from_length(n: float, alpha: float) -> float:
    """Optimal rho expressed through x = n log(1/alpha): x/(1-x) below 1/2, else 1."""
    if alpha >= 1.0:
        return 0.0
    x = n * -math.log(alpha)
    if x < 0.5:
        return x / (1.0 - x)
    return 1.0


def _rate_residual(rate, inputs, n):
    # stationarity in R: N G(beta) = log(1 + rho N R)
    beta = beta_value(inputs, rate, n)
    rho = optimal_rho(beta)
    return n * rho * (beta - math.log1p(rho)) - math.log1p(rho * n * rate)


def _rate_map(rate, inputs, n):
    base = inputs.log_snr - (n + 1.0) * inputs.decay
    rho = optimal_rho(base - rate)
    if rho == 0.0:
        return 0.0
    return base - math.log1p(rho) - math.log1p(rho * n * rate) / (rho * n)


def optimal_rate(inputs: OptimalityInputs, n: float,
                 max_iters: int = MAX_OUTER_ITERS) -> tuple[float, float, float]:
    """Throughput-maximizing rate for a frozen codeword length n.

    Returns (rate, rho, throughput). The rate equation is iterated with
    damping 0.5; if that leaves the feasible interval or stalls, the
    stationarity residual is bracketed and solved with Brent's method.
    """
    r_max = inputs.log_snr - (n + 1.0) * inputs.decay
    if r_max <= 0:
        raise NoPositiveRate(f"no positive rate at length {n}: log-SNR budget {r_max:.4g}")

    rate = 0.5 * r_max
    converged = False
    for _ in range(max_iters):
        new = _rate_map(rate, inputs, n)
        if not 0.0 < new < r_max:
            break
        new = DAMPING * rate + (1.0 - DAMPING) * new
        if abs(new - rate) <= 1e-12 * max(1.0, rate):
            rate = new
            converged = True
            break
        rate = new
    if not converged:
        # residual > 0 near R = 0 and < 0 just below r_max
        lo = r_max * 1e-12
        hi = r_max * (1.0 - 1e-9)
        try:
            rate = brentq(_rate_residual, lo, hi, args=(inputs, n), xtol=1e-14, rtol=1e-13)
        except ValueError as exc:
            raise NonConvergence(f"rate equation did not converge at length {n}") from exc
    rho = optimal_rho(r_max - rate)
    return rate, rho, throughput_at(rate, n, inputs)


def _inner_length(rho, rate, decay, start):
    # Solve M = sqrt(log(1 + rho M R) / (rho log(1/alpha))) for M > 0.
    if rate <= 0:
        return 0.0
    m = max(start, 1e-6)
    for _ in range(1000):
        new = math.sqrt(math.log1p(rho * m * rate) / (rho * decay))
        if abs(new - m) <= INNER_TOL * max(1.0, m):
            return new
        m = new

    def h(m):
        return rho * decay * m * m - math.log1p(rho * m * rate)

    hi = max(start, 1.0)
    while h(hi) < 0:
        hi *= 2.0
    return brentq(h, 1e-300, hi, xtol=1e-14)


def _quasi_static(inputs, n_cap):
    rate = inputs.log_snr
    if rate <= 0:
        raise NoPositiveRate("log(P u0^2) <= 0")
    return LinkDesign(rate=rate, length=float(n_cap), rho=0.0, power=inputs.power,
                      throughput=rate)


def solve_operating_point(inputs: OptimalityInputs, n_cap: float = 1e4,
                          max_iters: int = MAX_OUTER_ITERS) -> LinkDesign:
    """Jointly optimal (R, N, rho) and throughput for one user, N real-valued.

    Given N, rho follows from N log(1/alpha) and the rate from the stationarity
    condition in R; N is then updated from the stationarity condition in N
    (itself solved by an inner fixed-point iteration) with damping 0.5, starting
    from sqrt(log log(P u0^2) / log(1/alpha)).

    When the stationary length is below one channel use, the length is
    clamped to 1 and only the rate is optimized. ``alpha == 1`` returns the
    quasi-static design rho = 0, R = T = log(P u0^2), N = ``n_cap``.

    Raises:
        BelowOperatingRegime: P u0^2 <= e.
        NoPositiveRate: the optimal rate is not positive.
        NonConvergence: the iteration cap was reached.
    """
    if inputs.alpha == 1.0:
        return _quasi_static(inputs, n_cap)
    big_l = inputs.log_snr
    if big_l <= 1.0:
        raise BelowOperatingRegime(f"P u0^2 = {math.exp(big_l):.4g} <= e")
    c = inputs.decay

    # Iterates are kept at N >= 1; a fixed point pinned at 1 with the update
    # pointing below it means the constraint is active.
    n = max(1.0, math.sqrt(math.log(big_l) / c))
    weight = 1.0 - DAMPING
    last_step = math.inf
    m = n
    for _ in range(max_iters):
        rho = rho_from_length(n, inputs.alpha)
        rate = big_l - (2.0 * n + 1.0) * c - math.log1p(rho)
        m = _inner_length(rho, rate, c, n) if rate > 0 else 0.0
        if abs(m - n) <= N_TOL or (n == 1.0 and m < 1.0):
            break
        new = max(1.0, n + weight * (m - n))
        step = abs(new - n)
        if step > 0.9 * last_step:
            # oscillating or stalled: relax harder
            weight *= 0.5
        last_step = step
        n = new
    else:
        raise NonConvergence(f"length iteration did not converge for {inputs}")

    if n == 1.0 and m < 1.0:
        rate, rho, thr = optimal_rate(inputs, 1.0)
        return LinkDesign(rate=rate, length=1.0, rho=rho, power=inputs.power,
                          throughput=thr)

    rho = rho_from_length(n, inputs.alpha)
    rate = big_l - (2.0 * n + 1.0) * c - math.log1p(rho)
    if rate <= 0:
        raise NoPositiveRate(f"fixed point has rate {rate:.4g} <= 0")
    thr = throughput_closed_form(rate, n, rho, inputs)
    return LinkDesign(rate=rate, length=n, rho=rho, power=inputs.power, throughput=thr)


def integer_operating_point(inputs: OptimalityInputs, relaxed: LinkDesign | None = None,
                            exponent_factory: Callable | None = None) -> LinkDesign:
    """Round the relaxed optimum to an integer codeword length.

    Both integer neighbours of the relaxed N are tried; each gets its own
    optimal rate, and is scored by R (1 - p_e) with p_e from the random-coding
    bound evaluated on ``exponent_factory(n)`` (a rho -> E(rho) callable;
    the closed-form exponent by default). The better neighbour is returned
    with the scored throughput.
    """
    if relaxed is None:
        relaxed = solve_operating_point(inputs)
    if exponent_factory is None:
        params = FadingParams(inputs.alpha)

        def exponent_factory(n):
            return theorem1_curve(inputs.u0, params, n, inputs.power)

    lo = max(1, math.floor(relaxed.length))
    candidates = sorted({lo, max(1, math.ceil(relaxed.length))})
    best = None
    for n in candidates:
        try:
            rate, rho, _ = optimal_rate(inputs, n)
        except NoPositiveRate:
            continue
        probe = LinkDesign(rate=rate, length=n, rho=rho, power=inputs.power, throughput=0.0)
        pe = pe_upper_bound(probe, exponent_factory(n), rho_hint=rho)
        design = LinkDesign(rate=rate, length=n, rho=rho, power=inputs.power,
                            throughput=rate * (1.0 - pe))
        if best is None or design.throughput > best.throughput:
            best = design
    if best is None:
        raise NoPositiveRate("no integer length admits a positive rate")
    return best


def throughput_closed_form(rate, length, rho, inputs: OptimalityInputs,
                           return_flag: bool = False):
    """Throughput at a stationary design,

        (log(P u0^2 / (1 + rho)) + (2N + 1) log(alpha)) * (1 - 1 / (1 + rho N R)).

    Negative values are clamped to 0; with ``return_flag`` the pair
    (value, clamped) is returned.
    """
    head = inputs.log_snr - math.log1p(rho) - (2.0 * length + 1.0) * inputs.decay
    value = head * (1.0 - 1.0 / (1.0 + rho * length * rate))
    clamped = value < 0
    if clamped:
        value = 0.0
    return (value, clamped) if return_flag else value


def asymptotic_user_throughput(inputs: OptimalityInputs, branch) -> float:
    """Leading-order large-u0 throughput of one user.

    ``rho_one``:   log(P u0^2 / 2) - 2 sqrt(log(1/alpha) log log(P u0^2 / 2))
    ``rho_small``: log(P u0^2) - 2 (log(1/alpha) log log(P u0^2))^(1/3)
    """
    branch = RhoBranch(branch)
    if not 0.0 < inputs.alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if inputs.power * inputs.u0 ** 2 < 100:
        warnings.warn("asymptotic throughput used with P u0^2 < 100", AccuracyWarning,
                      stacklevel=2)
    c = inputs.decay
    if branch is RhoBranch.RHO_ONE:
        head = inputs.log_snr - math.log(2.0)
        return head - 2.0 * math.sqrt(c * math.log(head))
    head = inputs.log_snr
    return head - 2.0 * (c * math.log(head)) ** (1.0 / 3.0)
