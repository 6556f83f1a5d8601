"""Self-check suite: every fast path against its independent oracle.

``validate()`` returns a report listing each check with its tolerance and
measured value. The ``quick`` variant shrinks sample counts and instance
lists so the whole suite runs in seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, stats

from . import fading_channel
from .asymptotics import e_log_alpha_max_inv_exact, jensen_gap_constant
from .error_exponent import exponent_exact_mc, exponent_theorem1
from .fading_channel import FadingParams, initial_density, sample_gains, transition_density
from .link_optimizer import OptimalityInputs, solve_operating_point
from .oracles import alpha_max_mc_oracle, conditional_cdf, grid_search_throughput

__all__ = ["CheckResult", "ValidationReport", "validate", "DEFAULT_SEED"]

DEFAULT_SEED = 20240601


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float
    passed: bool
    # "le": measured <= tolerance passes; "ge": measured >= tolerance passes
    sense: str = "le"

    def line(self) -> str:
        op = "<=" if self.sense == "le" else ">="
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<44s} measured={self.measured:.6g}  required {op} {self.tolerance:.6g}"


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def format(self) -> str:
        lines = [c.line() for c in self.checks]
        failed = sum(not c.passed for c in self.checks)
        lines.append(f"{len(self.checks) - failed}/{len(self.checks)} checks passed")
        return "\n".join(lines)


def _le(name, measured, tol):
    return CheckResult(name, float(measured), tol, bool(measured <= tol), "le")


def _ge(name, measured, tol):
    return CheckResult(name, float(measured), tol, bool(measured >= tol), "ge")


def check_initial_normalization():
    total, _ = integrate.quad(initial_density, 0.0, np.inf, epsabs=1e-13, epsrel=1e-13)
    return _le("initial density integrates to 1", abs(total - 1.0), 1e-6)


def check_transition_normalization():
    worst = 0.0
    for a in (0.1, 0.5, 0.9):
        params = FadingParams(a)
        for v in (0.5, 1.0, 3.0):
            # mass sits near a*v with spread sqrt(1 - a^2)
            top = a * v + 15.0 * math.sqrt(1.0 - a * a)
            total, _ = integrate.quad(lambda u: transition_density(u, v, params), 0.0, top,
                                      points=[a * v], epsabs=1e-13, epsrel=1e-13, limit=200)
            worst = max(worst, abs(total - 1.0))
    return _le("transition density integrates to 1", worst, 1e-6)


def check_bessel_asymptote():
    z = 1e4
    value = fading_channel.i0_scaled(z) * math.sqrt(2.0 * math.pi * z)
    return _le("scaled Bessel large-z identity at z=1e4", abs(value - 1.0), 1e-4)


def check_sampler_fit(rng, samples):
    u0, alpha = 1.5, 0.8
    params = FadingParams(alpha)
    draws = sample_gains(u0, 1, alpha, rng, samples)[:, 0]
    top = alpha * u0 + 15.0 * math.sqrt(1.0 - alpha * alpha)
    cdf = conditional_cdf(lambda u: transition_density(u, u0, params), top)
    p_value = stats.kstest(draws, cdf).pvalue
    return _ge(f"sampler vs transition density (KS p, n={samples})", p_value, 0.01)


def check_exponent_vs_mc(rng, samples):
    # slow fading keeps u0^2 alpha^(2n) large, where the closed form is accurate
    params = FadingParams(0.99)
    mc = exponent_exact_mc(1.0, 20.0, params, 20, 1.0, samples, rng)
    closed = exponent_theorem1(1.0, 20.0, params, 20, 1.0).value
    allowed = max(3.0 * mc.std_error, 0.05 * abs(closed))
    # reported as |diff| / allowed so the tolerance is 1
    return _le("closed-form exponent vs Monte Carlo", abs(mc.value - closed) / allowed, 1.0)


def check_fixed_point_vs_grid(rng, instances):
    worst = math.inf
    for _ in range(instances):
        u0 = math.sqrt(10.0 ** rng.uniform(2.0, 6.0))
        alpha = rng.uniform(0.5, 0.995)
        inputs = OptimalityInputs(u0, alpha)
        solved = solve_operating_point(inputs).throughput
        grid, _, _ = grid_search_throughput(inputs.log_snr, alpha)
        worst = min(worst, solved / grid)
    return _ge(f"fixed point vs grid search ({instances} instances)", worst, 0.99)


def check_alpha_max_vs_mc(rng, trials):
    worst = 0.0
    for k, theta in ((50, 2.0), (200, 3.0)):
        mean, se = alpha_max_mc_oracle(k, theta, trials, rng)
        worst = max(worst, abs(e_log_alpha_max_inv_exact(k, theta) - mean) / se)
    return _le("E[log 1/alpha_max] vs Monte Carlo (z-score)", worst, 3.0)


def check_jensen_constant():
    return _le("Strategy II-over-I gain constant", abs(jensen_gap_constant() - 0.2276), 1e-3)


def validate(quick: bool = True, seed: int = DEFAULT_SEED) -> ValidationReport:
    rng = np.random.default_rng(seed)
    if quick:
        samples, mc, instances, trials = 20_000, 20_000, 5, 100_000
    else:
        samples, mc, instances, trials = 100_000, 100_000, 50, 1_000_000
    checks: list[Callable[[], CheckResult]] = [
        check_initial_normalization,
        check_transition_normalization,
        check_bessel_asymptote,
        lambda: check_sampler_fit(rng, samples),
        lambda: check_exponent_vs_mc(rng, mc),
        lambda: check_fixed_point_vs_grid(rng, instances),
        lambda: check_alpha_max_vs_mc(rng, trials),
        check_jensen_constant,
    ]
    return ValidationReport(tuple(c() for c in checks))
