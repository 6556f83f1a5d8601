"""User-selection strategies for one frame.

Every strategy sees only the population snapshot (u0 and alpha per user) and
is a deterministic function of it.

* Strategy I   - largest u0, common fixed codeword length, rate adapted.
* Strategy II  - largest u0, rate and length optimized for that user.
* Strategy III - among users with u0^2 above a threshold, largest alpha;
                 rate and length optimized.
* Reference    - the user whose optimized throughput is largest.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .error_exponent import LinkDesign
from .fading_channel import AlphaDistribution, UniformAlpha, sample_initial
from .link_optimizer import (
    LinkOptimizerError,
    OptimalityInputs,
    optimal_rate,
    solve_operating_point,
)

__all__ = [
    "Strategy",
    "UserState",
    "Population",
    "ScheduleOutcome",
    "user_design",
    "strategy1_codeword_length",
    "strategy3_threshold",
    "schedule_strategy1",
    "schedule_strategy2",
    "schedule_strategy3",
    "schedule_reference",
    "empirical_codeword_length",
]


class Strategy(str, enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    REFERENCE = "optimal-reference"


@dataclass(frozen=True)
class UserState:
    id: int
    u0: float
    alpha: float

    def __post_init__(self):
        if self.u0 < 0:
            raise ValueError(f"u0 must be nonnegative, got {self.u0!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")


@dataclass(frozen=True)
class Population:
    users: tuple[UserState, ...]
    power: float = 1.0
    _ids: np.ndarray = field(init=False, repr=False, compare=False)
    _u0: np.ndarray = field(init=False, repr=False, compare=False)
    _alpha: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        users = tuple(self.users)
        if not users:
            raise ValueError("population must be nonempty")
        if not self.power > 0:
            raise ValueError("power must be positive")
        ids = np.array([u.id for u in users])
        if len(np.unique(ids)) != len(ids):
            raise ValueError("user ids must be unique")
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "_ids", ids)
        object.__setattr__(self, "_u0", np.array([u.u0 for u in users], dtype=float))
        object.__setattr__(self, "_alpha", np.array([u.alpha for u in users], dtype=float))

    @classmethod
    def from_arrays(cls, u0, alpha, power=1.0, ids=None):
        u0 = np.asarray(u0, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        if ids is None:
            ids = range(len(u0))
        users = tuple(UserState(int(i), float(u), float(a)) for i, u, a in zip(ids, u0, alpha))
        return cls(users, power)

    @classmethod
    def draw(cls, k_users: int, rng: np.random.Generator, power: float = 1.0,
             alpha_dist: AlphaDistribution | None = None):
        """K users with Rayleigh u0 and alpha from ``alpha_dist`` (uniform default)."""
        alpha_dist = alpha_dist or UniformAlpha()
        u0 = sample_initial(rng, k_users)
        alpha = alpha_dist.sample(rng, k_users)
        return cls.from_arrays(u0, alpha, power)

    def __len__(self):
        return len(self.users)

    @property
    def u0(self) -> np.ndarray:
        return self._u0

    @property
    def alpha(self) -> np.ndarray:
        return self._alpha

    @property
    def ids(self) -> np.ndarray:
        return self._ids

    def user(self, user_id: int) -> UserState:
        return self.users[int(np.flatnonzero(self._ids == user_id)[0])]


@dataclass(frozen=True)
class ScheduleOutcome:
    """Chosen user and its design. ``design`` is None when the user admits no
    positive rate; the frame is then wasted and ``throughput`` is 0."""

    chosen_id: int
    design: LinkDesign | None
    strategy: Strategy
    fallback_used: bool = False

    @property
    def throughput(self) -> float:
        return 0.0 if self.design is None else self.design.throughput


def user_design(user: UserState, power: float, fixed_n: int | None = None) -> LinkDesign | None:
    """Design for one user, or None when no positive-rate design exists.

    With ``fixed_n`` only the rate is adapted; otherwise rate and length are
    jointly optimized. Users with P u0^2 <= e are outside the high-SNR model
    and are treated as unservable by both paths alike.
    """
    if user.u0 == 0 or power * user.u0 ** 2 <= math.e:
        return None
    inputs = OptimalityInputs(user.u0, user.alpha, power)
    try:
        if fixed_n is None:
            return solve_operating_point(inputs)
        rate, rho, thr = optimal_rate(inputs, fixed_n)
        return LinkDesign(rate=rate, length=float(fixed_n), rho=rho, power=power,
                          throughput=thr)
    except LinkOptimizerError:
        return None


def _argmax_lowest_id(values, ids):
    best = values.max()
    return int(ids[values == best].min())


def strategy1_codeword_length(k_users: int, mean_log_alpha_inv: float) -> int:
    """Common codeword length round(sqrt(log log log K / E[log 1/alpha])), at least 1."""
    if k_users < 16:
        return 1
    lll = math.log(math.log(math.log(k_users)))
    return max(1, round(math.sqrt(lll / mean_log_alpha_inv)))


def strategy3_threshold(k_users: int) -> float:
    """Feedback threshold on u0^2: log K - log log K - log log log K,
    floored at log(K) / 2."""
    if k_users < 16:
        raise ValueError("the threshold rule needs K >= 16")
    log_k = math.log(k_users)
    theta = log_k - math.log(log_k) - math.log(math.log(log_k))
    return max(theta, 0.5 * log_k)


def schedule_strategy1(pop: Population, fixed_n: int) -> ScheduleOutcome:
    chosen = _argmax_lowest_id(pop.u0, pop.ids)
    design = user_design(pop.user(chosen), pop.power, fixed_n=fixed_n)
    return ScheduleOutcome(chosen, design, Strategy.I)


def schedule_strategy2(pop: Population) -> ScheduleOutcome:
    chosen = _argmax_lowest_id(pop.u0, pop.ids)
    design = user_design(pop.user(chosen), pop.power)
    return ScheduleOutcome(chosen, design, Strategy.II)


def schedule_strategy3(pop: Population, theta: float) -> ScheduleOutcome:
    """Most correlated user among those with u0^2 >= theta.

    If nobody clears the threshold the frame falls back to Strategy II and
    the outcome is marked ``fallback_used``.
    """
    above = pop.u0 ** 2 >= theta
    if not above.any():
        fallback = schedule_strategy2(pop)
        return ScheduleOutcome(fallback.chosen_id, fallback.design, Strategy.III,
                               fallback_used=True)
    chosen = _argmax_lowest_id(pop.alpha[above], pop.ids[above])
    design = user_design(pop.user(chosen), pop.power)
    return ScheduleOutcome(chosen, design, Strategy.III)


def schedule_reference(pop: Population) -> ScheduleOutcome:
    """Serve the user with the largest optimized throughput.

    Users are visited in decreasing u0; since a user's throughput never
    exceeds log(P u0^2), the scan stops once that bound falls below the
    best throughput found.
    """
    order = np.lexsort((pop.ids, -pop.u0))
    best_id, best_design, best_thr = int(pop.ids[order[0]]), None, 0.0
    for idx in order:
        u0 = pop.u0[idx]
        if u0 == 0 or math.log(pop.power * u0 * u0) < best_thr:
            break
        uid = int(pop.ids[idx])
        design = user_design(pop.users[idx], pop.power)
        if design is None:
            continue
        thr = design.throughput
        if thr > best_thr or (thr == best_thr and best_design is not None and uid < best_id):
            best_id, best_design, best_thr = uid, design, thr
    return ScheduleOutcome(best_id, best_design, Strategy.REFERENCE)


def empirical_codeword_length(k_users: int, rng: np.random.Generator, power: float = 1.0,
                              alpha_dist: AlphaDistribution | None = None,
                              trials: int = 200, n_max: int = 50) -> int:
    """Grid-search the common Strategy-I length over 1..n_max by simulation.

    Selection under Strategy I does not depend on N, so each population is
    reduced to its strongest user once and every N is scored on the same draws.
    """
    alpha_dist = alpha_dist or UniformAlpha()
    chosen = []
    for _ in range(trials):
        pop = Population.draw(k_users, rng, power, alpha_dist)
        chosen.append(pop.user(_argmax_lowest_id(pop.u0, pop.ids)))
    best_n, best_mean = 1, -1.0
    for n in range(1, n_max + 1):
        total = math.fsum(
            (d.throughput if (d := user_design(u, power, fixed_n=n)) else 0.0) for u in chosen)
        if total / trials > best_mean:
            best_n, best_mean = n, total / trials
    return best_n
