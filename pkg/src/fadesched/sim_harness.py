"""Seeded Monte-Carlo sweeps over the number of users.

Each (K, trial) pair is an independent work unit with its own random stream,

    np.random.default_rng(SeedSequence(seed, spawn_key=(K, trial)))

so results do not depend on how units are distributed over workers. The
Strategy-I length search (``strategy1_length = empirical``) uses the stream
``spawn_key=(K, trials)``, which no trial uses. Per-trial records are kept
and reduced with ``math.fsum`` in trial order.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import (
    Moment,
    alpha_moment,
    theorem2_value,
    theorem3_value,
    theorem4_value,
)
from .error_exponent import (
    ExponentMethod,
    exponent_curve_mc,
    frame_throughput,
    pe_upper_bound,
    theorem1_curve,
)
from .fading_channel import FadingParams, UniformAlpha
from .link_optimizer import LinkOptimizerError, OptimalityInputs, integer_operating_point
from .scheduler import (
    Population,
    ScheduleOutcome,
    Strategy,
    empirical_codeword_length,
    schedule_reference,
    schedule_strategy1,
    schedule_strategy2,
    schedule_strategy3,
    strategy1_codeword_length,
    strategy3_threshold,
)

__all__ = [
    "ConfigError",
    "SweepConfig",
    "SweepRow",
    "SweepResult",
    "TrialRecord",
    "CSV_HEADER",
    "WORKERS_ENV",
    "parse_config",
    "load_config",
    "run_sweep",
    "realized_throughput",
]

CSV_HEADER = ("k", "strategy", "mean_throughput", "stderr", "mean_u0sq", "mean_alpha",
              "fallback_rate", "law_value", "gap")
WORKERS_ENV = "FADESCHED_WORKERS"
_SEED_LIMIT = 2**64
_ALPHA_LAWS = {"uniform": UniformAlpha}


class ConfigError(ValueError):
    """Invalid sweep configuration."""


@dataclass(frozen=True)
class SweepConfig:
    k_values: tuple[int, ...]
    power: float = 1.0
    trials: int = 100
    strategies: tuple[str, ...] = ("I", "II", "III")
    seed: int = 0
    alpha_distribution: str = "uniform"
    exponent_mode: str = "theorem1"
    mc_samples: int = 2000
    # "formula": round(sqrt(logloglog K / E[log 1/alpha])); "empirical": grid search
    strategy1_length: str = "formula"

    def __post_init__(self):
        ks = tuple(self.k_values)
        if not ks:
            raise ConfigError("k_values must be nonempty")
        if any(not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 1 for k in ks):
            raise ConfigError(f"k_values must be positive integers, got {ks!r}")
        if list(ks) != sorted(ks):
            raise ConfigError("k_values must be sorted ascending")
        object.__setattr__(self, "k_values", tuple(int(k) for k in ks))
        if not (isinstance(self.power, (int, float)) and self.power > 0 and math.isfinite(self.power)):
            raise ConfigError(f"power must be positive, got {self.power!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        strategies = tuple(self.strategies)
        if not strategies:
            raise ConfigError("strategies must be nonempty")
        for s in strategies:
            try:
                Strategy(s)
            except ValueError:
                raise ConfigError(f"unknown strategy {s!r}") from None
        if len(set(strategies)) != len(strategies):
            raise ConfigError("strategies must not repeat")
        object.__setattr__(self, "strategies", strategies)
        if not isinstance(self.seed, int) or not 0 <= self.seed < _SEED_LIMIT:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.alpha_distribution not in _ALPHA_LAWS:
            raise ConfigError(f"unknown alpha_distribution {self.alpha_distribution!r}")
        try:
            ExponentMethod(self.exponent_mode)
        except ValueError:
            raise ConfigError(f"unknown exponent_mode {self.exponent_mode!r}") from None
        if not isinstance(self.mc_samples, int) or self.mc_samples < 1000:
            raise ConfigError("mc_samples must be an integer >= 1000")
        if self.strategy1_length not in ("formula", "empirical"):
            raise ConfigError(f"unknown strategy1_length {self.strategy1_length!r}")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["k_values"] = list(self.k_values)
        d["strategies"] = list(self.strategies)
        return d


def _parse_int(text):
    value = float(text) if any(c in text for c in ".eE") else int(text)
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError(f"not an integer: {text!r}")
        value = int(value)
    return value


def _split(text):
    return [t.strip() for t in text.split(",") if t.strip()]


_PARSERS = {
    "k_values": lambda v: tuple(_parse_int(t) for t in _split(v)),
    "power": float,
    "trials": _parse_int,
    "strategies": lambda v: tuple(_split(v)),
    "seed": int,
    "alpha_distribution": str.strip,
    "exponent_mode": str.strip,
    "mc_samples": _parse_int,
    "strategy1_length": str.strip,
}
assert set(_PARSERS) == {f.name for f in dataclasses.fields(SweepConfig)}


def parse_config(text: str) -> SweepConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment. Lists are
    comma-separated. Unknown or repeated keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](value.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    if "k_values" not in values:
        raise ConfigError("k_values is required")
    return SweepConfig(**values)


def load_config(path) -> SweepConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


@dataclass(frozen=True)
class TrialRecord:
    k: int
    trial: int
    strategy: str
    throughput: float
    u0sq: float
    alpha: float
    fallback: bool


@dataclass(frozen=True)
class SweepRow:
    k: int
    strategy: str
    mean_throughput: float
    stderr: float
    mean_u0sq: float
    mean_alpha: float
    fallback_rate: float
    law_value: float
    gap: float

    def as_tuple(self):
        return tuple(getattr(self, name) for name in CSV_HEADER)


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % x


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    rows: tuple[SweepRow, ...]
    records: tuple[TrialRecord, ...] = field(repr=False, default=())

    def row(self, k: int, strategy: str) -> SweepRow:
        for r in self.rows:
            if r.k == k and r.strategy == strategy:
                return r
        raise KeyError((k, strategy))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow([_fmt(v) for v in r.as_tuple()])
        return buf.getvalue()

    def to_json(self) -> str:
        def clean(v):
            return None if isinstance(v, float) and not math.isfinite(v) else v

        return json.dumps({
            "seed": self.config.seed,
            "config": self.config.to_dict(),
            "rows": [{name: clean(getattr(r, name)) for name in CSV_HEADER} for r in self.rows],
        }, indent=2)


def _trial_rng(seed, k, trial):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k, trial)))


def realized_throughput(outcome: ScheduleOutcome, u0: float, alpha: float, power: float,
                        mode: str = "theorem1", mc_samples: int = 2000,
                        rng: np.random.Generator | None = None) -> float:
    """R (1 - p_e) of the chosen user at an integer codeword length, with p_e
    from the random-coding bound on the configured exponent.

    Strategy I already carries an integer length; the other strategies have
    their relaxed optimum rounded by ``integer_operating_point``.
    """
    design = outcome.design
    if design is None:
        return 0.0
    params = FadingParams(alpha)
    if ExponentMethod(mode) is ExponentMethod.EXACT_MC:
        if rng is None:
            raise ValueError("exact_mc mode needs an rng")

        def factory(n):
            return exponent_curve_mc(u0, params, int(n), power, mc_samples, rng)
    else:
        def factory(n):
            return theorem1_curve(u0, params, int(n), power)

    if outcome.strategy is Strategy.I:
        pe = pe_upper_bound(design, factory(design.length), rho_hint=design.rho)
        return frame_throughput(design, pe)
    inputs = OptimalityInputs(u0, alpha, power)
    try:
        return integer_operating_point(inputs, design, factory).throughput
    except LinkOptimizerError:
        return 0.0


def _run_unit(config: SweepConfig, k: int, trial: int, fixed_n: int | None,
              theta: float | None) -> list[TrialRecord]:
    rng = _trial_rng(config.seed, k, trial)
    pop = Population.draw(k, rng, config.power, _ALPHA_LAWS[config.alpha_distribution]())
    records = []
    for name in config.strategies:
        strategy = Strategy(name)
        if strategy is Strategy.I:
            outcome = schedule_strategy1(pop, fixed_n)
        elif strategy is Strategy.II:
            outcome = schedule_strategy2(pop)
        elif strategy is Strategy.III and theta is None:
            # below K = 16 the threshold rule is undefined; every frame falls back
            base = schedule_strategy2(pop)
            outcome = ScheduleOutcome(base.chosen_id, base.design, Strategy.III, True)
        elif strategy is Strategy.III:
            outcome = schedule_strategy3(pop, theta)
        else:
            outcome = schedule_reference(pop)
        user = pop.user(outcome.chosen_id)
        thr = realized_throughput(outcome, user.u0, user.alpha, config.power,
                                  config.exponent_mode, config.mc_samples, rng)
        records.append(TrialRecord(k, trial, name, thr, user.u0 ** 2, user.alpha,
                                   outcome.fallback_used))
    return records


def _run_unit_star(args):
    return _run_unit(*args)


def _law(strategy, k, power, dist):
    if k < 16:
        return math.nan
    if strategy == Strategy.I.value:
        return theorem2_value(k, power, alpha_moment(dist, Moment.E_LOG_INV))
    if strategy == Strategy.II.value:
        return theorem3_value(k, power, alpha_moment(dist, Moment.E_SQRT_LOG_INV))
    return theorem4_value(k, power)


def _summarize(config, k, strategy, recs):
    t = len(recs)
    thr = [r.throughput for r in recs]
    mean = math.fsum(thr) / t
    if t > 1:
        var = math.fsum((x - mean) ** 2 for x in thr) / (t - 1)
        stderr = math.sqrt(var / t)
    else:
        stderr = 0.0
    law = _law(strategy, k, config.power, config.alpha_distribution)
    if k >= 16:
        gap = (theorem4_value(k, config.power) - mean) / math.sqrt(
            math.log(math.log(math.log(k))))
    else:
        gap = math.nan
    return SweepRow(
        k=k, strategy=strategy, mean_throughput=mean, stderr=stderr,
        mean_u0sq=math.fsum(r.u0sq for r in recs) / t,
        mean_alpha=math.fsum(r.alpha for r in recs) / t,
        fallback_rate=sum(r.fallback for r in recs) / t,
        law_value=law, gap=gap)


def resolve_workers(workers: int | None) -> int:
    """Worker count: the environment override wins, then the argument, then 1."""
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            workers = int(env)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    workers = 1 if workers is None else workers
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return workers


def aggregate(config: SweepConfig, records) -> SweepResult:
    """Reduce per-trial records to rows; the input order does not matter."""
    records = sorted(records, key=lambda r: (r.k, config.strategies.index(r.strategy), r.trial))
    rows = []
    for k in config.k_values:
        for s in config.strategies:
            recs = [r for r in records if r.k == k and r.strategy == s]
            rows.append(_summarize(config, k, s, recs))
    return SweepResult(config, tuple(rows), tuple(records))


def run_sweep(config: SweepConfig, workers: int | None = None) -> SweepResult:
    """Run every strategy on ``config.trials`` fresh populations per K.

    Zero-throughput frames (no servable user) are recorded as data.
    """
    workers = resolve_workers(workers)
    units = []
    for k in config.k_values:
        fixed_n = theta = None
        if Strategy.I.value in config.strategies:
            if config.strategy1_length == "empirical":
                fixed_n = empirical_codeword_length(
                    k, _trial_rng(config.seed, k, config.trials), config.power,
                    _ALPHA_LAWS[config.alpha_distribution]())
            else:
                fixed_n = strategy1_codeword_length(
                    k, alpha_moment(config.alpha_distribution, Moment.E_LOG_INV))
        if Strategy.III.value in config.strategies and k >= 16:
            theta = strategy3_threshold(k)
        units.extend((config, k, t, fixed_n, theta) for t in range(config.trials))

    if workers == 1 or len(units) == 1:
        batches = [_run_unit(*u) for u in units]
    else:
        chunk = max(1, len(units) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_run_unit_star, units, chunksize=chunk))
    return aggregate(config, [r for b in batches for r in b])
