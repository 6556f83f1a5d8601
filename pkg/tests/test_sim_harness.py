import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fadesched.fading_channel import FadingParams
from fadesched.error_exponent import theorem1_curve
from fadesched.link_optimizer import OptimalityInputs, integer_operating_point
from fadesched.scheduler import Population, schedule_strategy2
from fadesched.sim_harness import (
    CSV_HEADER,
    WORKERS_ENV,
    ConfigError,
    SweepConfig,
    aggregate,
    parse_config,
    run_sweep,
)

GOOD = """
# small sweep
k_values = 20, 200
power = 1.0
trials = 6
strategies = I, II, III, optimal-reference
seed = 42
alpha_distribution = uniform
exponent_mode = theorem1
mc_samples = 2000
strategy1_length = formula
"""


def test_parse_full_config():
    cfg = parse_config(GOOD)
    assert cfg.k_values == (20, 200)
    assert cfg.strategies == ("I", "II", "III", "optimal-reference")
    assert cfg.seed == 42 and cfg.trials == 6


def test_parse_accepts_scientific_integers():
    assert parse_config("k_values = 1e2, 1e3").k_values == (100, 1000)


@pytest.mark.parametrize("text", [
    "k_values = 10\nbogus = 1",
    "k_values = 10\nk_values = 20",
    "k_values = 10\ntrials = 0",
    "k_values = 100, 10",
    "k_values = 10\nseed = -1",
    f"k_values = 10\nseed = {2**64}",
    "k_values = 10\nstrategies = I, IV",
    "k_values = 10\nexponent_mode = exact",
    "k_values = 10\nalpha_distribution = beta",
    "k_values = 10\nmc_samples = 10",
    "k_values = 10\npower = 0",
    "k_values = 10\ntrials = 2.5",
    "trials = 3",
    "k_values 10",
])
def test_parse_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_direct_call_equivalence():
    cfg = SweepConfig(k_values=(1,), trials=1, strategies=("II",), seed=9)
    res = run_sweep(cfg)
    rng = np.random.default_rng(np.random.SeedSequence(9, spawn_key=(1, 0)))
    pop = Population.draw(1, rng)
    out = schedule_strategy2(pop)
    user = pop.users[0]
    if out.design is None:
        expected = 0.0
    else:
        inputs = OptimalityInputs(user.u0, user.alpha)
        params = FadingParams(user.alpha)
        expected = integer_operating_point(
            inputs, out.design, lambda n: theorem1_curve(user.u0, params, n, 1.0)).throughput
    row = res.row(1, "II")
    assert row.mean_throughput == expected
    assert row.mean_u0sq == user.u0**2 and row.stderr == 0.0


def test_same_seed_same_csv():
    cfg = parse_config(GOOD)
    assert run_sweep(cfg).to_csv() == run_sweep(cfg).to_csv()


def test_different_seed_differs():
    a = run_sweep(SweepConfig(k_values=(50,), trials=5, seed=1)).to_csv()
    b = run_sweep(SweepConfig(k_values=(50,), trials=5, seed=2)).to_csv()
    assert a != b


def test_parallel_equals_serial():
    cfg = parse_config(GOOD)
    assert run_sweep(cfg, workers=1).to_csv() == run_sweep(cfg, workers=2).to_csv()


def test_workers_env_override(monkeypatch):
    cfg = SweepConfig(k_values=(30,), trials=4, seed=3)
    serial = run_sweep(cfg, workers=1).to_csv()
    monkeypatch.setenv(WORKERS_ENV, "2")
    assert run_sweep(cfg, workers=1).to_csv() == serial
    monkeypatch.setenv(WORKERS_ENV, "many")
    with pytest.raises(ConfigError):
        run_sweep(cfg)


def test_aggregation_is_order_independent():
    cfg = parse_config(GOOD)
    res = run_sweep(cfg)
    shuffled = list(res.records)
    np.random.default_rng(0).shuffle(shuffled)
    assert aggregate(cfg, shuffled).rows == res.rows


def test_csv_format():
    res = run_sweep(SweepConfig(k_values=(10, 100), trials=3, seed=5))
    lines = res.to_csv().strip().split("\n")
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 1 + 2 * 3
    for line, row in zip(lines[1:], res.rows):
        fields = line.split(",")
        assert int(fields[0]) == row.k and fields[1] == row.strategy
        # 17 significant digits round-trip exactly
        assert float(fields[2]) == row.mean_throughput


def test_small_k_has_no_law_and_always_falls_back():
    res = run_sweep(SweepConfig(k_values=(8,), trials=4, seed=1))
    for s in ("I", "II", "III"):
        row = res.row(8, s)
        assert math.isnan(row.law_value) and math.isnan(row.gap)
    assert res.row(8, "III").fallback_rate == 1.0


def test_law_columns():
    from fadesched.asymptotics import theorem2_value, theorem3_value, theorem4_value
    res = run_sweep(SweepConfig(k_values=(1000,), trials=2, seed=1,
                                strategies=("I", "II", "III", "optimal-reference")))
    assert res.row(1000, "I").law_value == theorem2_value(1000, 1.0, 1.0)
    assert res.row(1000, "II").law_value == pytest.approx(
        theorem3_value(1000, 1.0, math.sqrt(math.pi) / 2), rel=1e-15)
    for s in ("III", "optimal-reference"):
        assert res.row(1000, s).law_value == theorem4_value(1000, 1.0)
    row = res.row(1000, "II")
    lll = math.log(math.log(math.log(1000)))
    assert row.gap == pytest.approx((theorem4_value(1000, 1.0) - row.mean_throughput)
                                    / math.sqrt(lll))


def test_json_summary():
    cfg = SweepConfig(k_values=(8, 100), trials=2, seed=77)
    doc = json.loads(run_sweep(cfg).to_json())
    assert doc["seed"] == 77
    assert doc["config"]["k_values"] == [8, 100]
    assert set(doc["rows"][0]) == set(CSV_HEADER)
    assert doc["rows"][0]["law_value"] is None


def test_exact_mc_mode_runs_and_is_seeded():
    cfg = SweepConfig(k_values=(100,), trials=2, seed=4, strategies=("II",),
                      exponent_mode="exact_mc", mc_samples=1000)
    a, b = run_sweep(cfg), run_sweep(cfg)
    assert a.to_csv() == b.to_csv()
    assert a.row(100, "II").mean_throughput > 0


def test_empirical_strategy1_length_mode():
    cfg = SweepConfig(k_values=(100,), trials=3, seed=4, strategies=("I",),
                      strategy1_length="empirical")
    assert run_sweep(cfg).to_csv() == run_sweep(cfg).to_csv()


@settings(max_examples=10, deadline=None)
@given(ks=st.lists(st.integers(1, 300), min_size=1, max_size=3, unique=True),
       trials=st.integers(1, 4), seed=st.integers(0, 2**64 - 1))
def test_rows_are_well_formed(ks, trials, seed):
    cfg = SweepConfig(k_values=tuple(sorted(ks)), trials=trials, seed=seed)
    res = run_sweep(cfg)
    assert len(res.rows) == len(ks) * 3
    for row in res.rows:
        assert row.stderr >= 0
        assert math.isfinite(row.mean_throughput) and row.mean_throughput >= 0
        assert 0 <= row.fallback_rate <= 1
