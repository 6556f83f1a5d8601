import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from fadesched.asymptotics import (
    Moment,
    alpha_moment,
    e_log_alpha_max_inv_approx,
    e_log_alpha_max_inv_exact,
    jensen_gap_constant,
    scaling_law,
    theorem2_value,
    theorem3_value,
    theorem4_value,
)
from fadesched.fading_channel import CustomAlpha
from fadesched.link_optimizer import AccuracyWarning
from fadesched.oracles import alpha_max_mc_oracle
from fadesched.scheduler import strategy3_threshold

SQRT_PI_2 = math.sqrt(math.pi) / 2


def test_law_values_at_one_million():
    assert theorem2_value(10**6, 1.0, 1.0) == pytest.approx(-0.0324329, abs=1e-6)
    assert theorem3_value(10**6, 1.0, SQRT_PI_2) == pytest.approx(0.4939085, abs=1e-6)
    assert theorem4_value(10**6, 1.0) == pytest.approx(math.log(math.log(1e6)), rel=1e-15)
    assert theorem4_value(10**6, 1.0) == pytest.approx(2.6257, abs=1e-4)


def test_law_corrections_vanish():
    k = 10**5
    assert theorem2_value(k, 2.0, 0.0) == pytest.approx(math.log(math.log(k)))
    assert theorem3_value(k, 2.0, 0.0) == pytest.approx(math.log(math.log(k)))


@settings(max_examples=100, deadline=None)
@given(log10_k=st.floats(math.log10(16), 30))
def test_law_ordering(log10_k):
    k = 10**log10_k
    t2 = theorem2_value(k, 1.0, 1.0)
    t3 = theorem3_value(k, 1.0, SQRT_PI_2)
    t4 = theorem4_value(k, 1.0)
    assert t4 > t3 >= t2 - 1e-12


def test_theorem2_increasing_for_large_k():
    vals = [theorem2_value(10**e, 1.0, 1.0) for e in range(4, 40, 3)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_gap_to_maximum_grows():
    gaps = [theorem4_value(10**e, 1.0) - theorem2_value(10**e, 1.0, 1.0) for e in (3, 10, 30, 100)]
    assert all(a < b for a, b in zip(gaps, gaps[1:]))


def test_strategy2_gain_tends_to_jensen_constant():
    # the log 2 inside the Strategy-II double log fades only like 1/log log K,
    # so check a monotone approach from above on huge integer K
    c = jensen_gap_constant()
    ratios = []
    for e in (3, 10, 100, 1000, 10000, 100000):
        k = 10**e
        lll = math.log(math.log(math.log(k)))
        ratios.append((theorem3_value(k, 1.0, SQRT_PI_2) - theorem2_value(k, 1.0, 1.0))
                      / math.sqrt(lll))
    assert all(a > b > c for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] - c < 0.1 * ratios[0]


def test_jensen_constant_by_quadrature():
    ex = integrate.quad(lambda x: x * math.exp(-x), 0, np.inf)[0]
    esx = integrate.quad(lambda x: math.sqrt(x) * math.exp(-x), 0, np.inf)[0]
    assert 2 * (math.sqrt(ex) - esx) == pytest.approx(jensen_gap_constant(), abs=1e-9)
    assert jensen_gap_constant() == pytest.approx(0.2276, abs=1e-3)


def test_uniform_moments():
    assert alpha_moment("uniform", Moment.E_LOG_INV) == 1.0
    assert alpha_moment("uniform", Moment.E_SQRT_LOG_INV) == pytest.approx(0.886227, abs=1e-6)
    assert alpha_moment("uniform", "E_cuberoot_log_inv") == pytest.approx(math.gamma(4 / 3))
    assert alpha_moment("uniform", Moment.E_SQRT_LOG_INV) <= math.sqrt(
        alpha_moment("uniform", Moment.E_LOG_INV))


def test_custom_moment_quadrature_matches_sampling():
    law = stats.beta(5, 1.5)
    custom = CustomAlpha(law.cdf, law.ppf)
    got = alpha_moment(custom, Moment.E_SQRT_LOG_INV)
    x = -np.log(law.rvs(size=400000, random_state=np.random.default_rng(0)))
    assert got == pytest.approx(np.sqrt(x).mean(), rel=5e-3)
    # uniform as a custom law reproduces the closed form
    as_custom = CustomAlpha(lambda a: min(max(a, 0.0), 1.0))
    assert alpha_moment(as_custom, Moment.E_LOG_INV) == pytest.approx(1.0, rel=1e-8)


def test_moment_rejects_bad_laws():
    with pytest.raises(ValueError):
        alpha_moment("beta")


def test_scaling_law_dispatch():
    assert scaling_law("I").value_at(10**6, 1.0, 1.0) == theorem2_value(10**6, 1.0, 1.0)
    assert scaling_law("max").value_at(10**6, 1.0) == theorem4_value(10**6, 1.0)
    with pytest.raises(ValueError):
        scaling_law("IV")


def test_alpha_max_single_user():
    assert e_log_alpha_max_inv_exact(1, 2.5) == pytest.approx(math.exp(-2.5), rel=1e-15)


@pytest.mark.parametrize("theta", [0.5, 2.0, 5.0])
def test_alpha_max_recursion(theta):
    q = 1 - math.exp(-theta)
    prev = e_log_alpha_max_inv_exact(1, theta)
    for k in range(2, 101):
        cur = e_log_alpha_max_inv_exact(k, theta)
        assert abs(cur - (q * prev + 1 / k - q**k / k)) <= 1e-12
        prev = cur


@pytest.mark.parametrize("k,theta", [(50, 2.0), (200, 3.0)])
def test_alpha_max_matches_monte_carlo(k, theta):
    mean, se = alpha_max_mc_oracle(k, theta, 10**6, np.random.default_rng(k))
    assert abs(e_log_alpha_max_inv_exact(k, theta) - mean) <= 3 * se


def test_alpha_max_truncated_sum_matches_direct():
    from fadesched import asymptotics
    k, theta = 10**6 + 5, 10.0
    full = math.fsum(
        math.exp((k - n) * math.log1p(-math.exp(-theta))) * -math.expm1(n * math.log1p(-math.exp(-theta))) / n
        for n in range(1, k + 1))
    assert asymptotics.e_log_alpha_max_inv_exact(k, theta) == pytest.approx(full, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(k=st.integers(2, 5000), theta=st.floats(0.1, 8), dk=st.integers(1, 500))
def test_alpha_max_decreasing_in_k_when_set_is_populated(k, theta, dk):
    # holds once a couple of users are expected above the bar
    assume(k * math.exp(-theta) >= 2)
    assert e_log_alpha_max_inv_exact(k + dk, theta) < e_log_alpha_max_inv_exact(k, theta)


@settings(max_examples=60, deadline=None)
@given(k=st.integers(2, 5000), theta=st.floats(0.1, 8), dt=st.floats(0.01, 1))
def test_alpha_max_increasing_in_theta_when_set_is_populated(k, theta, dt):
    assume(k * math.exp(-theta - dt) >= 2)
    assert e_log_alpha_max_inv_exact(k, theta + dt) > e_log_alpha_max_inv_exact(k, theta)


def test_alpha_max_not_monotone_for_sparse_set():
    # with p = e^-theta small, lambda(2) - lambda(1) = p - 1.5 p^2 > 0
    theta = 5.0
    assert e_log_alpha_max_inv_exact(2, theta) > e_log_alpha_max_inv_exact(1, theta)


def test_approximation_accuracy():
    errs = []
    for k in (10**4, 10**6):
        theta = strategy3_threshold(k)
        exact = e_log_alpha_max_inv_exact(k, theta)
        errs.append(abs(e_log_alpha_max_inv_approx(k, theta) - exact) / exact)
    assert errs[0] <= 0.10
    assert errs[1] < errs[0]


def test_approximation_examples():
    k = 10**5
    assert e_log_alpha_max_inv_approx(k, math.log(k / 50)) == pytest.approx(0.02, rel=1e-6)
    with pytest.warns(AccuracyWarning):
        assert e_log_alpha_max_inv_approx(k, math.log(k) + 0.5) > 1.0
    with pytest.warns(AccuracyWarning):
        e_log_alpha_max_inv_approx(k, math.log(k) + 1)
    # at theta = log K the expected count is 1, right on the warning edge
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AccuracyWarning)
        assert e_log_alpha_max_inv_approx(k, math.log(k)) == pytest.approx(1.0)


def test_threshold_regime_product_vanishes():
    seq = []
    for k in (10**3, 10**4, 10**5, 10**6):
        theta = strategy3_threshold(k)
        seq.append(e_log_alpha_max_inv_exact(k, theta) * math.log(math.log(theta)))
    assert all(a > b for a, b in zip(seq, seq[1:]))


def test_exact_rejects_bad_input():
    with pytest.raises(ValueError):
        e_log_alpha_max_inv_exact(0, 1.0)
    with pytest.raises(ValueError):
        e_log_alpha_max_inv_exact(5, 0.0)
