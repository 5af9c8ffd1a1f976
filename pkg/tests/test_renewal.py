"""Stretched-exponential renewal laws, tilting, renewal function, diagnostics."""

import math

import numpy as np
import pytest

from pinlab.renewal import build_law, renewal_function, subexp_diagnostics, tilt

# frozen from two independent computations (convolution recursion and direct
# series summation agree to 4e-15 relative) for gamma=0.5, c=1, rho=0, K_inf=0.3
U_OVER_K_AT_2000 = 18.0393352200216
CONV2_AT_2000 = 2.182131977874312
CONV3_AT_2000 = 3.5720190186987644


@pytest.fixture(scope="module")
def proper_law():
    return build_law(0.5, 1.0, 0.0, 0.0, n_max=4000)


@pytest.fixture(scope="module")
def terminating_law():
    return build_law(0.5, 1.0, 0.0, 0.3, n_max=4000)


def test_build_normalization(proper_law, terminating_law):
    assert proper_law.K[1:].sum() == pytest.approx(1.0, abs=1e-12)
    assert terminating_law.K[1:].sum() == pytest.approx(0.7, abs=1e-12)
    assert terminating_law.K_inf == 0.3


def test_build_ratio_identities(proper_law):
    K = proper_law.K
    for n in (1, 10, 100, 999):
        assert K[n] / K[n + 1] == pytest.approx(
            math.exp(math.sqrt(n + 1) - math.sqrt(n)), rel=1e-12
        )
    assert K[1] / K[4] == pytest.approx(math.e, rel=1e-12)


def test_build_errors():
    with pytest.raises(ValueError):
        build_law(0.5, 1.0, 0.0, 0.0, n_max=10)  # tail mass over budget
    with pytest.raises(ValueError):
        build_law(0.9, 1.0, 0.0, 0.0, n_max=100_000)  # K underflows
    with pytest.raises(ValueError):
        build_law(1.2, 1.0)
    with pytest.raises(ValueError):
        build_law(0.5, -1.0)
    with pytest.raises(ValueError):
        build_law(0.5, 1.0, K_inf_target=1.0)


def test_tilt(proper_law):
    same = tilt(proper_law, 0.0)
    assert np.array_equal(same.K, proper_law.K)
    half = tilt(proper_law, math.log(2.0))
    assert half.K_inf == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(half.K, 0.5 * proper_law.K)
    nearly_dead = tilt(proper_law, 50.0)
    assert nearly_dead.K_inf == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        tilt(proper_law, -0.1)  # finite mass would exceed 1
    # a terminating law can be tilted back
    back = tilt(tilt(proper_law, math.log(2.0)), -math.log(2.0))
    assert back.K_inf == pytest.approx(0.0, abs=1e-12)


def test_renewal_function_small_identities(terminating_law):
    K = terminating_law.K
    u = renewal_function(terminating_law, 2)
    assert u[0] == 1.0
    assert u[1] == pytest.approx(K[1], rel=1e-14)
    assert u[2] == pytest.approx(K[2] + K[1] ** 2, rel=1e-14)
    assert np.all((u > 0) & (u <= 1))


def test_renewal_function_matches_series_oracle(terminating_law):
    # independent oracle: u(n) = sum_m K^{*m}(n) by direct convolution
    n = 400
    K = np.zeros(n + 1)
    K[1:] = terminating_law.K[1 : n + 1]
    series = np.zeros(n + 1)
    power = K.copy()
    series += power
    for _ in range(2, 200):
        power = np.convolve(power, K)[: n + 1]
        series += power
    u = renewal_function(terminating_law, n)
    assert u[1:] == pytest.approx(series[1:], rel=1e-10)


def test_renewal_function_horizon_error(terminating_law):
    with pytest.raises(ValueError):
        renewal_function(terminating_law, 4001)


def test_terminating_ratio_frozen_value(terminating_law):
    d = subexp_diagnostics(terminating_law, 2000, 1)
    assert d["u_over_K"] == pytest.approx(U_OVER_K_AT_2000, rel=1e-9)


def test_diagnostics_shift_ratio_closed_form():
    law = build_law(0.5, 1.0, 0.0, 0.0, n_max=10_100)
    d = subexp_diagnostics(law, 10_000, 1)
    expect = math.exp(-(math.sqrt(10_001) - math.sqrt(10_000)))
    assert d["shift_ratio"] == pytest.approx(expect, rel=1e-12)
    assert d["shift_ratio"] == pytest.approx(0.99501, abs=1e-5)


def test_diagnostics_convolutions(terminating_law):
    # explicit double-sum oracle at a small n
    n = 300
    q = terminating_law.q
    q2 = sum(q[j] * q[n - j] for j in range(1, n))
    q3 = sum(
        q[i] * q[j] * q[n - i - j]
        for i in range(1, n - 1)
        for j in range(1, n - i)
    )
    d = subexp_diagnostics(terminating_law, n, 1)
    assert d["conv2_ratio"] == pytest.approx(q2 / q[n], rel=1e-12)
    assert d["conv3_ratio"] == pytest.approx(q3 / q[n], rel=1e-9)
    # frozen regression values at n=2000, approaching 2 and 3 from above
    d2 = subexp_diagnostics(terminating_law, 2000, 1)
    assert d2["conv2_ratio"] == pytest.approx(CONV2_AT_2000, rel=1e-9)
    assert d2["conv3_ratio"] == pytest.approx(CONV3_AT_2000, rel=1e-9)
    d1 = subexp_diagnostics(terminating_law, 1000, 1)
    assert d2["conv2_ratio"] < d1["conv2_ratio"]
    assert d2["conv3_ratio"] < d1["conv3_ratio"]
    assert d2["conv2_ratio"] > 2.0 and d2["conv3_ratio"] > 3.0


def test_log_u_slope(terminating_law):
    u = renewal_function(terminating_law, 2000)
    ns = np.arange(500, 2001)
    x = ns ** 0.5
    slope = np.polyfit(x, np.log(u[ns]), 1)[0]
    assert abs(slope - (-1.0)) < 0.1  # within 10% of -c


def test_tilt_consistency_weighted_series(proper_law):
    # u_tilted(n) == sum_m exp(-h m) K^{*m}(n) for the proper base law
    h = 0.4
    n = 200
    tilted = tilt(proper_law, h)
    lhs = renewal_function(tilted, n)
    K = np.zeros(n + 1)
    K[1:] = proper_law.K[1 : n + 1]
    rhs = np.zeros(n + 1)
    power = np.zeros(n + 1)
    power[0] = 1.0
    for m in range(1, n + 1):
        power = np.convolve(power, K)[: n + 1]
        rhs += math.exp(-h * m) * power
    assert lhs[1:] == pytest.approx(rhs[1:], rel=1e-10)


def test_q_requires_mass(terminating_law):
    q = terminating_law.q
    assert q[1:].sum() == pytest.approx(1.0, abs=1e-12)
