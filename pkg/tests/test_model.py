import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from stochpension.model import (
    CalibratedConstants,
    LinearSdeCoefficients,
    lognormal_mean_var,
    lognormal_moment,
    rescale_monthly_to_annual,
    solve_linear_sde_path,
)
from stochpension.montecarlo import EulerConfig, euler_paths


def test_moment_at_time_zero_is_power_of_start():
    c = LinearSdeCoefficients.homogeneous(0.3, 0.7)
    assert lognormal_moment(1.0, c, 0.0, 3) == 1.0


@pytest.mark.parametrize("a,b,t", [(0.05, 0.2, 3.0), (-0.03, 0.4, 10.0), (0.0, 0.0, 1.0)])
def test_first_moment_is_exponential_growth(a, b, t):
    c = LinearSdeCoefficients.homogeneous(a, b)
    assert lognormal_moment(1.0, c, t, 1) == pytest.approx(math.exp(a * t), rel=1e-14)


def test_second_moment_matches_euler_monte_carlo():
    c = LinearSdeCoefficients.homogeneous(0.0, 0.3)
    expected = lognormal_moment(2.0, c, 4.0, 2)
    assert expected == pytest.approx(4 * math.exp(0.36), rel=1e-14)
    ens = euler_paths(c, 2.0, EulerConfig(dt=0.05, horizon=4.0, n_paths=1_000_000, seed=11, record_times=(4.0,)))
    x2 = ens.paths[:, -1] ** 2
    se = x2.std(ddof=1) / math.sqrt(x2.size)
    assert abs(x2.mean() - expected) < 3 * se


@given(a=st.floats(-0.2, 0.2), b=st.floats(0, 0.6), t=st.floats(0, 30), x0=st.floats(0.1, 10))
def test_moment_formula_matches_mean_variance(a, b, t, x0):
    c = LinearSdeCoefficients.homogeneous(a, b)
    mean, var = lognormal_mean_var(x0, c, t)
    m1 = lognormal_moment(x0, c, t, 1)
    m2 = lognormal_moment(x0, c, t, 2)
    assert m1 == pytest.approx(mean, rel=1e-12)
    assert m2 - m1 * m1 == pytest.approx(var, rel=1e-9, abs=1e-12 * m2)


def test_piecewise_coefficients_integrate_exactly():
    c = LinearSdeCoefficients(np.array([0.0, 1.0, 3.0]), np.array([0.1, -0.2]), 0.0, np.array([0.3, 0.1]), 0.0)
    assert float(c.int_a1(2.0)) == pytest.approx(0.1 - 0.2, rel=1e-14)
    assert float(c.int_b1_squared(3.0)) == pytest.approx(0.09 + 2 * 0.01, rel=1e-14)


def test_zero_coefficients_give_constant_path():
    c = LinearSdeCoefficients.constant()
    times = np.linspace(0, 5, 11)
    noise = np.random.default_rng(0).normal(size=10)
    assert np.all(solve_linear_sde_path(c, 5.0, noise, times) == 5.0)


def test_zero_noise_gives_deterministic_exponent():
    psi, vol = 0.0329, 0.3464
    c = LinearSdeCoefficients.homogeneous(psi, vol)
    times = np.linspace(0, 20, 41)
    path = solve_linear_sde_path(c, 1.5, np.zeros(40), times)
    np.testing.assert_allclose(path, 1.5 * np.exp((psi - vol**2 / 2) * times), rtol=1e-13)


@given(a=st.floats(-0.1, 0.1), b=st.floats(0, 0.5), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_homogeneous_path_is_exponential_of_integrated_exponent(a, b, seed):
    c = LinearSdeCoefficients.homogeneous(a, b)
    times = np.linspace(0, 10, 51)
    dw = np.random.default_rng(seed).normal(scale=math.sqrt(0.2), size=50)
    w = np.concatenate([[0], np.cumsum(dw)])
    np.testing.assert_allclose(solve_linear_sde_path(c, 2.0, dw, times),
                               2.0 * np.exp((a - b * b / 2) * times + b * w), rtol=1e-12)


def test_inhomogeneous_path_matches_fine_euler():
    # consumption-like drift offset; Euler on the same Brownian path is the oracle
    c = LinearSdeCoefficients.constant(a1=0.0329, a2=-1.0, b1=0.1, b2=0.0)
    dt, n = 1e-4, 20_000
    times = np.arange(n + 1) * dt
    dw = np.random.default_rng(5).normal(scale=math.sqrt(dt), size=n)
    exact = solve_linear_sde_path(c, 1.0, dw, times)
    x = np.empty(n + 1)
    x[0] = 1.0
    for k in range(n):
        x[k + 1] = x[k] + (0.0329 * x[k] - 1.0) * dt + 0.1 * x[k] * dw[k]
    scale = np.max(np.abs(x))
    assert np.max(np.abs(exact - x)) < 1e-3 * scale


@pytest.mark.parametrize("a,b", [(0.0329, 0.3464), (-0.0328, 0.40825), (0.1, 0.05)])
def test_terminal_sample_mean_matches_first_moment(a, b):
    c = LinearSdeCoefficients.homogeneous(a, b)
    rng = np.random.default_rng(17)
    t = 5.0
    times = np.array([0.0, t])
    vals = np.array([solve_linear_sde_path(c, 1.0, rng.normal(scale=math.sqrt(t), size=1), times)[-1]
                     for _ in range(100_000)])
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean() - lognormal_moment(1.0, c, t, 1)) < 4 * se


def test_rescale_examples():
    assert rescale_monthly_to_annual(0.0, 0.0) == (0.0, 0.0)
    psi, phi = rescale_monthly_to_annual(0.002742, 0.1)
    assert psi == pytest.approx(0.032904, abs=1e-9)
    assert phi == pytest.approx(0.34641, abs=1e-5)
    psi, phi = rescale_monthly_to_annual(0.01, 0.05)
    assert psi == pytest.approx(0.12, abs=1e-12)
    assert phi == pytest.approx(0.17321, abs=1e-5)


def test_rescale_agrees_with_monthly_simulation():
    # twelve monthly GBM steps and one annual step have the same terminal law
    q, r = 0.01, 0.05
    psi, phi = rescale_monthly_to_annual(q, r)
    rng = np.random.default_rng(3)
    monthly = np.exp(np.sum((q - r * r / 2) + r * rng.normal(size=(20_000, 12)), axis=1))
    annual = np.exp((psi - phi * phi / 2) + phi * rng.normal(size=20_000))
    assert stats.ks_2samp(monthly, annual).pvalue > 1e-3


@given(q1=st.floats(-0.05, 0.05), q2=st.floats(-0.05, 0.05), r=st.floats(0, 0.5), k=st.floats(0, 10))
def test_rescale_linear_in_drift_homogeneous_in_vol(q1, q2, r, k):
    a = rescale_monthly_to_annual(q1 + q2, r)
    assert a[0] == pytest.approx(rescale_monthly_to_annual(q1, r)[0] + rescale_monthly_to_annual(q2, r)[0], abs=1e-12)
    assert rescale_monthly_to_annual(q1, k * r)[1] == pytest.approx(k * rescale_monthly_to_annual(q1, r)[1], rel=1e-12, abs=1e-15)


def test_constants_defaults_and_validation():
    c = CalibratedConstants.paper_defaults()
    assert (c.psi, c.phi, c.xi) == (0.0329, 0.3464, -0.0328)
    assert c.eta == pytest.approx(math.sqrt(1 / 6))
    with pytest.raises(ValueError):
        CalibratedConstants(0.03, -0.1, 0.0, 0.1)
    with pytest.raises(ValueError):
        CalibratedConstants(0.03, 0.1, 0.0, 0.1, lambda_contrib=1.0)
    with pytest.raises(ValueError, match="disagree"):
        CalibratedConstants(0.05, 0.3464, 0.0, 0.1, q_monthly=0.002742, r_monthly_vol=0.1)
    ok = CalibratedConstants(0.032904, math.sqrt(12) * 0.1, 0.0, 0.1, q_monthly=0.002742, r_monthly_vol=0.1)
    assert ok.replace(psi=0.0).q_monthly is None


def test_bad_inputs_rejected():
    c = LinearSdeCoefficients.homogeneous(0.1, 0.2)
    with pytest.raises(ValueError):
        lognormal_moment(-1.0, c, 1.0, 1)
    with pytest.raises(ValueError):
        lognormal_moment(1.0, c, 1.0, 0)
    with pytest.raises(ValueError):
        solve_linear_sde_path(c, 1.0, np.zeros(3), np.linspace(0, 1, 3))
    with pytest.raises(ValueError):
        rescale_monthly_to_annual(0.0, -0.1)
