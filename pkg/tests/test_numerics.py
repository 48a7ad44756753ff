import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftformation.numerics import (
    IntegratorConfig,
    SignumPolicy,
    integrate,
    lemma1_chain,
    lemma3_gap,
    nussbaum,
    running_nussbaum_mean,
    settling_time,
    sig_pow,
    signum,
    taylor_sig_pow,
)


def test_sig_pow_examples():
    np.testing.assert_allclose(sig_pow([4.0], 0.5), [2.0])
    np.testing.assert_allclose(sig_pow([-9.0], 0.5), [-3.0])
    assert sig_pow([0.0], 0.3).tolist() == [0.0]


@pytest.mark.parametrize("theta", [0.0, -0.5, 1.5])
def test_sig_pow_rejects_exponent(theta):
    with pytest.raises(ValueError):
        sig_pow([1.0], theta)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e6, 1e6), st.floats(0.01, 1.0))
def test_sig_pow_odd_and_sign_preserving(x, theta):
    a, b = sig_pow([x], theta)[0], sig_pow([-x], theta)[0]
    assert a == -b
    assert np.sign(a) == np.sign(x)
    assert abs(a) == pytest.approx(abs(x) ** theta, rel=1e-12)


def test_signum_modes():
    assert signum([0.01], SignumPolicy.boundary_layer(0.01)).tolist() == [0.5]
    assert signum([-3.0, 0.0, 2.0]).tolist() == [-1.0, 0.0, 1.0]
    with pytest.raises(ValueError):
        SignumPolicy("tanh")
    with pytest.raises(ValueError):
        SignumPolicy("boundary_layer", 0.0)


def test_nussbaum_values():
    assert nussbaum(2.0) == pytest.approx(1 - math.exp(4), rel=1e-12)
    assert nussbaum(0.0) == 2.0
    assert nussbaum(1.0) == pytest.approx(1.0, abs=1e-12)


def test_nussbaum_running_mean_oscillates_unboundedly():
    k, mean = running_nussbaum_mean(6.0, 1e-4)
    assert mean.max() > 1e6 and mean.min() < -1e6
    # independent check of one point by Simpson on a fine grid
    s = np.linspace(0.0, 3.0, 30001)
    f = np.exp(s * s) * np.cos(np.pi * s / 2) + 1
    w = np.ones_like(s)
    w[1:-1:2], w[2:-1:2] = 4, 2
    ref = (s[1] - s[0]) / 3 * (w @ f) / 3.0
    assert mean[np.argmin(abs(k - 3.0))] == pytest.approx(ref, rel=1e-6)


def test_euler_decay_reaches_inverse_e():
    cfg = IntegratorConfig(step=1e-3, t_end=1.0, log_every=1000)
    tr = integrate(lambda x, t: -x, [1.0], cfg)
    assert tr.times[-1] == pytest.approx(1.0)
    assert tr["x"][-1, 0] == pytest.approx(math.exp(-1), abs=1e-3)
    assert tr["x"][-1, 0] == pytest.approx((1 - 1e-3) ** 1000, rel=1e-12)


def test_rk4_is_fourth_order():
    errs = []
    for h in (1e-2, 5e-3):
        tr = integrate(lambda x, t: -x, [1.0], IntegratorConfig(step=h, t_end=1.0, scheme="rk4", log_every=10**6))
        errs.append(abs(tr.final_state[0] - math.exp(-1)))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.05)


def test_integrate_guard_cuts_trace():
    tr = integrate(lambda x, t: x * 10.0, [1.0], IntegratorConfig(step=1e-2, t_end=10.0, log_every=1))
    assert tr.diverged
    assert tr.divergence.time < 10.0
    assert np.all(np.abs(tr["x"]) <= 1e8)


@pytest.mark.parametrize("kw", [dict(step=0.0), dict(step=0.1), dict(t_end=0.0), dict(scheme="midpoint"), dict(log_every=0)])
def test_integrator_config_validation(kw):
    with pytest.raises(ValueError):
        IntegratorConfig(**kw)


def test_settling_time_uses_last_crossing():
    t = np.arange(6.0)
    assert settling_time(t, [5, 0.1, 5, 0.1, 0.1, 0.1], 1.0) == 3.0
    assert settling_time(t, [0.1] * 6, 1.0) == 0.0
    assert settling_time(t, [0.1] * 5 + [2], 1.0) is None
    assert settling_time(t, [0.1, np.nan, 0.1, 0.1, 0.1, 0.1], 1.0) == 2.0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.0, 100.0), min_size=1, max_size=10), st.floats(0.01, 4.0))
def test_lemma1_ordering(xi, p):
    lo, mid, hi = lemma1_chain(np.array(xi), p)
    tol = 1e-9 * max(1.0, lo, mid, hi)
    if p <= 1:
        assert lo <= mid + tol and mid <= hi + tol
    else:
        assert hi <= mid + tol and mid <= lo + tol


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e4, 1e4), st.floats(1e-6, 10.0))
def test_lemma3_bounds(x, gamma):
    gap = float(lemma3_gap(x, gamma))
    assert -1e-12 * max(1, abs(x)) <= gap <= gamma + 1e-12 * max(1, abs(x))


@pytest.mark.parametrize("theta", [0.3, 0.7, 1.0])
def test_taylor_sig_pow_against_finite_differences(theta):
    # a(t) = 0.8 - 0.5 t + 0.3 t^2 + 0.2 t^3
    c = np.array([0.8, -0.5, 0.3, 0.2])
    a = lambda t: np.polyval(c[::-1], t)
    f = lambda t: np.sign(a(t)) * abs(a(t)) ** theta
    out = taylor_sig_pow(c, theta)
    h = 1e-3
    d1 = (f(h) - f(-h)) / (2 * h)
    d2 = (f(h) - 2 * f(0) + f(-h)) / h**2
    d3 = (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h**3)
    np.testing.assert_allclose(out[:4], [f(0), d1, d2 / 2, d3 / 6], rtol=1e-5, atol=1e-6)
