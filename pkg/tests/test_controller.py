import numpy as np
import pytest

from ftformation.controller import (
    ControllerGains,
    ControllerState,
    adaptation_derivatives,
    backstepping_errors,
    control_law,
    exp_decay,
    jet_from_corrections,
    smooth_sign,
)
from ftformation.estimator import EstimatorGains, EstimatorState, estimator_derivative, estimator_jets
from ftformation.graph import build_graph
from ftformation.numerics import nussbaum


def scalar_gains(**kw):
    base = dict(kbar=(0.8, 80.0), Gamma_theta=np.eye(1), Gamma_eps=np.eye(1), delta=lambda t: 0.05)
    base.update(kw)
    return ControllerGains(**base)


def test_first_virtual_control():
    x = np.array([[1.0, -1.0], [0.0, 0.0]])
    J = np.zeros((2, 2, 2))
    zt, zstar, _ = backstepping_errors(x, J, np.zeros(2), (0.8, 80.0))
    np.testing.assert_allclose(zt[0], [1.0, -1.0])
    np.testing.assert_allclose(zstar[1], [-0.8, 0.8])
    np.testing.assert_allclose(zt[1], [0.8, -0.8])


def test_control_law_scalar_example():
    g = scalar_gains()
    ctrl = ControllerState(np.zeros(1), np.array([2.0]), kappa=1.0)
    zt = np.array([[0.0], [0.1]])
    u, ubar = control_law(zt, np.zeros((1, 1)), ctrl, g, 0.0, np.zeros(1))
    assert ubar[0] == pytest.approx(9.788854, abs=1e-6)
    assert u[0] == pytest.approx(ubar[0], rel=1e-12)


def test_control_law_zero_errors():
    g = ControllerGains()
    ctrl = ControllerState.zeros(2, 2, kappa=0.3)
    u, ubar = control_law(np.zeros((2, 2)), np.ones((2, 2)), ctrl, g, 0.0, np.zeros(2))
    assert np.all(u == 0) and np.all(ubar == 0)


def test_nussbaum_scales_input(rng):
    g = ControllerGains()
    ctrl = ControllerState(rng.normal(size=2), rng.normal(size=2), kappa=2.3)
    u, ubar = control_law(rng.normal(size=(2, 2)), rng.normal(size=(2, 2)), ctrl, g, 0.4, rng.normal(size=2))
    np.testing.assert_allclose(u, nussbaum(2.3) * ubar, rtol=1e-14)


def test_adaptation_examples():
    g = scalar_gains()
    ctrl = ControllerState.zeros(1, 1)
    _, deps, _ = adaptation_derivatives(np.array([0.1]), np.zeros(1), np.zeros((1, 1)), ctrl, g, 0.0)
    assert deps[0] == pytest.approx(0.0894427, abs=1e-7)
    _, _, dk = adaptation_derivatives(np.array([1.0, 0.0]), np.array([2.0, 5.0]), np.zeros((2, 2)), ControllerState.zeros(2, 2), ControllerGains(), 0.0)
    assert dk == 2.0
    dth, deps, dk = adaptation_derivatives(np.zeros(2), np.ones(2), np.ones((2, 2)), ControllerState.zeros(2, 2), ControllerGains(), 0.0)
    assert not dth.any() and not deps.any() and dk == 0.0


def test_smooth_sign_and_delta():
    assert smooth_sign(0.1, 0.05) == pytest.approx(0.1 / np.sqrt(0.0125))
    d = exp_decay(0.05)
    assert d(0.0) == 0.05 and d(1.0) == pytest.approx(0.05 / np.e)


def test_gain_validation():
    with pytest.raises(ValueError):
        ControllerGains(kbar=(1.0,))
    with pytest.raises(ValueError):
        ControllerGains(Gamma_theta=-np.eye(2))
    with pytest.raises(ValueError):
        backstepping_errors(np.zeros((1, 2)), np.zeros((1, 1, 2)), np.zeros(2), (1.0, 1.0))


def test_jet_from_corrections_matches_general_jet(rng):
    g = build_graph([(1, 2, 1.0)], [(1, 1.0)], 2)
    st = EstimatorState(rng.normal(size=(2, 2, 2)), *(rng.normal(size=(2, 2)) for _ in range(3)))
    lead = rng.normal(size=(2, 2))
    gains = EstimatorGains()
    der = estimator_derivative(st, lead, g, gains)
    J = estimator_jets(st, lead, g, gains)
    for i in range(2):
        np.testing.assert_allclose(jet_from_corrections(st.xhat[i], der.corrections[i]), J[i], rtol=1e-13, atol=1e-13)


def test_top_virtual_control_rate_order3(rng):
    """z*_m' from the jets equals the derivative of z*_m along the closed flow."""
    g = build_graph([], [(1, 1.0)], 1)
    gains = EstimatorGains(kappa=(4.0, 3.0), kappa_m=2.0)
    kbar = (1.5, 2.0, 3.0)
    delta = np.array([0.3, -0.2])
    w = rng.normal(size=2)

    def split(y):
        st = EstimatorState(y[:6].reshape(1, 3, 2).copy(), y[6:8].reshape(1, 2).copy(), y[8:10].reshape(1, 2).copy(), y[10:12].reshape(1, 2).copy())
        return st, y[12:18].reshape(3, 2), y[18:24].reshape(3, 2)

    def f(y):
        st, lead, x = split(y)
        der = estimator_derivative(st, lead, g, gains)
        dl = np.zeros_like(lead)
        dl[:-1] = lead[1:]
        dx = np.vstack([x[1:], w])
        return np.concatenate([der.xhat.ravel(), der.eta.ravel(), der.xi.ravel(), der.rho.ravel(), dl.ravel(), dx.ravel()])

    def zstar3(y):
        st, lead, x = split(y)
        J = estimator_jets(st, lead, g, gains)[0]
        return backstepping_errors(x, J, delta, kbar)

    def rk4(y, h, n=10):
        for _ in range(n):
            k1 = f(y); k2 = f(y + h / 2 * k1); k3 = f(y + h / 2 * k2); k4 = f(y + h * k3)  # noqa: E702
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        return y

    y0 = rng.normal(size=24)
    _, _, rate = zstar3(y0)
    h = 1e-3
    pts = {s: zstar3(rk4(y0, s * h / 10))[1][2] for s in (-2, -1, 1, 2)}
    fd = (pts[-2] - 8 * pts[-1] + 8 * pts[1] - pts[2]) / (12 * h)
    np.testing.assert_allclose(rate, fd, rtol=1e-5, atol=1e-5)
