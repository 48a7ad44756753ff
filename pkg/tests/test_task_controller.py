import numpy as np
import pytest

from ftformation.manipulator import TABLE_I, ArmParams, forward_kinematics, jacobian, jacobian_hat, kinematic_regressor
from ftformation.task_controller import (
    TaskControllerState,
    TaskGains,
    pseudo_inverse,
    pseudo_inverse_dot,
    reference_trajectories,
    task_adaptation,
    task_control_law,
    task_errors_and_sliding,
)


def test_sliding_vector():
    e_x, e_v, s_x = task_errors_and_sliding([1, 0], [0, 1], [0, 0], [0, 0], 1.0)
    assert s_x.tolist() == [1.0, 1.0]
    _, _, s_x = task_errors_and_sliding([2, 3], [4, 5], [2, 3], [4, 5], 1.0)
    assert not s_x.any()


def test_control_law_probe():
    ctrl = TaskControllerState(np.zeros(5), np.zeros(4), np.array([1.0, 1.0]), kappa=1.0)
    tau, u = task_control_law(np.array([0.1, 0.0]), np.zeros((2, 5)), np.eye(2), ctrl, TaskGains(), 0.0, delta=0.05)
    np.testing.assert_allclose(u, [-1.094427, 0.0], atol=1e-6)
    np.testing.assert_allclose(tau, u, rtol=1e-12)
    ctrl0 = TaskControllerState(np.zeros(5), np.ones(4), np.zeros(2), kappa=0.4)
    tau, u = task_control_law(np.zeros(2), np.ones((2, 5)), np.eye(2), ctrl0, TaskGains(), 0.0)
    assert not tau.any() and not u.any()


def test_adaptation_examples():
    ctrl = TaskControllerState(np.zeros(5), np.ones(4), np.zeros(2))
    *_, dk = task_adaptation(np.array([1.0, 0.0]), np.zeros(2), np.zeros(2), np.zeros((2, 5)), np.zeros((2, 4)), np.eye(2), np.array([2.0, 5.0]), ctrl, TaskGains(), 0.0)
    assert dk == -2.0
    s_x = np.array([0.3, -0.1])
    dth, da, de, dk = task_adaptation(np.zeros(2), s_x, np.zeros(2), np.ones((2, 5)), np.ones((2, 4)), np.eye(2), np.ones(2), ctrl, TaskGains(alpha_r=0.5), 0.0)
    assert not dth.any() and not de.any() and dk == 0.0
    np.testing.assert_allclose(da, np.ones((2, 4)).T @ s_x)


def test_gain_validation():
    with pytest.raises(ValueError):
        TaskGains(alpha_x=0.7)
    with pytest.raises(ValueError):
        TaskGains(K_s=np.eye(2))
    with pytest.raises(ValueError):
        TaskGains(Lambda=np.eye(3))


def test_pseudo_inverse(rng):
    J = rng.normal(size=(2, 2))
    Jp, P, reg = pseudo_inverse(J)
    assert not reg
    np.testing.assert_allclose(J @ Jp, np.eye(2), atol=1e-10)
    Jp, _, reg = pseudo_inverse(np.array([[1.0, 2.0], [2.0, 4.0]]))
    assert reg and np.all(np.isfinite(Jp))
    Jd = rng.normal(size=(2, 2))
    h = 1e-6
    fd = (pseudo_inverse(J + h * Jd)[0] - pseudo_inverse(J - h * Jd)[0]) / (2 * h)
    np.testing.assert_allclose(pseudo_inverse_dot(J, Jd, P), fd, rtol=1e-6, atol=1e-7)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_reference_acceleration_is_derivative_of_reference_velocity(seed):
    """Along the closed flow with measured task velocity, qr_ddot = d/dt qr_dot."""
    rng = np.random.default_rng(seed)
    p = ArmParams.from_row(TABLE_I[seed], v1=1.1, v2=0.9)
    gains = TaskGains()
    w = rng.normal(size=2)  # joint acceleration, irrelevant to qr_dot'
    c_dot, v_dot = rng.normal(size=2), rng.normal(size=2)
    q0 = np.array([0.3, 1.1]) + 0.1 * rng.normal(size=2)
    y0 = np.concatenate([q0, rng.normal(size=2), rng.uniform(1.5, 2.5, 4), 0.1 * rng.normal(size=2), rng.normal(size=4)])

    def refs(y, t):
        q, qd, a, integ = y[:2], y[2:4], y[4:8], y[8:10]
        chi, vartheta = y[10:12] + t * c_dot, y[12:14] + t * v_dot
        ctrl = TaskControllerState(np.zeros(5), a, np.zeros(2), sx_integral=integ)
        x, xd = forward_kinematics(q, p), jacobian(q, p) @ qd
        return reference_trajectories(q, qd, x, xd, chi, vartheta, c_dot, v_dot, ctrl, gains)

    def f(y, t):
        r = refs(y, t)
        return np.concatenate([y[2:4], w, r.a_hat_dot, r.s_x, np.zeros(4)])

    def step(y, h, n=10):
        t = 0.0
        dt = h / n
        for _ in range(n):
            k1 = f(y, t); k2 = f(y + dt / 2 * k1, t + dt / 2); k3 = f(y + dt / 2 * k2, t + dt / 2); k4 = f(y + dt * k3, t + dt)  # noqa: E702
            y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += dt
        return y, t

    h = 1e-3
    vals = {}
    for s in (-2, -1, 1, 2):
        y, t = step(y0, s * h)
        vals[s] = refs(y, t).qr_dot
    fd = (vals[-2] - 8 * vals[-1] + 8 * vals[1] - vals[2]) / (12 * h)
    np.testing.assert_allclose(refs(y0, 0.0).qr_ddot, fd, rtol=1e-6, atol=1e-6)


def test_exact_kinematics_make_sliding_vectors_consistent(rng):
    """With a_hat = a, J s = s_x + alpha_r int s_x."""
    p = ArmParams.from_row(TABLE_I[1])
    gains = TaskGains()
    q, qd = np.array([0.2, 1.3]), rng.normal(size=2)
    integ = rng.normal(size=2)
    ctrl = TaskControllerState(np.zeros(5), np.array([p.l1, p.l2, p.l1, p.l2]), np.zeros(2), sx_integral=integ)
    chi, vt = rng.normal(size=2), rng.normal(size=2)
    r = reference_trajectories(q, qd, forward_kinematics(q, p), jacobian(q, p) @ qd, chi, vt, np.zeros(2), np.zeros(2), ctrl, gains)
    np.testing.assert_allclose(jacobian_hat(q, ctrl.a_hat) @ r.s, r.s_x + gains.alpha_r * integ, atol=1e-12)
    assert not kinematic_regressor(q, np.zeros(2)).any()
