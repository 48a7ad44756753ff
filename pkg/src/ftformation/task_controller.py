"""Task-space fault-tolerant controller for networked two-link arms.

The controller measures joint state and end-effector position/velocity,
uses its estimates chi (position) and vartheta (velocity) of the shared
reference, and adapts the dynamic parameters theta_hat, the kinematic
parameters a_hat, the disturbance bound eps_hat and the Nussbaum argument
kappa. True arm parameters are never read here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .controller import exp_decay, smooth_sign
from .manipulator import (
    GRAVITY,
    dynamic_regressor,
    jacobian_hat,
    jacobian_hat_dot,
    kinematic_regressor,
)
from .numerics import nussbaum

__all__ = [
    "TaskGains",
    "TaskControllerState",
    "References",
    "REG_DET",
    "REG_LAMBDA",
    "task_errors_and_sliding",
    "pseudo_inverse",
    "pseudo_inverse_dot",
    "reference_trajectories",
    "task_control_law",
    "task_adaptation",
]

REG_DET = 1e-10
REG_LAMBDA = 1e-8


@dataclass(frozen=True)
class TaskGains:
    alpha_x: float = 1.0
    alpha_r: float = 0.5
    K_s: np.ndarray = field(default_factory=lambda: 2.0 * np.eye(2))
    k_kappa: float = 1.0
    Gamma_theta: np.ndarray = field(default_factory=lambda: 10.0 * np.eye(5))
    Gamma_eps: np.ndarray = field(default_factory=lambda: np.eye(2))
    Lambda: np.ndarray = field(default_factory=lambda: np.eye(4))
    delta: Callable[[float], float] = field(default_factory=exp_decay)
    grav: float = GRAVITY

    def __post_init__(self):
        if not (self.alpha_x > 0.75):
            raise ValueError("alpha_x must exceed 3/4")
        if not (self.alpha_r > 0 and self.k_kappa > 0):
            raise ValueError("alpha_r and k_kappa must be positive")
        shapes = {"K_s": 2, "Gamma_theta": 5, "Gamma_eps": 2, "Lambda": 4}
        for name, size in shapes.items():
            mat = np.array(getattr(self, name), dtype=float)
            if mat.ndim == 0:
                mat = float(mat) * np.eye(size)
            if mat.shape != (size, size):
                raise ValueError(f"{name} must be {size}x{size}")
            if np.any(np.linalg.eigvalsh(0.5 * (mat + mat.T)) <= 0):
                raise ValueError(f"{name} must be positive definite")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)
        if np.any(np.linalg.eigvalsh(0.5 * (self.K_s + self.K_s.T)) <= 1.0):
            raise ValueError("K_s - I must be positive definite")


@dataclass
class TaskControllerState:
    theta_hat: np.ndarray
    a_hat: np.ndarray
    eps_hat: np.ndarray
    kappa: float = 0.0
    sx_integral: np.ndarray = field(default_factory=lambda: np.zeros(2))


class References(NamedTuple):
    qr_dot: np.ndarray
    qr_ddot: np.ndarray
    s: np.ndarray
    s_x: np.ndarray
    e_x: np.ndarray
    e_v: np.ndarray
    J_hat: np.ndarray
    a_hat_dot: np.ndarray
    regularized: bool


def task_errors_and_sliding(x, xdot, chi, vartheta, alpha_x: float):
    """(e_x, e_v, s_x) with s_x = e_v + alpha_x e_x."""
    e_x = np.asarray(x, dtype=float) - np.asarray(chi, dtype=float)
    e_v = np.asarray(xdot, dtype=float) - np.asarray(vartheta, dtype=float)
    return e_x, e_v, e_v + alpha_x * e_x


def pseudo_inverse(J):
    """Right pseudo-inverse J^T (J J^T + lam I)^-1 with lam > 0 only near singularity."""
    J = np.asarray(J, dtype=float)
    JJt = J @ J.T
    reg = np.linalg.det(JJt) < REG_DET
    P = np.linalg.inv(JJt + (REG_LAMBDA if reg else 0.0) * np.eye(JJt.shape[0]))
    return J.T @ P, P, bool(reg)


def pseudo_inverse_dot(J, Jdot, P):
    """d/dt of J^T P with P = (J J^T + lam I)^-1."""
    dP = -P @ (Jdot @ J.T + J @ Jdot.T) @ P
    return Jdot.T @ P + J.T @ dP


def reference_trajectories(
    q,
    qdot,
    x,
    xdot,
    chi,
    vartheta,
    chi_dot,
    vartheta_dot,
    ctrl: TaskControllerState,
    gains: TaskGains,
    exdot_estimated: bool = False,
) -> References:
    """Reference joint velocity/acceleration and the joint sliding vector.

    ``chi_dot`` and ``vartheta_dot`` are the estimator right-hand sides.
    ``x``/``xdot`` are the measured end-effector position and velocity; with
    ``exdot_estimated`` the error rate uses J_hat(q) qdot instead of ``xdot``.
    """
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    e_x, e_v, s_x = task_errors_and_sliding(x, xdot, chi, vartheta, gains.alpha_x)
    Jh = jacobian_hat(q, ctrl.a_hat)
    Jp, P, reg = pseudo_inverse(Jh)
    w = np.asarray(vartheta, float) - gains.alpha_x * e_x - gains.alpha_r * ctrl.sx_integral
    qr_dot = Jp @ w
    s = qdot - qr_dot
    Z = kinematic_regressor(q, qdot)
    a_dot = gains.Lambda @ Z.T @ (s_x + gains.alpha_r * ctrl.sx_integral - Jh @ s)
    Jh_dot = jacobian_hat_dot(q, qdot, ctrl.a_hat, a_dot)
    Jp_dot = pseudo_inverse_dot(Jh, Jh_dot, P)
    meas = Jh @ qdot if exdot_estimated else np.asarray(xdot, dtype=float)
    ex_dot = meas - np.asarray(chi_dot, dtype=float)
    qr_ddot = Jp @ (np.asarray(vartheta_dot, float) - gains.alpha_x * ex_dot - gains.alpha_r * s_x) + Jp_dot @ Jh @ qr_dot
    return References(qr_dot, qr_ddot, s, s_x, e_x, e_v, Jh, a_dot, reg)


def task_control_law(s, Y, J_hat, ctrl: TaskControllerState, gains: TaskGains, t: float, delta=None):
    """(tau, u) with tau = N(kappa) u. ``delta`` overrides ``gains.delta(t)``."""
    s = np.asarray(s, dtype=float)
    sd = smooth_sign(s, gains.delta(t) if delta is None else delta)
    u = np.asarray(Y, float) @ ctrl.theta_hat - J_hat.T @ gains.K_s @ J_hat @ s - sd * ctrl.eps_hat
    return nussbaum(ctrl.kappa) * u, u


def task_adaptation(s, s_x, sx_integral, Y, Z, J_hat, u, ctrl: TaskControllerState, gains: TaskGains, t: float, delta=None):
    """(theta_hat', a_hat', eps_hat', kappa')."""
    s = np.asarray(s, dtype=float)
    sd = smooth_sign(s, gains.delta(t) if delta is None else delta)
    dtheta = -gains.Gamma_theta @ (np.asarray(Y, float).T @ s)
    da = gains.Lambda @ (np.asarray(Z, float).T @ (np.asarray(s_x) + gains.alpha_r * np.asarray(sx_integral) - J_hat @ s))
    deps = gains.Gamma_eps @ (sd * s)
    dkappa = -gains.k_kappa * float(s @ np.asarray(u, float))
    return dtheta, da, deps, dkappa


def regressor_at(q, qdot, refs: References, gains: TaskGains):
    return dynamic_regressor(q, qdot, refs.qr_dot, refs.qr_ddot, gains.grav)
