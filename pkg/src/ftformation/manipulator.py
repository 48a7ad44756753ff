"""Two-link planar manipulator: dynamics, kinematics and regressors.

The kinematic parameter vector is ordered ``a = (l1 v1, l2 v1, l1 v2, l2 v2)``
so that ``Z(q, qdot) a = J(q) qdot`` with Z laid out as

    [[-s1 qd1, -s12 (qd1 + qd2), 0,       0                ],
     [ 0,       0,               c1 qd1,  c12 (qd1 + qd2) ]].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .plant import FaultProfile, HEALTHY

__all__ = [
    "GRAVITY",
    "ArmParams",
    "ArmState",
    "theta_vector",
    "kinematic_params",
    "dynamics_matrices",
    "friction",
    "forward_kinematics",
    "forward_kinematics_hat",
    "jacobian",
    "jacobian_hat",
    "jacobian_hat_dot",
    "kinematic_regressor",
    "dynamic_regressor",
    "arm_derivative",
    "potential_energy",
    "kinetic_energy",
    "inverse_kinematics",
    "paper_arms",
    "TABLE_I",
]

GRAVITY = 9.81

# m1, m2, I1, I2, l1, l2, lc1, lc2
TABLE_I = (
    (1.5, 1.3, 0.50, 0.43, 2.0, 2.0, 1.00, 1.00),
    (1.2, 1.5, 0.53, 0.36, 2.3, 1.7, 1.15, 0.85),
    (1.2, 1.3, 0.32, 0.52, 1.8, 2.2, 0.90, 1.10),
    (1.8, 1.5, 0.66, 0.45, 2.1, 1.9, 1.05, 0.95),
    (1.7, 1.6, 0.56, 0.43, 2.0, 1.8, 1.00, 0.90),
    (1.9, 1.3, 0.46, 0.48, 1.7, 2.1, 0.85, 1.05),
)


@dataclass(frozen=True)
class ArmParams:
    m1: float
    m2: float
    I1: float
    I2: float
    l1: float
    l2: float
    lc1: float
    lc2: float
    v1: float = 1.0
    v2: float = 1.0
    Fv: np.ndarray = field(default_factory=lambda: np.eye(2))
    Fc: np.ndarray = field(default_factory=lambda: np.ones((2, 2)))
    grav: float = GRAVITY

    def __post_init__(self):
        for name in ("m1", "m2", "I1", "I2", "l1", "l2", "lc1", "lc2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"arm parameter {name} must be positive")
        if not (self.v1 > 0 and self.v2 > 0):
            raise ValueError("scaling factors must be positive")
        for name in ("Fv", "Fc"):
            mat = np.array(getattr(self, name), dtype=float)
            if mat.shape != (2, 2):
                raise ValueError(f"{name} must be 2x2")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)

    @classmethod
    def from_row(cls, row, **kw) -> "ArmParams":
        return cls(*row, **kw)


@dataclass
class ArmState:
    q: np.ndarray
    qdot: np.ndarray


def theta_vector(p: ArmParams) -> np.ndarray:
    return np.array(
        [
            p.I1 + p.m1 * p.lc1**2 + p.m2 * p.l1**2,
            p.I2 + p.m2 * p.lc2**2,
            p.m2 * p.l1 * p.lc2,
            (p.m1 + p.m2) * p.l1,
            p.m2 * p.l2,
        ]
    )


def kinematic_params(p: ArmParams) -> np.ndarray:
    return np.array([p.l1 * p.v1, p.l2 * p.v1, p.l1 * p.v2, p.l2 * p.v2])


def _mcg(q, qd, th, grav):
    c2, s2 = np.cos(q[1]), np.sin(q[1])
    m12 = th[1] + th[2] * c2
    M = np.array([[th[0] + th[1] + 2.0 * th[2] * c2, m12], [m12, th[1]]])
    C = np.array(
        [
            [-th[2] * s2 * qd[1], -th[2] * s2 * (qd[0] + qd[1])],
            [th[2] * s2 * qd[0], 0.0],
        ]
    )
    c1, c12 = np.cos(q[0]), np.cos(q[0] + q[1])
    G = np.array([th[3] * grav * c1 + th[4] * grav * c12, th[4] * grav * c12])
    return M, C, G


def dynamics_matrices(s: ArmState, p: ArmParams):
    """(M, C, G) at the given joint state."""
    return _mcg(np.asarray(s.q, float), np.asarray(s.qdot, float), theta_vector(p), p.grav)


def friction(qdot, p: ArmParams) -> np.ndarray:
    qd = np.asarray(qdot, dtype=float)
    return p.Fv @ np.tanh(qd) + p.Fc @ np.sign(qd)


def forward_kinematics_hat(q, a) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    q12 = q[0] + q[1]
    return np.array([np.cos(q12) * a[1] + np.cos(q[0]) * a[0], np.sin(q12) * a[3] + np.sin(q[0]) * a[2]])


def forward_kinematics(q, p: ArmParams) -> np.ndarray:
    return forward_kinematics_hat(q, kinematic_params(p))


def jacobian_hat(q, a) -> np.ndarray:
    """Jacobian with the kinematic products replaced by ``a`` (true or estimated)."""
    q = np.asarray(q, dtype=float)
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s12, c12 = np.sin(q[0] + q[1]), np.cos(q[0] + q[1])
    return np.array(
        [
            [-s12 * a[1] - s1 * a[0], -s12 * a[1]],
            [c12 * a[3] + c1 * a[2], c12 * a[3]],
        ]
    )


def jacobian(q, p: ArmParams) -> np.ndarray:
    return jacobian_hat(q, kinematic_params(p))


def jacobian_hat_dot(q, qdot, a, adot) -> np.ndarray:
    """Total time derivative of ``jacobian_hat(q, a)`` along (qdot, adot)."""
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qdot, dtype=float)
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s12, c12 = np.sin(q[0] + q[1]), np.cos(q[0] + q[1])
    w = qd[0] + qd[1]
    return np.array(
        [
            [
                -c12 * w * a[1] - c1 * qd[0] * a[0] - s12 * adot[1] - s1 * adot[0],
                -c12 * w * a[1] - s12 * adot[1],
            ],
            [
                -s12 * w * a[3] - s1 * qd[0] * a[2] + c12 * adot[3] + c1 * adot[2],
                -s12 * w * a[3] + c12 * adot[3],
            ],
        ]
    )


def kinematic_regressor(q, qdot) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qdot, dtype=float)
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s12, c12 = np.sin(q[0] + q[1]), np.cos(q[0] + q[1])
    w = qd[0] + qd[1]
    return np.array([[-s1 * qd[0], -s12 * w, 0.0, 0.0], [0.0, 0.0, c1 * qd[0], c12 * w]])


def dynamic_regressor(q, qdot, qr_dot, qr_ddot, grav: float = GRAVITY) -> np.ndarray:
    """Y with Y theta = M(q) qr_ddot + C(q, qdot) qr_dot + G(q)."""
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qdot, dtype=float)
    v = np.asarray(qr_dot, dtype=float)
    acc = np.asarray(qr_ddot, dtype=float)
    c2, s2 = np.cos(q[1]), np.sin(q[1])
    c1, c12 = np.cos(q[0]), np.cos(q[0] + q[1])
    return np.array(
        [
            [
                acc[0],
                acc[0] + acc[1],
                c2 * (2.0 * acc[0] + acc[1]) - s2 * (qd[1] * v[0] + (qd[0] + qd[1]) * v[1]),
                grav * c1,
                grav * c12,
            ],
            [0.0, acc[0] + acc[1], c2 * acc[0] + s2 * qd[0] * v[0], 0.0, grav * c12],
        ]
    )


def arm_derivative(
    s: ArmState,
    tau_applied,
    t: float,
    p: ArmParams,
    fault: FaultProfile = HEALTHY,
    g_fn=lambda t: 1.0,
    d_fn=lambda t: np.zeros(2),
):
    """(qdot, qddot) of the faulty arm driven by ``tau_applied``."""
    q = np.asarray(s.q, dtype=float)
    qd = np.asarray(s.qdot, dtype=float)
    M, C, G = _mcg(q, qd, theta_vector(p), p.grav)
    phi, psi = fault.coefficients(t, 2)
    tau_a = phi * np.asarray(tau_applied, dtype=float) + psi
    rhs = g_fn(t) * tau_a + np.asarray(d_fn(t), dtype=float) - C @ qd - G - friction(qd, p)
    qdd = np.linalg.solve(M, rhs)
    if not np.all(np.isfinite(qdd)):
        raise FloatingPointError(f"non-finite joint acceleration at t={t}")
    return qd.copy(), qdd


def potential_energy(q, p: ArmParams) -> float:
    th = theta_vector(p)
    q = np.asarray(q, dtype=float)
    return float(p.grav * (th[3] * np.sin(q[0]) + th[4] * np.sin(q[0] + q[1])))


def kinetic_energy(s: ArmState, p: ArmParams) -> float:
    M, _, _ = dynamics_matrices(s, p)
    qd = np.asarray(s.qdot, dtype=float)
    return float(0.5 * qd @ M @ qd)


def inverse_kinematics(x, p: ArmParams, elbow: int = 1) -> np.ndarray:
    """Joint angles placing the end effector at ``x`` (elbow = +1 or -1)."""
    x = np.asarray(x, dtype=float)
    # scale the task coordinates back to plain link geometry
    xs = np.array([x[0] / p.v1, x[1] / p.v2])
    r2 = float(xs @ xs)
    c = (r2 - p.l1**2 - p.l2**2) / (2.0 * p.l1 * p.l2)
    if abs(c) > 1.0:
        raise ValueError(f"target {x} is outside the workspace")
    q2 = elbow * np.arccos(c)
    q1 = np.arctan2(xs[1], xs[0]) - np.arctan2(p.l2 * np.sin(q2), p.l1 + p.l2 * np.cos(q2))
    return np.array([q1, q2])


def paper_arms(**kw) -> list[ArmParams]:
    return [ArmParams.from_row(row, **kw) for row in TABLE_I]
