"""Nussbaum-gain adaptive backstepping controller for m-th order followers.

Each follower tracks its own estimate of the leader shifted by a formation
offset. Tracking errors are pushed through the usual backstepping chain;
time derivatives of the virtual controls are formed exactly from Taylor
jets of the local signals (see :func:`estimator.estimator_jets`), never by
finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .numerics import nussbaum

__all__ = [
    "ControllerGains",
    "ControllerState",
    "exp_decay",
    "smooth_sign",
    "backstepping_errors",
    "jet_from_corrections",
    "control_law",
    "adaptation_derivatives",
]


def exp_decay(delta0: float = 0.05) -> Callable[[float], float]:
    """delta(t) = delta0 * exp(-t), integrable with total mass delta0."""

    def delta(t):
        return delta0 * np.exp(-t)

    delta.delta0 = delta0
    return delta


@dataclass(frozen=True)
class ControllerGains:
    kbar: tuple[float, ...] = (0.8, 80.0)
    k_kappa: float = 1.0
    Gamma_theta: np.ndarray = field(default_factory=lambda: 10.0 * np.eye(2))
    Gamma_eps: np.ndarray = field(default_factory=lambda: np.eye(2))
    delta: Callable[[float], float] = field(default_factory=exp_decay)

    def __post_init__(self):
        kbar = tuple(float(k) for k in np.atleast_1d(self.kbar))
        if len(kbar) < 2:
            raise ValueError("backstepping needs m >= 2 gains")
        if any(not k > 0 for k in kbar) or not self.k_kappa > 0:
            raise ValueError("controller gains must be positive")
        for name in ("Gamma_theta", "Gamma_eps"):
            mat = np.atleast_2d(np.array(getattr(self, name), dtype=float))
            if mat.shape[0] != mat.shape[1] or np.any(np.linalg.eigvalsh(0.5 * (mat + mat.T)) <= 0):
                raise ValueError(f"{name} must be square positive definite")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)
        object.__setattr__(self, "kbar", kbar)

    @property
    def order(self) -> int:
        return len(self.kbar)


@dataclass
class ControllerState:
    theta_hat: np.ndarray
    eps_hat: np.ndarray
    kappa: float = 0.0

    @classmethod
    def zeros(cls, r: int, n: int, kappa: float = 0.0) -> "ControllerState":
        return cls(np.zeros(r), np.zeros(n), float(kappa))


def smooth_sign(z, delta):
    """z / sqrt(z^2 + delta^2) componentwise."""
    z = np.asarray(z, dtype=float)
    return z / np.sqrt(z * z + np.asarray(delta, dtype=float) ** 2)


def _d(jet):
    """Taylor-coefficient derivative: drops one order."""
    r = np.arange(1, jet.shape[0])
    return jet[1:] * r.reshape((-1,) + (1,) * (jet.ndim - 1))


def jet_from_corrections(xhat_i, corr_i) -> np.ndarray:
    """Estimator jet for m = 2 from the agent's estimates and injections."""
    xhat_i = np.asarray(xhat_i, dtype=float)
    m, n = xhat_i.shape
    if m != 2:
        raise ValueError("closed-form jet is only available for m = 2")
    J = np.zeros((2, 2, n))
    J[:, 0] = xhat_i
    J[0, 1] = xhat_i[1] + corr_i[0]
    return J


def backstepping_errors(x_i, xhat_jet, delta_i, kbar):
    """Transformed errors, virtual controls and the top virtual-control rate.

    ``x_i`` is the agent's stacked state (m, n); ``xhat_jet`` the (m, m, n)
    Taylor jet of its estimates. Returns ``(zt, zstar, zstar_dot_m)`` where
    ``zt[k]`` is z~_{k+1}, ``zstar[k]`` is z*_{k+1} (row 0 unused, zero).
    """
    x = np.asarray(x_i, dtype=float)
    m, n = x.shape
    if m < 2:
        raise ValueError("the backstepping chain needs m >= 2 blocks")
    kbar = np.asarray(kbar, dtype=float)
    if kbar.size < m:
        raise ValueError(f"{kbar.size} backstepping gains for order {m}")
    J = np.asarray(xhat_jet, dtype=float)
    fact = np.cumprod([1.0] + list(range(1, m + 1)))

    # jets of z_k, k = 1..m, to order m - k + 1 where the plant chain allows it
    z = []
    for k in range(m):
        depth = m - k
        jet = np.zeros((depth, n))
        for r in range(depth):
            jet[r] = x[k + r] / fact[r] - J[k, r]
        if k == 0:
            jet[0] -= np.asarray(delta_i, dtype=float)
        z.append(jet)

    zt = [z[0]]
    zstar = [np.zeros((m, n)), -kbar[0] * z[0]]
    zt.append(z[1] - zstar[1][: z[1].shape[0]])
    for q in range(2, m):
        depth = m - q + 1
        nxt = -kbar[q - 1] * zt[q - 1][:depth] - zt[q - 2][:depth] + _d(zstar[q - 1])[:depth]
        zstar.append(nxt)
        zt.append(z[q] - nxt[: z[q].shape[0]])
    zstar_dot_m = _d(zstar[m - 1])[0]
    zt_now = np.stack([j[0] for j in zt])
    zstar_now = np.zeros((m, n))
    for k in range(1, m):
        zstar_now[k] = zstar[k][0]
    return zt_now, zstar_now, zstar_dot_m


def control_law(zt, f_val, ctrl: ControllerState, gains: ControllerGains, t: float, zstar_dot_m):
    """(u, ubar) with u = N(kappa) * ubar."""
    zt = np.asarray(zt, dtype=float)
    m = zt.shape[0]
    zm = zt[-1]
    prev = zt[-2] if m >= 2 else np.zeros_like(zm)
    sd = smooth_sign(zm, gains.delta(t))
    ubar = (
        gains.kbar[m - 1] * zm
        + prev
        - np.asarray(zstar_dot_m, dtype=float)
        + np.asarray(f_val, dtype=float).T @ ctrl.theta_hat
        + sd * ctrl.eps_hat
    )
    return nussbaum(ctrl.kappa) * ubar, ubar


def adaptation_derivatives(zt_m, ubar, f_val, ctrl: ControllerState, gains: ControllerGains, t: float):
    """(theta_hat', eps_hat', kappa')."""
    zm = np.asarray(zt_m, dtype=float)
    sd = smooth_sign(zm, gains.delta(t))
    deps = gains.Gamma_eps @ (sd * zm)
    dkappa = gains.k_kappa * float(zm @ np.asarray(ubar, dtype=float))
    dtheta = gains.Gamma_theta @ (np.asarray(f_val, dtype=float) @ zm)
    return dtheta, deps, dkappa
