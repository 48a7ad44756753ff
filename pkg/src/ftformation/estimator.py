"""Distributed finite-time estimator of the leader state.

Every follower i keeps estimates ``xhat[i, k]`` of the leader blocks x_{0,k},
an estimate ``eta[i]`` of the leader's top derivative, and a pinned-agent
differentiator (``xi[i]``, ``rho[i]``) that reconstructs that derivative from
the raw leader signal. All couplings go through the graph weights, so an
agent only sees its neighbours and, when pinned, the leader.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .graph import DirectedLeaderGraph
from .numerics import EXACT, SignumPolicy, signum, taylor_sig_pow

__all__ = [
    "EstimatorGains",
    "EstimatorState",
    "EstimatorDerivative",
    "consensus",
    "estimator_derivative",
    "estimation_errors",
    "task_estimator_derivative",
    "estimator_jets",
    "gain_table",
]


@dataclass(frozen=True)
class EstimatorGains:
    """Gains for one agent. ``kappa`` holds kappa_1..kappa_{m-1}."""

    kappa: tuple[float, ...] = (15.0,)
    kappa_m: float = 5.0
    kappa_eta: float = 8.0
    kappa_xi: float = 6.0
    kappa_rho: float = 4.0
    alpha: float = 0.7
    beta: float = 0.7
    gamma: float = 0.7

    def __post_init__(self):
        object.__setattr__(self, "kappa", tuple(float(k) for k in np.atleast_1d(self.kappa)))
        for name in ("kappa_m", "kappa_eta", "kappa_xi", "kappa_rho"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if any(not k > 0 for k in self.kappa):
            raise ValueError("kappa gains must be positive")
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not 0.5 < v < 1.0:
                raise ValueError(f"{name} must lie in (0.5, 1), got {v}")

    def order_gains(self, m: int) -> np.ndarray:
        """kappa_1..kappa_m, repeating the last lower-order gain if too few are given."""
        lower = list(self.kappa[: m - 1])
        while len(lower) < m - 1:
            lower.append(lower[-1] if lower else 1.0)
        return np.array(lower + [self.kappa_m])


@dataclass
class EstimatorState:
    xhat: np.ndarray  # (N, m, n)
    eta: np.ndarray  # (N, n)
    xi: np.ndarray  # (N, n)
    rho: np.ndarray  # (N, n)

    @classmethod
    def zeros(cls, n_agents: int, order: int, dim: int) -> "EstimatorState":
        return cls(
            np.zeros((n_agents, order, dim)),
            np.zeros((n_agents, dim)),
            np.zeros((n_agents, dim)),
            np.zeros((n_agents, dim)),
        )

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.xhat.shape


class EstimatorDerivative(NamedTuple):
    xhat: np.ndarray
    eta: np.ndarray
    xi: np.ndarray
    rho: np.ndarray
    corrections: np.ndarray  # (N, m, n): the kappa * sig(...) injection on each block


@dataclass(frozen=True)
class _GainTable:
    k: np.ndarray  # (N, m)
    eta: np.ndarray
    xi: np.ndarray
    rho: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    source: tuple = field(default=(), compare=False)


def gain_table(gains: EstimatorGains | Sequence[EstimatorGains], n_agents: int, order: int) -> _GainTable:
    if isinstance(gains, EstimatorGains):
        gains = [gains] * n_agents
    gains = list(gains)
    if len(gains) != n_agents:
        raise ValueError(f"{len(gains)} gain sets for {n_agents} agents")
    col = lambda name: np.array([getattr(g, name) for g in gains], dtype=float)  # noqa: E731
    return _GainTable(
        np.stack([g.order_gains(order) for g in gains]),
        col("kappa_eta"),
        col("kappa_xi"),
        col("kappa_rho"),
        col("alpha"),
        col("beta"),
        col("gamma"),
        tuple(gains),
    )


def _sig(x, p):
    """sig^p with a per-agent exponent broadcast over trailing axes."""
    p = np.asarray(p, dtype=float).reshape((-1,) + (1,) * (np.ndim(x) - 1))
    return np.sign(x) * np.abs(x) ** p


def consensus(X, g: DirectedLeaderGraph, target) -> np.ndarray:
    """sum_j a_ij (X_j - X_i) + a_i0 (target_i - X_i) for every agent i.

    ``target`` is either one vector seen by every pinned agent or a per-agent
    array; rows of unpinned agents are multiplied by a_i0 = 0.
    """
    A = g.follower_weights
    b = g.leader_weights
    X = np.asarray(X, dtype=float)
    target = np.broadcast_to(np.asarray(target, dtype=float), X.shape)
    deg = A.sum(axis=1)
    shape = (-1,) + (1,) * (X.ndim - 1)
    flat = X.reshape(X.shape[0], -1)
    coupled = (A @ flat).reshape(X.shape) - deg.reshape(shape) * X
    pin = b.reshape(shape)
    # keep unpinned rows free of whatever the target holds there
    lead = np.where(pin > 0, pin * (target - X), 0.0)
    return coupled + lead


def _check(states: EstimatorState, g: DirectedLeaderGraph):
    if states.xhat.ndim != 3:
        raise ValueError("xhat must have shape (N, m, n)")
    if states.xhat.shape[0] != g.n_followers:
        raise ValueError(f"estimator holds {states.xhat.shape[0]} agents, graph has {g.n_followers}")


def estimator_derivative(
    states: EstimatorState,
    leader_obs,
    g: DirectedLeaderGraph,
    gains,
    policy: SignumPolicy = EXACT,
) -> EstimatorDerivative:
    """Right-hand side of the estimator for all agents at once.

    ``leader_obs`` is the leader state (m, n), or a per-agent copy
    (N, m, n) in which only pinned rows are read.
    """
    _check(states, g)
    N, m, n = states.xhat.shape
    tab = gains if isinstance(gains, _GainTable) else gain_table(gains, N, m)
    lead = np.asarray(leader_obs, dtype=float)
    if lead.shape == (m, n):
        lead = np.broadcast_to(lead, (N, m, n))
    elif lead.shape != (N, m, n):
        raise ValueError(f"leader observation has shape {lead.shape}")
    b = g.leader_weights

    corr = np.empty_like(states.xhat)
    for k in range(m):
        arg = consensus(states.xhat[:, k], g, lead[:, k])
        expo = tab.gamma if k < m - 1 else tab.beta
        corr[:, k] = tab.k[:, k : k + 1] * _sig(arg, expo)
    dxhat = np.empty_like(states.xhat)
    dxhat[:, :-1] = states.xhat[:, 1:] + corr[:, :-1]
    dxhat[:, -1] = states.eta + corr[:, -1]

    e_eta = consensus(states.eta, g, states.rho)
    deta = tab.eta[:, None] * (_sig(e_eta, tab.alpha) + signum(e_eta, policy))

    top = np.where(b[:, None] > 0, lead[:, -1], 0.0)
    err = top - states.xi
    pin = b[:, None]
    drho = tab.rho[:, None] * pin * signum(err, policy)
    dxi = states.rho + tab.xi[:, None] * pin * _sig(err, np.full(N, 0.5))
    return EstimatorDerivative(dxhat, deta, dxi, drho, corr)


def task_estimator_derivative(
    chi,
    vartheta,
    eta,
    xi,
    rho,
    task_obs,
    g: DirectedLeaderGraph,
    gains,
    policy: SignumPolicy = EXACT,
) -> EstimatorDerivative:
    """Task-space estimator: chi tracks x_d, vartheta tracks xdot_d.

    ``task_obs`` is (x_d, xdot_d) as a (2, n) array. This is the same law
    as :func:`estimator_derivative` with m = 2.
    """
    xhat = np.stack([np.asarray(chi, float), np.asarray(vartheta, float)], axis=1)
    st = EstimatorState(xhat, np.asarray(eta, float), np.asarray(xi, float), np.asarray(rho, float))
    return estimator_derivative(st, task_obs, g, gains, policy)


def estimation_errors(states: EstimatorState, leader, leader_top_rate) -> dict[str, np.ndarray]:
    """Differences of every estimate from the leader quantity it tracks."""
    leader = np.asarray(leader, dtype=float)
    top = np.asarray(leader_top_rate, dtype=float)
    return {
        "xhat": states.xhat - leader[None],
        "eta": states.eta - top[None],
        "xi": states.xi - leader[-1][None],
        "rho": states.rho - top[None],
    }


def estimator_jets(states: EstimatorState, leader, g: DirectedLeaderGraph, gains) -> np.ndarray:
    """Taylor coefficients of every estimate along the current flow.

    Returns J with shape (N, m, m, n): J[i, k, r] is the r-th Taylor
    coefficient (d^r/dt^r divided by r!) of xhat_{i,k+1}, filled for
    r <= m-1-k, which is exactly what the backstepping recursion needs.
    The leader chain supplies its own coefficients x_{0,k+r} / r!.
    """
    _check(states, g)
    N, m, n = states.xhat.shape
    tab = gains if isinstance(gains, _GainTable) else gain_table(gains, N, m)
    leader = np.asarray(leader, dtype=float).reshape(m, n)
    fact = np.cumprod([1.0] + list(range(1, m)))
    lead_jet = np.zeros((m, m, n))
    for k in range(m):
        for r in range(m - k):
            lead_jet[k, r] = leader[k + r] / fact[r]
    J = np.zeros((N, m, m, n))
    J[:, :, 0] = states.xhat
    for r in range(m - 1):
        for k in range(m - 1 - r):
            # coefficient r+1 of xhat_k comes from coefficient r of xhat_{k+1} + c_k
            arg = np.stack([consensus(J[:, k, s], g, lead_jet[k, s]) for s in range(r + 1)], axis=1)
            corr = np.empty_like(arg)
            for i in range(N):
                corr[i] = tab.k[i, k] * taylor_sig_pow(arg[i], tab.gamma[i])
            J[:, k, r + 1] = (J[:, k + 1, r] + corr[:, r]) / (r + 1)
    return J
