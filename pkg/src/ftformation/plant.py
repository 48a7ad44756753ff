"""Follower and leader dynamics with actuator faults.

A follower of order m and dimension n is an integrator chain whose last block
is driven by ``f(x)^T theta + g(x) u_a + d(x, t)``; ``u_a`` is the output of a
possibly faulty actuator ``phi(t) u + psi(t)``. States are passed stacked as
an (m, n) array, row k holding x_{i,k+1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "FollowerModel",
    "LeaderModel",
    "FaultSegment",
    "FaultProfile",
    "apply_fault",
    "follower_derivative",
    "leader_derivative",
    "paper_second_order",
    "paper_leader",
    "paper_fault_schedule",
    "paper_leader_initial",
    "paper_follower_initial",
    "hexagon_offsets",
]


@dataclass(frozen=True)
class FollowerModel:
    order: int
    dim: int
    theta: np.ndarray
    f: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], float]
    d: Callable[[np.ndarray, float], np.ndarray]
    name: str = "follower"

    def __post_init__(self):
        if self.order < 1 or self.dim < 1:
            raise ValueError("order and dim must be positive")
        theta = np.array(self.theta, dtype=float).ravel()
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @property
    def n_params(self) -> int:
        return self.theta.size

    def shaped(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.size != self.order * self.dim:
            raise ValueError(f"state has {x.size} entries, model expects {self.order}x{self.dim}")
        return x.reshape(self.order, self.dim)


@dataclass(frozen=True)
class LeaderModel:
    order: int
    dim: int
    o: Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class FaultSegment:
    t_start: float
    phi: Callable[[float], float]
    psi: Callable[[float], np.ndarray]


@dataclass(frozen=True)
class FaultProfile:
    """Piecewise actuator fault; healthy (phi=1, psi=0) before the first segment."""

    segments: tuple[FaultSegment, ...] = field(default_factory=tuple)

    def __post_init__(self):
        segs = tuple(self.segments)
        starts = [s.t_start for s in segs]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("fault segment start times must be strictly increasing")
        object.__setattr__(self, "segments", segs)

    def active(self, t: float) -> FaultSegment | None:
        seg = None
        for s in self.segments:
            if t >= s.t_start:
                seg = s
            else:
                break
        return seg

    def coefficients(self, t: float, n: int) -> tuple[float, np.ndarray]:
        seg = self.active(t)
        if seg is None:
            return 1.0, np.zeros(n)
        return float(seg.phi(t)), np.broadcast_to(np.asarray(seg.psi(t), dtype=float), (n,)).copy()

    def coefficients_on(self, times: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised (phi, psi) over an array of times."""
        times = np.asarray(times, dtype=float)
        phi = np.ones_like(times)
        psi = np.zeros((times.size, n))
        for k, s in enumerate(self.segments):
            end = self.segments[k + 1].t_start if k + 1 < len(self.segments) else np.inf
            mask = (times >= s.t_start) & (times < end)
            if mask.any():
                tm = times[mask]
                phi[mask] = np.broadcast_to(s.phi(tm), tm.shape)
                vals = np.asarray(s.psi(tm), dtype=float)
                psi[mask] = vals.T if vals.ndim == 2 and vals.shape[0] == n else np.broadcast_to(vals, (tm.size, n))
        return phi, psi


HEALTHY = FaultProfile()


def apply_fault(u, t: float, profile: FaultProfile) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    phi, psi = profile.coefficients(t, u.size)
    return phi * u + psi


def follower_derivative(x_i, u_a, t: float, model: FollowerModel) -> np.ndarray:
    x = model.shaped(x_i)
    u_a = np.asarray(u_a, dtype=float)
    if u_a.shape != (model.dim,):
        raise ValueError(f"input has shape {u_a.shape}, expected ({model.dim},)")
    out = np.empty_like(x)
    out[:-1] = x[1:]
    out[-1] = model.f(x).T @ model.theta + model.g(x) * u_a + model.d(x, t)
    return out.reshape(np.shape(x_i))


def leader_derivative(x0, t: float, model: LeaderModel) -> np.ndarray:
    x = np.asarray(x0, dtype=float)
    xs = x.reshape(model.order, model.dim)
    out = np.empty_like(xs)
    out[:-1] = xs[1:]
    out[-1] = model.o(xs, t)
    return out.reshape(x.shape)


def _paper_f(x):
    return np.array([[-np.sin(x[0, 0]), x[1, 1]], [x[1, 0], -x[0, 1]]])


def paper_second_order(i: int) -> FollowerModel:
    """Second-order planar follower i in 1..6 of the formation study."""
    if not 1 <= i <= 6:
        raise ValueError("paper followers are numbered 1..6")
    p = (-1) ** i * 0.1 * i

    def g(x):
        return p * np.cos(float(np.sum(x * x)))

    def d(x, t):
        return np.array(
            [
                0.1 * np.sin(x[0, 0] + x[0, 1]) - 0.3 * np.cos(0.3 * t),
                0.2 * np.cos(x[1, 0] * x[1, 1]) + 0.5 * np.sin(0.5 * t),
            ]
        )

    return FollowerModel(2, 2, np.array([0.3 * i, 0.5 * i]), _paper_f, g, d, name=f"follower{i}")


def paper_leader() -> LeaderModel:
    def o(x, t):
        return np.array(
            [
                0.1 * np.cos(0.1 * x[0, 0] + x[1, 1]) + 0.8 * np.sin(t),
                0.2 * np.sin(x[1, 0] + 0.2 * x[0, 1]) + 0.8 * np.cos(t),
            ]
        )

    return LeaderModel(2, 2, o)


def paper_fault_schedule() -> FaultProfile:
    return FaultProfile(
        (
            FaultSegment(
                3.0,
                lambda t: 0.2 * np.sin(t) + 0.4,
                lambda t: np.array([2.0 + 0.0 * np.asarray(t), 2.0 * np.cos(t)]),
            ),
            FaultSegment(
                6.0,
                lambda t: 0.3 * np.cos(t) + 0.6,
                lambda t: np.array([np.sin(0.1 * t), 3.0 + 0.0 * np.asarray(t)]),
            ),
        )
    )


def paper_leader_initial() -> np.ndarray:
    return np.array([[0.0, -2.0], [1.0, 0.0]])


def paper_follower_initial() -> np.ndarray:
    pos = np.array([[-0.3, -0.5], [-2.0, -1.6], [1.0, -3.0], [0.2, 0.8], [2.0, -1.5], [2.5, 1.8]])
    out = np.zeros((6, 2, 2))
    out[:, 0] = pos
    return out


def hexagon_offsets(radius: float = 1.0) -> np.ndarray:
    s = np.sqrt(3.0) / 2.0
    return radius * np.array([[-1.0, 0.0], [-0.5, s], [0.5, s], [1.0, 0.0], [0.5, -s], [-0.5, -s]])


def check_fault_bounds(profile: FaultProfile, times: Sequence[float]) -> bool:
    """Witness 0 < phi <= 1 on the sampled times."""
    times = np.asarray(times, dtype=float)
    phi = np.ones_like(times)
    for k, s in enumerate(profile.segments):
        end = profile.segments[k + 1].t_start if k + 1 < len(profile.segments) else np.inf
        mask = (times >= s.t_start) & (times < end)
        if mask.any():
            phi[mask] = np.broadcast_to(s.phi(times[mask]), (int(mask.sum()),))
    return bool(np.all((phi > 0) & (phi <= 1)))
