"""Scalar primitives, the fixed-step integrator and settling-time detection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .trace import DivergenceReport, SimTrace

__all__ = [
    "SignumPolicy",
    "EXACT",
    "IntegratorConfig",
    "sig_pow",
    "signum",
    "nussbaum",
    "integrate",
    "settling_time",
    "running_nussbaum_mean",
    "STATE_NORM_LIMIT",
    "KAPPA_LIMIT",
]

STATE_NORM_LIMIT = 1e8
KAPPA_LIMIT = 25.0


@dataclass(frozen=True)
class SignumPolicy:
    mode: str = "exact"
    epsilon: float = 1e-3

    def __post_init__(self):
        if self.mode not in ("exact", "boundary_layer"):
            raise ValueError(f"unknown signum mode {self.mode!r}")
        if self.mode == "boundary_layer" and not self.epsilon > 0:
            raise ValueError("boundary_layer signum needs epsilon > 0")

    @classmethod
    def boundary_layer(cls, epsilon: float = 1e-3) -> "SignumPolicy":
        return cls("boundary_layer", float(epsilon))


EXACT = SignumPolicy()


def sig_pow(x, theta: float):
    """sgn(x)|x|^theta componentwise, theta in (0, 1]."""
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"exponent must lie in (0, 1], got {theta}")
    x = np.asarray(x, dtype=float)
    if theta == 1.0:
        return x.copy()
    return np.sign(x) * np.abs(x) ** theta


def signum(x, policy: SignumPolicy = EXACT):
    x = np.asarray(x, dtype=float)
    if policy.mode == "exact":
        return np.sign(x)
    return x / (np.abs(x) + policy.epsilon)


def nussbaum(kappa: float) -> float:
    # exp overflows to inf past |kappa| ~ 26.6; the simulator guards before that
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.exp(kappa * kappa) * np.cos(0.5 * np.pi * kappa) + 1.0)


def running_nussbaum_mean(kmax: float = 6.0, step: float = 1e-4) -> tuple[np.ndarray, np.ndarray]:
    """Grid of kappa and (1/kappa) * int_0^kappa N(s) ds by the trapezoid rule."""
    k = np.arange(0.0, kmax + 0.5 * step, step)
    vals = np.exp(k * k) * np.cos(0.5 * np.pi * k) + 1.0
    integral = np.concatenate(([0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * step)))
    mean = np.empty_like(k)
    mean[0] = vals[0]
    mean[1:] = integral[1:] / k[1:]
    return k, mean


@dataclass(frozen=True)
class IntegratorConfig:
    step: float = 1e-4
    t_end: float = 30.0
    scheme: str = "explicit_euler"
    log_every: int = 10

    def __post_init__(self):
        if not (self.step > 0 and self.step <= 1e-2):
            raise ValueError(f"step must lie in (0, 1e-2], got {self.step}")
        if not self.t_end >= self.step:
            raise ValueError("t_end must be at least one step")
        if self.scheme not in ("explicit_euler", "rk4"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if int(self.log_every) < 1:
            raise ValueError("log_every must be a positive integer")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.step))


Probe = Callable[[float, np.ndarray], Mapping[str, np.ndarray]]
Guard = Callable[[float, np.ndarray], "str | None"]


def default_guard(names: Sequence[str] | None = None) -> Guard:
    """Flags the first non-finite or oversized state component."""

    def label(k: int) -> str:
        return names[k] if names is not None else f"x[{k}]"

    def guard(t, x):
        bad = ~np.isfinite(x)
        if bad.any():
            return label(int(np.argmax(bad))) + " is not finite"
        big = np.abs(x) > STATE_NORM_LIMIT
        if big.any():
            return label(int(np.argmax(big))) + f" exceeds {STATE_NORM_LIMIT:g}"
        return None

    return guard


def integrate(
    rhs: Callable[[np.ndarray, float], np.ndarray],
    x0,
    cfg: IntegratorConfig,
    observers: Sequence[Probe] = (),
    guard: Guard | None = None,
    names: Sequence[str] | None = None,
) -> SimTrace:
    """Fixed-step explicit integration of x' = rhs(x, t).

    Samples are logged at t = 0 and every ``cfg.log_every`` steps (plus the
    final step). With no observers the raw state is logged under ``"x"``.
    On a guard hit the trace is cut at the offending sample and carries a
    :class:`DivergenceReport`.
    """
    x = np.array(x0, dtype=float, copy=True).ravel()
    h = float(cfg.step)
    n = cfg.n_steps
    every = int(cfg.log_every)
    guard = guard or default_guard(names)
    probes = list(observers) or [lambda t, s: {"x": s.copy()}]

    times: list[float] = []
    rows: dict[str, list[np.ndarray]] = {}

    def log(t, state):
        times.append(t)
        for probe in probes:
            for key, val in probe(t, state).items():
                rows.setdefault(key, []).append(np.array(val, dtype=float, copy=True))

    report = None
    msg = guard(0.0, x)
    if msg is not None:
        report = DivergenceReport(time=0.0, signal=msg)
    else:
        log(0.0, x)
        rk4 = cfg.scheme == "rk4"
        for k in range(n):
            t = k * h
            if rk4:
                k1 = rhs(x, t)
                k2 = rhs(x + 0.5 * h * k1, t + 0.5 * h)
                k3 = rhs(x + 0.5 * h * k2, t + 0.5 * h)
                k4 = rhs(x + h * k3, t + h)
                x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            else:
                x = x + h * rhs(x, t)
            t_next = (k + 1) * h
            msg = guard(t_next, x)
            if msg is not None:
                report = DivergenceReport(time=t_next, signal=msg)
                break
            if (k + 1) % every == 0 or k + 1 == n:
                log(t_next, x)

    channels = {key: np.stack(vals) for key, vals in rows.items()}
    return SimTrace(np.asarray(times), channels, divergence=report, final_state=x)


def settling_time(times, values, tol: float) -> float | None:
    """Earliest sample time after which every value stays <= tol."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size == 0:
        raise ValueError("empty series")
    above = ~(values <= tol)
    if not above.any():
        return float(times[0])
    last = int(np.flatnonzero(above)[-1])
    if last == len(times) - 1:
        return None
    return float(times[last + 1])


def lemma1_chain(xi: np.ndarray, p: float) -> tuple[float, float, float]:
    """(sum xi)^p, sum xi^p and N^(1-p) (sum xi)^p."""
    s = float(np.sum(xi))
    n = len(xi)
    return s**p, float(np.sum(xi**p)), n ** (1.0 - p) * s**p


def lemma3_gap(x, gamma):
    """|x| - x^2 / sqrt(x^2 + gamma^2), which lies in [0, gamma]."""
    x = np.asarray(x, dtype=float)
    return np.abs(x) - x * x / np.sqrt(x * x + np.asarray(gamma) ** 2)


def taylor_sig_pow(coeffs, theta: float) -> np.ndarray:
    """Taylor coefficients of sig^theta(a(t)) given those of a(t) along axis 0.

    Uses the power-series recursion for |a|^theta around a(0) != 0; where
    a(0) == 0 the function is not differentiable for theta < 1 and every
    coefficient beyond the zeroth is set to 0.
    """
    a = np.asarray(coeffs, dtype=float)
    out = np.zeros_like(a)
    a0 = a[0]
    s = np.sign(a0)
    b = a * s
    b0 = b[0]
    live = b0 > 0
    safe_b0 = np.where(live, b0, 1.0)
    out[0] = np.where(live, safe_b0**theta, 0.0)
    for n in range(1, a.shape[0]):
        acc = np.zeros_like(a0)
        for k in range(1, n + 1):
            acc = acc + (theta * k - (n - k)) * b[k] * out[n - k]
        out[n] = np.where(live, acc / (n * safe_b0), 0.0)
    return out * s
