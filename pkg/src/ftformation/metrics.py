"""Settling times, error norms and consistency residuals of a trace.

Everything here reads only trace channels, so metrics can be recomputed
from an exported CSV.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .numerics import nussbaum, settling_time
from .trace import SimTrace

__all__ = ["Tolerances", "Metrics", "compute_metrics", "EXIT_CONVERGED", "EXIT_DIVERGED", "EXIT_INCONCLUSIVE"]

EXIT_CONVERGED = 0
EXIT_DIVERGED = 2
EXIT_INCONCLUSIVE = 3

ADAPTIVE = ("theta_hat", "eps_hat", "kappa", "a_hat")


@dataclass(frozen=True)
class Tolerances:
    estimator: float = 1e-2
    tracking: float = 5e-2
    velocity: float = 5e-2
    bound: float = 1e3

    @classmethod
    def for_kind(cls, kind: str) -> "Tolerances":
        return cls()

    def scaled(self, factor: float) -> "Tolerances":
        return Tolerances(self.estimator * factor, self.tracking * factor, self.velocity * factor, self.bound)


@dataclass
class Metrics:
    diverged: bool
    divergence: str | None
    t_final: float
    # per error kind, one entry per agent (None = never settled)
    settling: dict[str, list[float | None]] = field(default_factory=dict)
    final_error: dict[str, list[float]] = field(default_factory=dict)
    max_error: dict[str, list[float]] = field(default_factory=dict)
    sup_norm: dict[str, float] = field(default_factory=dict)
    residuals: dict[str, float] = field(default_factory=dict)
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def bounded(self) -> bool:
        return all(v < self.tolerances.bound for v in self.sup_norm.values())

    @property
    def converged(self) -> bool:
        if self.diverged or not self.bounded:
            return False
        track = [k for k in ("track_err", "vel_err") if k in self.settling]
        return bool(track) and all(s is not None for k in track for s in self.settling[k])

    @property
    def status(self) -> int:
        if self.diverged:
            return EXIT_DIVERGED
        return EXIT_CONVERGED if self.converged else EXIT_INCONCLUSIVE

    def to_dict(self) -> dict:
        out = asdict(self)
        out["status"] = self.status
        out["converged"] = self.converged
        out["bounded"] = self.bounded
        return out

    def summary(self) -> str:
        label = {EXIT_CONVERGED: "converged", EXIT_DIVERGED: "diverged", EXIT_INCONCLUSIVE: "inconclusive"}
        lines = [f"status: {label[self.status]} (t_final = {self.t_final:.6g} s)"]
        if self.divergence:
            lines.append(f"  {self.divergence}")
        for kind, vals in self.settling.items():
            shown = ", ".join("-" if v is None else f"{v:.3f}" for v in vals)
            lines.append(f"settling {kind}: {shown}")
        for kind, vals in self.final_error.items():
            lines.append(f"final {kind}: " + ", ".join(f"{v:.3e}" for v in vals))
        for name, v in self.sup_norm.items():
            lines.append(f"sup |{name}|: {v:.4g}")
        for name, v in self.residuals.items():
            lines.append(f"residual {name}: {v:.3e}")
        return "\n".join(lines)


def _block_norms(values: np.ndarray, width: int) -> np.ndarray:
    """Row-wise Euclidean norms of consecutive ``width``-wide blocks; max over blocks."""
    T, k = values.shape
    blocks = values.reshape(T, k // width, width)
    return np.linalg.norm(blocks, axis=2).max(axis=1)


def _width(trace: SimTrace) -> int:
    agents = trace.agents()
    return trace.channel(agents[0], "track_err").shape[1] if agents and trace.has(agents[0], "track_err") else 1


def compute_metrics(trace: SimTrace, tol: Tolerances | None = None) -> Metrics:
    tol = tol or Tolerances()
    if len(trace) == 0:
        raise ValueError("empty trace")
    agents = trace.agents()
    width = _width(trace)
    met = Metrics(
        diverged=trace.diverged,
        divergence=str(trace.divergence) if trace.divergence else None,
        t_final=float(trace.times[-1]),
        tolerances=tol,
    )
    limits = {"est_err": tol.estimator, "track_err": tol.tracking, "vel_err": tol.velocity}
    for kind, limit in limits.items():
        if not agents or not trace.has(agents[0], kind):
            continue
        settle, final, peak = [], [], []
        for i in agents:
            norms = _block_norms(trace.channel(i, kind), width)
            final.append(float(norms[-1]))
            peak.append(float(np.max(norms)))
            settle.append(None if trace.diverged else settling_time(trace.times, norms, limit))
        met.settling[kind] = settle
        met.final_error[kind] = final
        met.max_error[kind] = peak
    for name in ADAPTIVE:
        if agents and trace.has(agents[0], name):
            met.sup_norm[name] = float(max(np.abs(trace.channel(i, name)).max() for i in agents))
    met.residuals.update(_residuals(trace, agents))
    return met


def _residuals(trace: SimTrace, agents) -> dict[str, float]:
    out = {}
    if not agents:
        return out
    a0 = agents[0]
    if trace.has(a0, "eq37"):
        out["eq37"] = float(max(np.abs(trace.channel(i, "eq37")).max() for i in agents))
    if trace.has(a0, "eq38"):
        out["eq38"] = float(
            max((np.abs(trace.channel(i, "eq38")) / trace.channel(i, "eq38_scale")).max() for i in agents)
        )
    # the Nussbaum product: applied input equals N(kappa) times the designed one
    pairs = [("u", "ubar")] if trace.has(a0, "ubar") else [("tau", "u")]
    for outer, inner in pairs:
        if not (trace.has(a0, outer) and trace.has(a0, inner)):
            continue
        worst = 0.0
        for i in agents:
            kappa = trace.channel(i, "kappa")[:, 0]
            nu = np.array([nussbaum(k) for k in kappa])
            lhs = trace.channel(i, outer)
            rhs = nu[:, None] * trace.channel(i, inner)
            scale = np.maximum(1.0, np.abs(rhs))
            worst = max(worst, float((np.abs(lhs - rhs) / scale).max()))
        out["nussbaum_product"] = worst
    return out
