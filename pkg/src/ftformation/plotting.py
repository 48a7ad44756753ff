"""Static figures from a trace (Agg backend, no display needed)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .trace import SimTrace  # noqa: E402

__all__ = ["export_plots"]


def _norm(values: np.ndarray, width: int) -> np.ndarray:
    T, k = values.shape
    return np.linalg.norm(values.reshape(T, k // width, width), axis=2)


def _error_figure(trace: SimTrace, kind: str, width: int, title: str, ylabel: str, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    for i in trace.agents():
        if not trace.has(i, kind):
            continue
        norms = _norm(trace.channel(i, kind), width)
        for b in range(norms.shape[1]):
            label = f"agent {i}" if norms.shape[1] == 1 else f"agent {i}, block {b + 1}"
            ax.semilogy(trace.times, np.maximum(norms[:, b], 1e-16), lw=0.9, label=label)
    ax.set_xlabel("t [s]")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=6, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _adaptive_figure(trace: SimTrace, path: Path) -> Path:
    names = [n for n in ("theta_hat", "eps_hat", "kappa", "a_hat") if trace.agents() and trace.has(trace.agents()[0], n)]
    fig, axes = plt.subplots(len(names), 1, figsize=(7, 2.2 * len(names)), sharex=True, squeeze=False)
    for ax, name in zip(axes[:, 0], names):
        for i in trace.agents():
            vals = trace.channel(i, name)
            for k in range(vals.shape[1]):
                ax.plot(trace.times, vals[:, k], lw=0.8, label=f"{i}[{k}]" if vals.shape[1] > 1 else f"agent {i}")
        ax.set_ylabel(name)
        ax.grid(True, alpha=0.3)
    axes[-1, 0].set_xlabel("t [s]")
    axes[0, 0].legend(fontsize=5, ncol=6)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _paths_figure(trace: SimTrace, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 6))
    generic = "leader.x1" in trace
    key = "x1" if generic else "x"
    ref = trace["leader.x1"] if generic else trace["ref.x"]
    planar = ref.shape[1] >= 2
    # one-dimensional agents are drawn against time
    pick = (lambda xy: (xy[:, 0], xy[:, 1])) if planar else (lambda xy: (trace.times, xy[:, 0]))
    for i in trace.agents():
        u, v = pick(trace.channel(i, key))
        line, = ax.plot(u, v, lw=0.9, label=f"agent {i}")
        ax.plot(u[0], v[0], "o", mfc="none", color=line.get_color())
    u, v = pick(ref)
    ax.plot(u, v, "k--", lw=1.0, label="leader" if generic else "reference")
    ax.plot(u[0], v[0], "ko", mfc="none")
    if planar:
        ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("position 1" if planar else "t [s]")
    ax.set_ylabel("position 2" if planar else "position")
    ax.set_title("trajectories (initial positions circled)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def export_plots(trace: SimTrace, out_dir) -> list[Path]:
    """Write one PNG per figure analog into ``out_dir``."""
    if len(trace) == 0:
        raise ValueError("refusing to plot an empty trace")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    agents = trace.agents()
    width = trace.channel(agents[0], "track_err").shape[1]
    paths = [
        _error_figure(trace, "est_err", width, "estimator errors", "norm", out / "estimator_errors.png"),
        _paths_figure(trace, out / "trajectories.png"),
        _error_figure(trace, "track_err", width, "tracking errors", "norm", out / "tracking_errors.png"),
    ]
    if trace.has(agents[0], "vel_err"):
        paths.append(_error_figure(trace, "vel_err", width, "velocity errors", "norm", out / "velocity_errors.png"))
    paths.append(_adaptive_figure(trace, out / "adaptive_parameters.png"))
    return paths
