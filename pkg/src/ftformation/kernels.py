"""Hot inner kernel for the networked-arm closed loop.

Two interchangeable implementations of :class:`TaskNetwork` exist: a
compiled one (``_kernels``, built from Cython) and a numpy reference
(``_kernels_py``). The compiled one is used when it imports, unless the
environment variable ``FTFORMATION_PURE`` is set to a non-empty value.

State vector layout is block-major: each entry of :data:`TASK_STATE` is an
(N, width) block stored contiguously in that order. The per-step
coefficient vector holds ``x_d, xdot_d`` and then, per robot, ``g, d[2],
phi, psi[2], delta[2]``. The auxiliary output is an (N, AUX_WIDTH) table.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TASK_STATE",
    "TASK_AUX",
    "COEF_GLOBAL",
    "COEF_PER_ROBOT",
    "TaskNetworkParams",
    "TaskNetwork",
    "PyTaskNetwork",
    "BACKEND",
    "compiled_available",
    "block_offsets",
]

TASK_STATE = (
    ("q", 2),
    ("qdot", 2),
    ("chi", 2),
    ("vartheta", 2),
    ("eta", 2),
    ("xi", 2),
    ("rho", 2),
    ("theta_hat", 5),
    ("a_hat", 4),
    ("eps_hat", 2),
    ("kappa", 1),
    ("sx_int", 2),
)

TASK_AUX = (
    ("x", 2),
    ("xdot", 2),
    ("e_x", 2),
    ("e_v", 2),
    ("s_x", 2),
    ("s", 2),
    ("qr_dot", 2),
    ("qr_ddot", 2),
    ("u", 2),
    ("tau", 2),
    ("nu", 1),
    ("eq37", 2),
    ("eq38", 2),
    ("eq38_scale", 1),
    ("regularized", 1),
)

COEF_GLOBAL = 4
COEF_PER_ROBOT = 8


def block_offsets(blocks, n: int) -> dict[str, tuple[int, int]]:
    """name -> (offset, width) for block-major layouts of n rows."""
    out, off = {}, 0
    for name, width in blocks:
        out[name] = (off, width)
        off += n * width
    return out


def aux_offsets() -> dict[str, tuple[int, int]]:
    out, off = {}, 0
    for name, width in TASK_AUX:
        out[name] = (off, width)
        off += width
    return out


AUX_WIDTH = sum(w for _, w in TASK_AUX)
STATE_WIDTH = sum(w for _, w in TASK_STATE)


@dataclass(frozen=True)
class TaskNetworkParams:
    """Everything the closed loop needs besides the state and time coefficients."""

    A: np.ndarray  # (N, N) follower weights
    a0: np.ndarray  # (N,) leader weights
    est: np.ndarray  # (N, 5): k_chi, k_vartheta, k_eta, k_xi, k_rho
    expo: np.ndarray  # (N, 3): alpha, beta, gamma
    sgn_mode: int  # 0 exact, 1 boundary layer
    sgn_eps: float
    alpha_x: np.ndarray  # (N,)
    alpha_r: np.ndarray
    Ks: np.ndarray  # (N, 2, 2)
    k_kappa: np.ndarray
    Gth: np.ndarray  # (N, 5, 5)
    Geps: np.ndarray  # (N, 2, 2)
    Lam: np.ndarray  # (N, 4, 4)
    grav_ctrl: np.ndarray  # (N,) gravity constant the controller's regressor assumes
    theta: np.ndarray  # (N, 5) true dynamic parameters (plant side)
    a: np.ndarray  # (N, 4) true kinematic parameters (plant side)
    Fv: np.ndarray  # (N, 2, 2)
    Fc: np.ndarray  # (N, 2, 2)
    grav: np.ndarray  # (N,)
    exdot_estimated: int = 0

    def __post_init__(self):
        n = np.asarray(self.a0).shape[0]
        shapes = {
            "A": (n, n),
            "a0": (n,),
            "est": (n, 5),
            "expo": (n, 3),
            "alpha_x": (n,),
            "alpha_r": (n,),
            "Ks": (n, 2, 2),
            "k_kappa": (n,),
            "Gth": (n, 5, 5),
            "Geps": (n, 2, 2),
            "Lam": (n, 4, 4),
            "grav_ctrl": (n,),
            "theta": (n, 5),
            "a": (n, 4),
            "Fv": (n, 2, 2),
            "Fc": (n, 2, 2),
            "grav": (n,),
        }
        for name, shape in shapes.items():
            arr = np.array(getattr(self, name), dtype=np.float64, order="C")
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "sgn_mode", int(self.sgn_mode))
        object.__setattr__(self, "sgn_eps", float(self.sgn_eps))
        object.__setattr__(self, "exdot_estimated", int(bool(self.exdot_estimated)))

    @property
    def n(self) -> int:
        return self.a0.shape[0]

    @property
    def state_size(self) -> int:
        return STATE_WIDTH * self.n

    @property
    def coef_size(self) -> int:
        return COEF_GLOBAL + COEF_PER_ROBOT * self.n


from ._kernels_py import TaskNetwork as PyTaskNetwork  # noqa: E402

try:
    from ._kernels import TaskNetwork as _CTaskNetwork  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - exercised when the extension is not built
    _CTaskNetwork = None


def compiled_available() -> bool:
    return _CTaskNetwork is not None


if _CTaskNetwork is not None and not os.environ.get("FTFORMATION_PURE"):
    TaskNetwork = _CTaskNetwork
    BACKEND = "cython"
else:
    TaskNetwork = PyTaskNetwork
    BACKEND = "python"
