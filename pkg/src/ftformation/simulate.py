"""Closed-loop orchestration: one global state vector per run.

Generic formations are stepped by :func:`numerics.integrate` with a
right-hand side assembled from the plant, estimator and controller modules.
Networked arms go through the compiled :class:`kernels.TaskNetwork`, which
advances whole blocks of steps per call against a precomputed coefficient
table (reference, control coefficients, disturbances, faults, smoothing
widths).
"""

from __future__ import annotations

import concurrent.futures as cf
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .controller import (
    ControllerState,
    adaptation_derivatives,
    backstepping_errors,
    control_law,
    jet_from_corrections,
)
from .estimator import EstimatorState, estimator_derivative, estimator_jets, gain_table
from .kernels import AUX_WIDTH, TASK_AUX, TASK_STATE, TaskNetworkParams, aux_offsets, block_offsets
from .manipulator import kinematic_params, theta_vector
from .numerics import KAPPA_LIMIT, STATE_NORM_LIMIT, default_guard, integrate, nussbaum
from .scenario import Scenario, load_scenario, with_overrides
from .trace import DivergenceReport, SimTrace

__all__ = [
    "StateLayout",
    "generic_layout",
    "task_layout",
    "initial_state",
    "task_params",
    "task_coefficients",
    "simulate",
    "run",
    "sweep",
]


class StateLayout:
    """Named blocks of a flat state vector, each stored contiguously."""

    def __init__(self, blocks: Sequence[tuple[str, tuple[int, ...]]]):
        self.blocks = tuple((name, tuple(shape)) for name, shape in blocks)
        self.slices: dict[str, tuple[slice, tuple[int, ...]]] = {}
        off = 0
        for name, shape in self.blocks:
            size = int(np.prod(shape))
            self.slices[name] = (slice(off, off + size), shape)
            off += size
        self.size = off

    def pack(self, parts: dict[str, np.ndarray]) -> np.ndarray:
        out = np.zeros(self.size)
        for name, (sl, shape) in self.slices.items():
            out[sl] = np.broadcast_to(np.asarray(parts[name], dtype=float), shape).ravel()
        return out

    def unpack(self, y: np.ndarray) -> dict[str, np.ndarray]:
        """Views (not copies) into ``y``."""
        return {name: y[sl].reshape(shape) for name, (sl, shape) in self.slices.items()}

    def names(self) -> list[str]:
        """Label of every scalar entry, e.g. ``kappa[3]``."""
        out = []
        for name, shape in self.blocks:
            out.extend(f"{name}{list(idx)}" for idx in np.ndindex(*shape))
        return out


def generic_layout(scn: Scenario) -> StateLayout:
    N = scn.n_agents
    m, n = scn.leader.order, scn.leader.dim
    r = scn.agents[0].model.n_params
    return StateLayout(
        [
            ("x", (N, m, n)),
            ("leader", (m, n)),
            ("xhat", (N, m, n)),
            ("eta", (N, n)),
            ("xi", (N, n)),
            ("rho", (N, n)),
            ("theta_hat", (N, r)),
            ("eps_hat", (N, n)),
            ("kappa", (N,)),
        ]
    )


def task_layout(n_agents: int) -> StateLayout:
    # same order as the kernel's block-major layout
    return StateLayout([(name, (n_agents, w)) for name, w in TASK_STATE])


def initial_state(scn: Scenario) -> np.ndarray:
    N = scn.n_agents
    if scn.kind == "generic_formation":
        lay = generic_layout(scn)
        parts = {name: np.zeros(shape) for name, shape in lay.blocks}
        parts["x"] = np.stack([a.initial for a in scn.agents])
        parts["leader"] = scn.leader_initial
        parts["kappa"] = np.full(N, scn.kappa0)
        return lay.pack(parts)
    lay = task_layout(N)
    parts = {name: np.zeros(shape) for name, shape in lay.blocks}
    parts["q"] = np.stack([a.q0 for a in scn.agents])
    parts["qdot"] = np.stack([a.qdot0 for a in scn.agents])
    parts["theta_hat"] = np.stack([a.theta_hat0 for a in scn.agents])
    parts["a_hat"] = np.stack([a.a_hat0 for a in scn.agents])
    parts["kappa"] = np.full((N, 1), scn.kappa0)
    return lay.pack(parts)


# ------------------------------------------------------------ generic loop


class _GenericLoop:
    def __init__(self, scn: Scenario):
        self.scn = scn
        self.lay = generic_layout(scn)
        self.N = scn.n_agents
        self.m, self.n = scn.leader.order, scn.leader.dim
        self.gains = gain_table(scn.estimator, self.N, self.m)
        self.offsets = np.stack([a.offset for a in scn.agents])

    def evaluate(self, y, t):
        """(dy, diagnostics) at state y and time t."""
        scn, N, m, n = self.scn, self.N, self.m, self.n
        s = self.lay.unpack(y)
        dy = np.zeros_like(y)
        d = self.lay.unpack(dy)
        lead = s["leader"]
        d["leader"][:-1] = lead[1:]
        d["leader"][-1] = scn.leader.o(lead, t)

        est = EstimatorState(s["xhat"], s["eta"], s["xi"], s["rho"])
        ed = estimator_derivative(est, lead, scn.graph, self.gains, scn.signum)
        d["xhat"][:] = ed.xhat
        d["eta"][:] = ed.eta
        d["xi"][:] = ed.xi
        d["rho"][:] = ed.rho
        if m == 2:
            jets = np.stack([jet_from_corrections(s["xhat"][i], ed.corrections[i]) for i in range(N)])
        else:
            jets = estimator_jets(est, lead, scn.graph, self.gains)

        gains = scn.controller
        diag = {k: np.zeros((N, n)) for k in ("u", "ubar", "u_a")}
        diag["zt"] = np.zeros((N, m, n))
        diag["nu"] = np.zeros(N)
        for i, agent in enumerate(scn.agents):
            x = s["x"][i]
            model = agent.model
            ctrl = ControllerState(s["theta_hat"][i], s["eps_hat"][i], float(s["kappa"][i]))
            zt, _, zdot = backstepping_errors(x, jets[i], self.offsets[i], gains.kbar)
            f_val = model.f(x)
            u, ubar = control_law(zt, f_val, ctrl, gains, t, zdot)
            dth, deps, dk = adaptation_derivatives(zt[-1], ubar, f_val, ctrl, gains, t)
            phi, psi = agent.faults.coefficients(t, n)
            u_a = phi * u + psi
            d["x"][i, :-1] = x[1:]
            d["x"][i, -1] = f_val.T @ model.theta + model.g(x) * u_a + model.d(x, t)
            d["theta_hat"][i] = dth
            d["eps_hat"][i] = deps
            d["kappa"][i] = dk
            diag["u"][i] = u
            diag["ubar"][i] = ubar
            diag["u_a"][i] = u_a
            diag["zt"][i] = zt
            diag["nu"][i] = nussbaum(ctrl.kappa)
        return dy, diag

    def rhs(self, y, t):
        return self.evaluate(y, t)[0]

    def probe(self, t, y):
        s = self.lay.unpack(y)
        _, diag = self.evaluate(y, t)
        lead = s["leader"]
        out = {}
        for k in range(self.m):
            out[f"leader.x{k + 1}"] = lead[k]
        for i in range(self.N):
            a = f"agent{i + 1}."
            x = s["x"][i]
            for k in range(self.m):
                out[f"{a}x{k + 1}"] = x[k]
                out[f"{a}xhat{k + 1}"] = s["xhat"][i, k]
            out[a + "eta"] = s["eta"][i]
            out[a + "xi"] = s["xi"][i]
            out[a + "rho"] = s["rho"][i]
            out[a + "theta_hat"] = s["theta_hat"][i]
            out[a + "eps_hat"] = s["eps_hat"][i]
            out[a + "kappa"] = s["kappa"][i]
            out[a + "u"] = diag["u"][i]
            out[a + "ubar"] = diag["ubar"][i]
            out[a + "u_a"] = diag["u_a"][i]
            out[a + "nu"] = diag["nu"][i]
            out[a + "zt"] = diag["zt"][i].ravel()
            out[a + "track_err"] = x[0] - lead[0] - self.offsets[i]
            out[a + "vel_err"] = x[1] - lead[1]
            out[a + "est_err"] = (s["xhat"][i] - lead).ravel()
        return out

    def guard(self):
        names = self.lay.names()
        base = default_guard(names)
        sl, _ = self.lay.slices["kappa"]

        def guard(t, y):
            msg = base(t, y)
            if msg is not None:
                return msg
            kap = np.abs(y[sl])
            if np.any(kap > KAPPA_LIMIT):
                k = int(np.argmax(kap))
                return f"kappa[{k}] exceeds {KAPPA_LIMIT:g}"
            return None

        return guard


def _simulate_generic(scn: Scenario) -> SimTrace:
    loop = _GenericLoop(scn)
    y0 = initial_state(scn)
    trace = integrate(loop.rhs, y0, scn.integrator, observers=[loop.probe], guard=loop.guard(), names=loop.lay.names())
    if trace.diverged and len(trace) == 0:
        trace = SimTrace(np.array([0.0]), loop.probe(0.0, y0), trace.divergence, y0)
    return trace


# -------------------------------------------------------------- task loop


def task_params(scn: Scenario) -> TaskNetworkParams:
    N = scn.n_agents
    est, tg = scn.estimator, scn.task
    arms = [a.arm for a in scn.agents]
    rep = lambda v: np.repeat(np.asarray(v, dtype=float)[None], N, axis=0)  # noqa: E731
    return TaskNetworkParams(
        A=scn.graph.follower_weights,
        a0=scn.graph.leader_weights,
        est=rep([est.kappa[0], est.kappa_m, est.kappa_eta, est.kappa_xi, est.kappa_rho]),
        expo=rep([est.alpha, est.beta, est.gamma]),
        sgn_mode=1 if scn.signum.mode == "boundary_layer" else 0,
        sgn_eps=scn.signum.epsilon,
        alpha_x=np.full(N, tg.alpha_x),
        alpha_r=np.full(N, tg.alpha_r),
        Ks=rep(tg.K_s),
        k_kappa=np.full(N, tg.k_kappa),
        Gth=rep(tg.Gamma_theta),
        Geps=rep(tg.Gamma_eps),
        Lam=rep(tg.Lambda),
        grav_ctrl=np.full(N, tg.grav),
        theta=np.stack([theta_vector(a) for a in arms]),
        a=np.stack([kinematic_params(a) for a in arms]),
        Fv=np.stack([a.Fv for a in arms]),
        Fc=np.stack([a.Fc for a in arms]),
        grav=np.array([a.grav for a in arms]),
        exdot_estimated=scn.exdot_estimated,
    )


def task_coefficients(scn: Scenario, times) -> np.ndarray:
    """Coefficient table, one row per time, in the kernel's layout."""
    times = np.asarray(times, dtype=float)
    N = scn.n_agents
    C = np.empty((times.size, kernels.COEF_GLOBAL + kernels.COEF_PER_ROBOT * N))
    xr, vr = scn.reference
    for k in range(2):
        C[:, k] = xr[k].at(times)
        C[:, 2 + k] = vr[k].at(times)
    delta = scn.delta0 * np.exp(-times)
    for i, a in enumerate(scn.agents):
        b = kernels.COEF_GLOBAL + kernels.COEF_PER_ROBOT * i
        phi, psi = a.faults.coefficients_on(times, 2)
        C[:, b] = a.g.at(times)
        C[:, b + 1] = a.d[0].at(times)
        C[:, b + 2] = a.d[1].at(times)
        C[:, b + 3] = phi
        C[:, b + 4 : b + 6] = psi
        C[:, b + 6] = delta
        C[:, b + 7] = delta
    return C


def _task_probe(scn: Scenario, lay: StateLayout, y, aux, c, t) -> dict[str, np.ndarray]:
    s = lay.unpack(y)
    ax = aux_offsets()
    xd, vd = c[0:2], c[2:4]
    out = {"ref.x": xd.copy(), "ref.xdot": vd.copy()}
    for i in range(scn.n_agents):
        a = f"agent{i + 1}."
        for name, _ in TASK_STATE:
            out[a + name] = s[name][i]
        for name, _ in TASK_AUX:
            off, w = ax[name]
            out[a + name] = aux[i, off : off + w]
        x = aux[i, ax["x"][0] : ax["x"][0] + 2]
        out[a + "track_err"] = x - xd
        out[a + "est_err"] = np.concatenate([s["chi"][i] - xd, s["vartheta"][i] - vd])
    return out


def _simulate_task(scn: Scenario, backend: str | None = None, block_logs: int = 200) -> SimTrace:
    params = task_params(scn)
    cls = {"python": kernels.PyTaskNetwork, "cython": kernels.TaskNetwork}.get(backend or "", kernels.TaskNetwork)
    if backend == "cython" and not kernels.compiled_available():
        raise RuntimeError("compiled kernel is not available")
    net = cls(params)
    lay = task_layout(scn.n_agents)
    names = lay.names()
    cfg = scn.integrator
    h, n_steps, every = cfg.step, cfg.n_steps, scn.log_every
    rk4 = cfg.scheme == "rk4"

    y = initial_state(scn)
    aux = np.zeros((scn.n_agents, AUX_WIDTH))
    dy = np.zeros_like(y)
    times: list[float] = []
    rows: dict[str, list[np.ndarray]] = {}

    def log(k):
        t = k * h
        c = task_coefficients(scn, [t])[0]
        net.rhs(y, c, dy, aux)
        times.append(t)
        for key, val in _task_probe(scn, lay, y, aux, c, t).items():
            rows.setdefault(key, []).append(np.array(val, dtype=float))

    report = None
    bad0 = [j for j in range(y.size) if not abs(y[j]) <= STATE_NORM_LIMIT]
    if bad0:
        report = DivergenceReport(0.0, f"{names[bad0[0]]} is out of range")
    log(0)
    k = 0
    while k < n_steps and report is None:
        # one coefficient table per block of log intervals
        span = min(every * block_logs, n_steps - k)
        grid = k + (np.arange(2 * span + 1) / 2.0 if rk4 else np.arange(span))
        C = task_coefficients(scn, grid * h)
        done = 0
        while done < span:
            todo = min(every, span - done)
            sub = C[2 * done : 2 * (done + todo) + 1] if rk4 else C[done : done + todo]
            steps, bad = net.advance(y, np.ascontiguousarray(sub), h, rk4, STATE_NORM_LIMIT, KAPPA_LIMIT)
            done += steps
            if bad >= 0:
                k += done
                what = "is not finite" if not np.isfinite(y[bad]) else "left the admissible range"
                report = DivergenceReport(k * h, f"{names[bad]} {what}")
                break
            if (k + done) % every == 0 or k + done == n_steps:
                log(k + done)
        else:
            k += span
    channels = {key: np.stack(vals) for key, vals in rows.items()}
    return SimTrace(np.asarray(times), channels, divergence=report, final_state=y.copy())


# ---------------------------------------------------------------- driver


def simulate(scn: Scenario, backend: str | None = None) -> SimTrace:
    """Run the closed loop and return the logged trace."""
    trace = _simulate_task(scn, backend) if scn.kind == "manipulator_task" else _simulate_generic(scn)
    trace.meta.update(
        scenario=scn.name,
        kind=scn.kind,
        step=scn.integrator.step,
        t_end=scn.integrator.t_end,
        scheme=scn.integrator.scheme,
        agents=scn.n_agents,
    )
    return trace


def run(scn: Scenario, tolerances=None, backend: str | None = None):
    """(trace, metrics) for a scenario."""
    from .metrics import Tolerances, compute_metrics

    trace = simulate(scn, backend)
    return trace, compute_metrics(trace, tolerances or Tolerances.for_kind(scn.kind))


@dataclass(frozen=True)
class SweepJob:
    source: str
    t_end: float | None = None
    step: float | None = None


def _sweep_one(job: SweepJob):
    scn = with_overrides(load_scenario(job.source), t_end=job.t_end, step=job.step)
    trace, metrics = run(scn)
    return trace, metrics


def sweep(jobs: Sequence[SweepJob], workers: int | None = None, on_done: Callable | None = None):
    """Run independent scenarios in worker processes; results keep job order."""
    results = [None] * len(jobs)
    with cf.ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(_sweep_one, job): idx for idx, job in enumerate(jobs)}
        for fut in cf.as_completed(futures):
            idx = futures[fut]
            results[idx] = fut.result()
            if on_done is not None:
                on_done(jobs[idx], *results[idx])
    return results
