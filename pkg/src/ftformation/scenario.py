"""Scenario files: a TOML tree whose sections mirror the library modules.

Time-varying quantities (faults, disturbances, references, leader and
follower nonlinearities) are strings in the small grammar of
:mod:`ftformation.expr`. Generic followers see their stacked state as
``x{k}_{j}`` (block k = 1..m, component j = 1..n) plus ``t`` where time is
allowed. The two built-in presets are ordinary scenario files shipped with
the package.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .controller import ControllerGains, exp_decay
from .estimator import EstimatorGains
from .expr import Expr, ExprError, compile_expr
from .graph import DirectedLeaderGraph, GraphError, build_graph, has_leader_spanning_tree, read_edge_list
from .manipulator import GRAVITY, TABLE_I, ArmParams, inverse_kinematics, kinematic_params
from .numerics import IntegratorConfig, SignumPolicy
from .plant import FaultProfile, FaultSegment, FollowerModel, LeaderModel
from .task_controller import TaskGains

__all__ = [
    "ScenarioError",
    "GenericAgent",
    "ArmAgent",
    "Scenario",
    "PRESETS",
    "load_scenario",
    "parse_scenario",
    "preset_text",
    "with_overrides",
]

PRESETS = ("paper-5a", "paper-5b")
KINDS = ("generic_formation", "manipulator_task")


class ScenarioError(ValueError):
    """Parse or validation failure; ``field`` names the offending key."""

    def __init__(self, field_path: str, message: str, origin: str = "<scenario>"):
        self.field = field_path
        self.origin = origin
        super().__init__(f"{origin}: {field_path}: {message}" if field_path else f"{origin}: {message}")


@dataclass(frozen=True)
class GenericAgent:
    model: FollowerModel
    initial: np.ndarray  # (m, n)
    offset: np.ndarray  # (n,)
    faults: FaultProfile


@dataclass(frozen=True)
class ArmAgent:
    arm: ArmParams
    g: Expr
    d: tuple[Expr, ...]
    faults: FaultProfile
    q0: np.ndarray
    qdot0: np.ndarray
    a_hat0: np.ndarray
    theta_hat0: np.ndarray


@dataclass(frozen=True)
class Scenario:
    kind: str
    name: str
    graph: DirectedLeaderGraph
    integrator: IntegratorConfig
    log_interval: float
    signum: SignumPolicy
    estimator: EstimatorGains
    agents: tuple
    kappa0: float = 0.0
    delta0: float = 0.05
    # generic formation
    controller: ControllerGains | None = None
    leader: LeaderModel | None = None
    leader_initial: np.ndarray | None = None
    # manipulator task
    task: TaskGains | None = None
    reference: tuple[tuple[Expr, ...], tuple[Expr, ...]] | None = None
    plant_gravity: float = GRAVITY
    exdot_estimated: bool = False
    source: str = "<scenario>"

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def log_every(self) -> int:
        return max(1, int(round(self.log_interval / self.integrator.step)))


# ---------------------------------------------------------------- parsing


class _Node:
    """A TOML table plus its dotted path, for diagnostics."""

    def __init__(self, data: dict, path: str, origin: str):
        self.data = data
        self.path = path
        self.origin = origin
        self.used: set[str] = set()

    def where(self, key: str) -> str:
        if not key:
            return self.path
        return f"{self.path}.{key}" if self.path else key

    def fail(self, key: str, msg: str):
        raise ScenarioError(self.where(key), msg, self.origin)

    def has(self, key: str) -> bool:
        return key in self.data

    def raw(self, key: str, default: Any = ...):
        self.used.add(key)
        if key not in self.data:
            if default is ...:
                self.fail(key, "missing required key")
            return default
        return self.data[key]

    def table(self, key: str, required: bool = True) -> "_Node":
        val = self.raw(key, ... if required else {})
        if not isinstance(val, dict):
            self.fail(key, "expected a table")
        return _Node(val, self.where(key), self.origin)

    def tables(self, key: str) -> list["_Node"]:
        val = self.raw(key, [])
        if not isinstance(val, list) or not all(isinstance(v, dict) for v in val):
            self.fail(key, "expected an array of tables")
        return [_Node(v, f"{self.where(key)}[{i}]", self.origin) for i, v in enumerate(val)]

    def number(self, key: str, default: Any = ..., positive: bool = False, nonneg: bool = False) -> float:
        val = self.raw(key, default)
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self.fail(key, f"expected a number, got {val!r}")
        val = float(val)
        if not np.isfinite(val):
            self.fail(key, "must be finite")
        if positive and not val > 0:
            self.fail(key, "must be positive")
        if nonneg and not val >= 0:
            self.fail(key, "must be non-negative")
        return val

    def integer(self, key: str, default: Any = ..., minimum: int | None = None) -> int:
        val = self.raw(key, default)
        if isinstance(val, bool) or not isinstance(val, int):
            self.fail(key, f"expected an integer, got {val!r}")
        if minimum is not None and val < minimum:
            self.fail(key, f"must be at least {minimum}")
        return val

    def string(self, key: str, default: Any = ..., choices: tuple[str, ...] | None = None) -> str:
        val = self.raw(key, default)
        if not isinstance(val, str):
            self.fail(key, f"expected a string, got {val!r}")
        if choices is not None and val not in choices:
            self.fail(key, f"must be one of {', '.join(choices)}; got {val!r}")
        return val

    def boolean(self, key: str, default: Any = ...) -> bool:
        val = self.raw(key, default)
        if not isinstance(val, bool):
            self.fail(key, f"expected true or false, got {val!r}")
        return val

    def array(self, key: str, shape: tuple[int | None, ...], default: Any = ...) -> np.ndarray:
        val = self.raw(key, default)
        try:
            arr = np.array(val, dtype=float)
        except (TypeError, ValueError):
            self.fail(key, "expected a numeric array")
        if arr.ndim != len(shape) or any(s is not None and s != a for s, a in zip(shape, arr.shape)):
            want = "x".join("*" if s is None else str(s) for s in shape)
            self.fail(key, f"expected shape {want}, got {'x'.join(map(str, arr.shape)) or 'scalar'}")
        if not np.all(np.isfinite(arr)):
            self.fail(key, "entries must be finite")
        return arr

    def matrix(self, key: str, size: int, default: Any = ...) -> np.ndarray:
        """A scalar (times identity) or a size x size array."""
        val = self.raw(key, default)
        if isinstance(val, (int, float)) and not isinstance(val, bool):
            return float(val) * np.eye(size)
        return self.array(key, (size, size))

    def expr(self, key: str, variables: tuple[str, ...], default: Any = ...) -> Expr:
        val = self.raw(key, default)
        return self._compile(key, val, variables)

    def exprs(self, key: str, count: int, variables: tuple[str, ...]) -> tuple[Expr, ...]:
        val = self.raw(key)
        if not isinstance(val, list) or len(val) != count:
            self.fail(key, f"expected a list of {count} expressions")
        return tuple(self._compile(f"{key}[{k}]", v, variables) for k, v in enumerate(val))

    def _compile(self, key, val, variables) -> Expr:
        try:
            return compile_expr(val, variables)
        except ExprError as exc:
            self.fail(key, str(exc))

    def check_unused(self):
        extra = sorted(set(self.data) - self.used)
        if extra:
            self.fail(extra[0], "unknown key")


def _state_names(m: int, n: int) -> tuple[str, ...]:
    return tuple(f"x{k}_{j}" for k in range(1, m + 1) for j in range(1, n + 1))


def _bind(exprs, m: int, n: int, with_time: bool) -> Callable:
    """Turn expressions of x{k}_{j} (and t) into a numpy-valued callable."""
    names = _state_names(m, n)

    def env(x):
        flat = np.asarray(x, dtype=float).reshape(-1)
        return dict(zip(names, flat.tolist()))

    if with_time:
        def fn(x, t):
            e = env(x)
            e["t"] = float(t)
            return np.array([ex(**e) for ex in exprs], dtype=float)
    else:
        def fn(x):
            e = env(x)
            return np.array([ex(**e) for ex in exprs], dtype=float)
    return fn


def _faults(node: _Node, key: str, n: int) -> FaultProfile:
    segs = []
    for seg in node.tables(key):
        t0 = seg.number("t_start", nonneg=True)
        phi = seg.expr("phi", ("t",))
        psi = seg.exprs("psi", n, ("t",)) if seg.has("psi") else tuple(compile_expr(0.0) for _ in range(n))
        seg.check_unused()
        segs.append(FaultSegment(t0, phi.at, _vector_of(psi)))
    try:
        return FaultProfile(tuple(segs))
    except ScenarioError:
        raise
    except ValueError as exc:
        node.fail(key, str(exc))


def _vector_of(exprs):
    def psi(t):
        return np.array([e.at(t) for e in exprs], dtype=float)
    return psi


def _graph(root: _Node, origin_dir: Path | None) -> DirectedLeaderGraph:
    node = root.table("graph")
    if node.has("edge_file"):
        path = Path(node.string("edge_file"))
        if not path.is_absolute() and origin_dir is not None:
            path = origin_dir / path
        try:
            g = read_edge_list(path)
        except (OSError, GraphError) as exc:
            node.fail("edge_file", str(exc))
    else:
        n = node.integer("followers", minimum=1)
        edges = node.raw("edges", [])
        links = node.raw("leader_links")
        try:
            g = build_graph(
                [(int(a), int(b), float(w)) for a, b, w in edges],
                [(int(a), float(w)) for a, w in links],
                n,
            )
        except (TypeError, ValueError) as exc:
            node.fail("edges", str(exc))
    node.check_unused()
    if not has_leader_spanning_tree(g):
        node.fail("leader_links", "graph has no spanning tree rooted at the leader")
    return g


def _integrator(root: _Node, default_step: float) -> tuple[IntegratorConfig, float]:
    node = root.table("integrator", required=False)
    step = node.number("step", default_step, positive=True)
    t_end = node.number("t_end", 30.0, positive=True)
    scheme = node.string("scheme", "explicit_euler", ("explicit_euler", "rk4"))
    log_interval = node.number("log_interval", 1e-3, positive=True)
    node.check_unused()
    if log_interval < step:
        node.fail("log_interval", "must not be shorter than the step")
    try:
        cfg = IntegratorConfig(step=step, t_end=t_end, scheme=scheme, log_every=max(1, int(round(log_interval / step))))
    except ScenarioError:
        raise
    except ValueError as exc:
        node.fail("step", str(exc))
    return cfg, log_interval


def _signum(root: _Node) -> SignumPolicy:
    node = root.table("signum", required=False)
    mode = node.string("mode", "boundary_layer", ("exact", "boundary_layer"))
    eps = node.number("epsilon", 1e-3, positive=True)
    node.check_unused()
    return SignumPolicy(mode, eps) if mode == "boundary_layer" else SignumPolicy()


def _estimator(root: _Node, m: int) -> EstimatorGains:
    node = root.table("estimator")
    kappa = node.raw("kappa")
    kappa = [kappa] if isinstance(kappa, (int, float)) else kappa
    if not isinstance(kappa, list) or len(kappa) != m - 1:
        node.fail("kappa", f"expected {m - 1} gains for the lower estimator levels")
    try:
        gains = EstimatorGains(
            kappa=tuple(float(k) for k in kappa),
            kappa_m=node.number("kappa_m", positive=True),
            kappa_eta=node.number("kappa_eta", positive=True),
            kappa_xi=node.number("kappa_xi", positive=True),
            kappa_rho=node.number("kappa_rho", positive=True),
            alpha=node.number("alpha", 0.7),
            beta=node.number("beta", 0.7),
            gamma=node.number("gamma", 0.7),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        node.fail("", str(exc))
    node.check_unused()
    return gains


def _generic(root: _Node, base: dict) -> Scenario:
    lead = root.table("leader")
    m = lead.integer("order", minimum=2)
    n = lead.integer("dim", minimum=1)
    x0 = lead.array("initial", (m, n))
    o = lead.exprs("o", n, _state_names(m, n) + ("t",))
    lead.check_unused()
    leader = LeaderModel(m, n, _bind(o, m, n, with_time=True))

    ctl = root.table("controller")
    delta0 = ctl.number("delta0", 0.05, positive=True)
    kbar = ctl.raw("kbar")
    if not isinstance(kbar, list) or len(kbar) != m:
        ctl.fail("kbar", f"expected {m} backstepping gains")
    n_params = None
    agents_raw = root.tables("agent")
    if agents_raw:
        n_params = len(agents_raw[0].raw("theta", []))
    try:
        gains = ControllerGains(
            kbar=tuple(float(k) for k in kbar),
            k_kappa=ctl.number("k_kappa", 1.0, positive=True),
            Gamma_theta=ctl.matrix("gamma_theta", n_params or 1, 10.0),
            Gamma_eps=ctl.matrix("gamma_eps", n, 1.0),
            delta=exp_decay(delta0),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        ctl.fail("", str(exc))
    kappa0 = ctl.number("kappa0", 0.0)
    ctl.check_unused()

    shared_faults = _faults(root, "faults", n)
    agents = []
    names = _state_names(m, n)
    for node in agents_raw:
        theta = node.array("theta", (None,))
        if theta.size != n_params:
            node.fail("theta", f"expected {n_params} parameters like agent[0]")
        f_raw = node.raw("f")
        if not isinstance(f_raw, list) or len(f_raw) != theta.size or not all(
            isinstance(r, list) and len(r) == n for r in f_raw
        ):
            node.fail("f", f"expected a {theta.size}x{n} array of expressions")
        f_exprs = tuple(node._compile(f"f[{r}][{c}]", v, names) for r, row in enumerate(f_raw) for c, v in enumerate(row))
        f_flat = _bind(f_exprs, m, n, with_time=False)
        g_fn = _bind((node.expr("g", names),), m, n, with_time=False)
        d_fn = _bind(node.exprs("d", n, names + ("t",)), m, n, with_time=True)
        rows = theta.size
        model = FollowerModel(
            m,
            n,
            theta,
            lambda x, _f=f_flat, _r=rows: _f(x).reshape(_r, n),
            lambda x, _g=g_fn: float(_g(x)[0]),
            d_fn,
            name=node.path,
        )
        initial = node.array("initial", (m, n))
        offset = node.array("offset", (n,))
        faults = _faults(node, "faults", n) if node.has("faults") else shared_faults
        node.check_unused()
        agents.append(GenericAgent(model, initial, offset, faults))

    return Scenario(
        **base,
        estimator=_estimator(root, m),
        agents=tuple(agents),
        kappa0=kappa0,
        delta0=delta0,
        controller=gains,
        leader=leader,
        leader_initial=x0,
    )


_ARM_KEYS = ("m1", "m2", "I1", "I2", "l1", "l2", "lc1", "lc2")


def _task(root: _Node, base: dict) -> Scenario:
    ref = root.table("reference")
    xr = ref.exprs("x", 2, ("t",))
    vr = ref.exprs("xdot", 2, ("t",))
    ref.check_unused()

    plant = root.table("plant", required=False)
    grav = plant.number("gravity", GRAVITY, nonneg=True)
    plant.check_unused()

    ctl = root.table("controller", required=False)
    delta0 = ctl.number("delta0", 0.05, positive=True)
    try:
        gains = TaskGains(
            alpha_x=ctl.number("alpha_x", 1.0),
            alpha_r=ctl.number("alpha_r", 0.5),
            K_s=ctl.matrix("K_s", 2, 2.0),
            k_kappa=ctl.number("k_kappa", 1.0),
            Gamma_theta=ctl.matrix("gamma_theta", 5, 10.0),
            Gamma_eps=ctl.matrix("gamma_eps", 2, 1.0),
            Lambda=ctl.matrix("lambda", 4, 1.0),
            delta=exp_decay(delta0),
            grav=ctl.number("gravity", grav, nonneg=True),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        ctl.fail("", str(exc))
    kappa0 = ctl.number("kappa0", 0.0)
    exdot = ctl.string("exdot", "measured", ("measured", "estimated"))
    ctl.check_unused()

    shared_faults = _faults(root, "faults", 2)
    x_d0 = np.array([e.at(0.0) for e in xr], dtype=float)
    agents = []
    for node in root.tables("agent"):
        if node.has("table_row"):
            row = node.integer("table_row", minimum=1)
            if row > len(TABLE_I):
                node.fail("table_row", f"Table I has {len(TABLE_I)} rows")
            values = dict(zip(_ARM_KEYS, TABLE_I[row - 1]))
        else:
            arm_node = node.table("arm")
            values = {k: arm_node.number(k, positive=True) for k in _ARM_KEYS}
            arm_node.check_unused()
        try:
            arm = ArmParams(
                **values,
                v1=node.number("v1", 1.0),
                v2=node.number("v2", 1.0),
                Fv=node.matrix("Fv", 2, 1.0),
                Fc=node.array("Fc", (2, 2), [[1.0, 1.0], [1.0, 1.0]]),
                grav=grav,
            )
        except ScenarioError:
            raise
        except ValueError as exc:
            node.fail("arm", str(exc))
        g = node.expr("g", ("t",))
        d = node.exprs("d", 2, ("t",))
        faults = _faults(node, "faults", 2) if node.has("faults") else shared_faults
        if node.has("q0"):
            q0 = node.array("q0", (2,))
        else:
            start = x_d0 + node.array("start_offset", (2,), [0.0, 0.0])
            elbow = node.integer("elbow", 1)
            if elbow not in (-1, 1):
                node.fail("elbow", "must be +1 or -1")
            try:
                q0 = inverse_kinematics(start, arm, elbow)
            except ScenarioError:
                raise
            except ValueError as exc:
                node.fail("start_offset", str(exc))
        qdot0 = node.array("qdot0", (2,), [0.0, 0.0])
        kin_err = node.number("kinematic_error", 0.2)
        if not -1.0 < kin_err < 1.0:
            node.fail("kinematic_error", "must lie in (-1, 1)")
        a_hat0 = (1.0 - kin_err) * kinematic_params(arm)
        theta_hat0 = node.array("theta_hat0", (5,), [0.0] * 5)
        node.check_unused()
        agents.append(ArmAgent(arm, g, d, faults, q0, qdot0, a_hat0, theta_hat0))

    return Scenario(
        **base,
        estimator=_estimator(root, 2),
        agents=tuple(agents),
        kappa0=kappa0,
        delta0=delta0,
        task=gains,
        reference=(xr, vr),
        plant_gravity=grav,
        exdot_estimated=exdot == "estimated",
    )


def parse_scenario(text: str, origin: str = "<scenario>", base_dir: Path | None = None) -> Scenario:
    """Parse and validate scenario text."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError("", f"parse error: {exc}", origin) from None
    root = _Node(data, "", origin)
    kind = root.string("kind", choices=KINDS)
    name = root.string("name", Path(origin).stem)
    graph = _graph(root, base_dir)
    integ, log_interval = _integrator(root, 1e-4 if kind == "generic_formation" else 1e-5)
    base = dict(
        kind=kind,
        name=name,
        graph=graph,
        integrator=integ,
        log_interval=log_interval,
        signum=_signum(root),
        source=origin,
    )
    scn = _generic(root, base) if kind == "generic_formation" else _task(root, base)
    root.check_unused()
    if scn.n_agents != graph.n_followers:
        raise ScenarioError("agent", f"{scn.n_agents} agents declared but the graph has {graph.n_followers} followers", origin)
    if kind == "generic_formation":
        m, n = scn.leader.order, scn.leader.dim
        for i, a in enumerate(scn.agents):
            if (a.model.order, a.model.dim) != (m, n):
                raise ScenarioError(f"agent[{i}]", "order/dim differ from the leader", origin)
    return scn


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ScenarioError("", f"unknown preset {name!r}; choose from {', '.join(PRESETS)}", name)
    return resources.files("ftformation").joinpath("scenarios", f"{name}.toml").read_text()


def load_scenario(source) -> Scenario:
    """Load a preset by name or a scenario file by path."""
    if isinstance(source, str) and source in PRESETS:
        return parse_scenario(preset_text(source), origin=source)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError("", str(exc), str(path)) from None
    return parse_scenario(text, origin=str(path), base_dir=path.parent)


def with_overrides(scn: Scenario, *, t_end: float | None = None, step: float | None = None, scheme: str | None = None) -> Scenario:
    """Copy of ``scn`` with integrator settings replaced (flags beat files)."""
    cfg = scn.integrator
    step = cfg.step if step is None else float(step)
    new = IntegratorConfig(
        step=step,
        t_end=cfg.t_end if t_end is None else float(t_end),
        scheme=cfg.scheme if scheme is None else scheme,
        log_every=max(1, int(round(scn.log_interval / step))),
    )
    return dataclasses.replace(scn, integrator=new)
