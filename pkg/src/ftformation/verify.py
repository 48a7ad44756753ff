"""Numeric property suites behind ``ftformation verify``.

Each suite draws from a fixed-seed generator, so a clean build always
reports the same counts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph import build_graph, certificate
from .manipulator import (
    TABLE_I,
    ArmParams,
    _mcg,
    dynamic_regressor,
    jacobian,
    kinematic_params,
    kinematic_regressor,
    theta_vector,
)
from .numerics import lemma1_chain, lemma3_gap, running_nussbaum_mean

__all__ = [
    "SuiteResult",
    "random_rooted_graph",
    "graph_suite",
    "manipulator_suite",
    "inequality_suite",
    "nussbaum_suite",
    "SUITES",
    "run_all",
]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    checked: int
    worst: float
    detail: str
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.checked} checks, worst {self.worst:.3e}, {self.detail} ({self.seconds:.2f} s)"


def _timed(fn: Callable[..., tuple[bool, int, float, str]], name: str, *args) -> SuiteResult:
    t0 = time.perf_counter()
    ok, count, worst, detail = fn(*args)
    return SuiteResult(name, ok, count, worst, detail, time.perf_counter() - t0)


def random_rooted_graph(rng: np.random.Generator, n_max: int = 8):
    """A random graph with a leader-rooted spanning tree and weights in (0, 2]."""
    n = int(rng.integers(1, n_max + 1))
    order = rng.permutation(n) + 1
    edges = {}
    links = [(int(order[0]), float(rng.uniform(1e-3, 2.0)))]
    # every node after the first gets a parent earlier in the order
    for k in range(1, n):
        parent = int(order[rng.integers(0, k)])
        edges[(parent, int(order[k]))] = float(rng.uniform(1e-3, 2.0))
    for _ in range(int(rng.integers(0, n * n))):
        a, b = (int(v) for v in rng.integers(1, n + 1, size=2))
        if a != b:
            edges.setdefault((a, b), float(rng.uniform(1e-3, 2.0)))
    for node in range(1, n + 1):
        if node != links[0][0] and rng.random() < 0.2:
            links.append((node, float(rng.uniform(1e-3, 2.0))))
    return build_graph([(a, b, w) for (a, b), w in edges.items()], links, n)


def _graphs(count: int, seed: int):
    rng = np.random.default_rng(seed)
    worst, bad = 0.0, 0
    for _ in range(count):
        g = random_rooted_graph(rng)
        cert = certificate(g)
        res = float(np.abs(cert.H.T @ cert.pi - 1.0).max())
        # independent route: general (non-symmetric) eigen-solver on Xi
        lam = float(np.min(np.linalg.eigvals(cert.Xi).real))
        agree = abs(lam - cert.lambda_min_Xi) <= 1e-9 * max(1.0, abs(lam))
        worst = max(worst, res)
        if not (res <= 1e-10 and np.all(cert.pi > 0) and cert.lambda_min_Xi > 0 and lam > 0 and agree):
            bad += 1
    return bad == 0, count, worst, f"{bad} failures"


def graph_suite(count: int = 200, seed: int = 7) -> SuiteResult:
    return _timed(_graphs, "graph certificates", count, seed)


def _arms(samples: int, seed: int):
    rng = np.random.default_rng(seed)
    worst = {"pd": np.inf, "skew": 0.0, "regressor": 0.0, "kinematic": 0.0}
    count = 0
    h = 1e-6
    for row in TABLE_I:
        p = ArmParams.from_row(row)
        th, a = theta_vector(p), kinematic_params(p)
        for _ in range(samples):
            q, qd, v, acc = (rng.uniform(-np.pi, np.pi, 2) for _ in range(4))
            x = rng.normal(size=2)
            M, C, G = _mcg(q, qd, th, p.grav)
            worst["pd"] = min(worst["pd"], float(np.linalg.eigvalsh(M).min()))
            # central difference of M along qdot
            Mp, _, _ = _mcg(q + h * qd, qd, th, p.grav)
            Mm, _, _ = _mcg(q - h * qd, qd, th, p.grav)
            Mdot = (Mp - Mm) / (2 * h)
            worst["skew"] = max(worst["skew"], abs(float(x @ (Mdot - 2.0 * C) @ x)))
            Y = dynamic_regressor(q, qd, v, acc, p.grav)
            err = np.abs(Y @ th - (M @ acc + C @ v + G)).max()
            worst["regressor"] = max(worst["regressor"], float(err))
            err = np.abs(jacobian(q, p) @ qd - kinematic_regressor(q, qd) @ a).max()
            worst["kinematic"] = max(worst["kinematic"], float(err))
            count += 4
    ok = worst["pd"] > 0 and worst["skew"] <= 1e-6 and worst["regressor"] <= 1e-10 and worst["kinematic"] <= 1e-10
    detail = ", ".join(f"{k}={v:.2e}" for k, v in worst.items())
    return ok, count, max(worst["skew"], worst["regressor"], worst["kinematic"]), detail


def manipulator_suite(samples: int = 1000, seed: int = 11) -> SuiteResult:
    return _timed(_arms, "manipulator identities", samples, seed)


def _inequalities(draws: int, seed: int):
    rng = np.random.default_rng(seed)
    slack = 1e-12
    bad = 0
    worst = 0.0
    for _ in range(draws):
        n = int(rng.integers(1, 11))
        xi = rng.uniform(0.0, 10.0, n) * (rng.random(n) > 0.1)
        p = float(rng.uniform(1e-3, 1.0)) if rng.random() < 0.5 else float(rng.uniform(1.0, 4.0))
        lo, mid, hi = lemma1_chain(xi, p)
        scale = max(1.0, abs(lo), abs(mid), abs(hi))
        if p <= 1.0:
            gap = max(lo - mid, mid - hi)
        else:
            gap = max(hi - mid, mid - lo)
        worst = max(worst, gap / scale)
        bad += gap > slack * scale
    x = rng.normal(scale=rng.uniform(1e-3, 1e3, draws))
    gamma = rng.uniform(1e-6, 10.0, draws)
    gap = lemma3_gap(x, gamma)
    scale = np.maximum(1.0, np.abs(x))
    viol = np.maximum(-gap, gap - gamma) / scale
    bad += int(np.sum(viol > slack))
    worst = max(worst, float(viol.max()))
    return bad == 0, 2 * draws, worst, f"{bad} violations"


def inequality_suite(draws: int = 10_000, seed: int = 13) -> SuiteResult:
    return _timed(_inequalities, "lemma inequalities", draws, seed)


def _nussbaum(kmax: float, step: float):
    _, mean = running_nussbaum_mean(kmax, step)
    hi, lo = float(mean.max()), float(mean.min())
    return hi > 10 and lo < -10, mean.size, 0.0, f"max mean {hi:.3g}, min mean {lo:.3g}"


def nussbaum_suite(kmax: float = 6.0, step: float = 1e-4) -> SuiteResult:
    return _timed(_nussbaum, "nussbaum oscillation", kmax, step)


SUITES = {
    "graph": graph_suite,
    "manipulator": manipulator_suite,
    "inequalities": inequality_suite,
    "nussbaum": nussbaum_suite,
}


def run_all() -> list[SuiteResult]:
    return [fn() for fn in SUITES.values()]
