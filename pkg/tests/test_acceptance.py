"""Acceptance criteria, one test and one summary line each.

The two preset runs dominate the cost (paper-5b integrates 6e6 explicit
steps, twice, for the determinism check). Run directly with
``python3 tests/test_acceptance.py`` or through pytest; either way a
``[PASS]``/``[FAIL]`` line per criterion is printed at the end.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from ftformation.metrics import Tolerances, compute_metrics
from ftformation.scenario import load_scenario
from ftformation.simulate import simulate
from ftformation.trace import export_csv
from ftformation.verify import graph_suite, inequality_suite, manipulator_suite, nussbaum_suite

# pinned tolerances
GRAPH_RESIDUAL = 1e-10
SKEW_TOL = 1e-6
IDENTITY_TOL = 1e-10
LEMMA_SLACK = 1e-12
NUSSBAUM_LEVEL = 10.0
EST_TOL = 1e-2
TRACK_TOL = 5e-2
BOUND = 1e3
EQ37_TOL = 1e-8
NUSSBAUM_PRODUCT_TOL = 1e-12
EQ38_REL_TOL = 1e-9

RESULTS: list[str] = []


def record(number: int, ok: bool, text: str) -> bool:
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}")
    return ok


class PresetRuns:
    """Each preset is simulated twice; both CSVs are kept for the byte comparison."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.cache = {}

    def get(self, name):
        if name not in self.cache:
            scn = load_scenario(name)
            runs = []
            for k in range(2):
                t0 = time.perf_counter()
                trace = simulate(scn)
                wall = time.perf_counter() - t0
                path = export_csv(trace, self.out_dir / f"{name}-{k}.csv")
                runs.append((trace, wall, path.read_bytes()))
            trace, wall, _ = runs[0]
            met = compute_metrics(trace, Tolerances(EST_TOL, TRACK_TOL, TRACK_TOL, BOUND))
            self.cache[name] = (trace, met, wall, runs[0][2] == runs[1][2])
        return self.cache[name]


@pytest.fixture(scope="module")
def presets(tmp_path_factory):
    return PresetRuns(tmp_path_factory.mktemp("acceptance"))


def test_criterion_1_graph_certificates():
    res = graph_suite(200, seed=7)
    ok = res.passed and res.worst <= GRAPH_RESIDUAL and res.seconds < 5.0
    assert record(1, ok, f"200 graphs, worst |H^T pi - 1| {res.worst:.1e}, {res.detail}, {res.seconds:.2f} s")


def test_criterion_2_manipulator_identities():
    res = manipulator_suite(1000, seed=11)
    ok = res.passed and res.seconds < 10.0
    assert record(2, ok, f"6x1000 samples, {res.detail} (skew tol {SKEW_TOL:g}, identity tol {IDENTITY_TOL:g}), {res.seconds:.2f} s")


def test_criterion_3_inequalities():
    res = inequality_suite(10_000, seed=13)
    ok = res.passed and res.worst <= LEMMA_SLACK
    assert record(3, ok, f"{res.checked} draws, {res.detail}, worst relative gap {res.worst:.1e}")


def test_criterion_4_nussbaum_witness():
    res = nussbaum_suite(6.0, 1e-4)
    assert record(4, res.passed, f"{res.detail} (needs > {NUSSBAUM_LEVEL:g} and < -{NUSSBAUM_LEVEL:g})")


def test_criterion_5_formation_preset(presets):
    trace, met, wall, _ = presets.get("paper-5a")
    est = met.settling.get("est_err", [])
    trk = met.final_error.get("track_err", [])
    vel = met.final_error.get("vel_err", [])
    a = not met.diverged and all(s is not None for s in est)
    b = not met.diverged and max(trk) < TRACK_TOL and max(vel) < TRACK_TOL and met.t_final >= 30.0
    c = not met.diverged and met.bounded
    ok = a and b and c and wall < 300
    why = f"diverged at t={trace.divergence.time:.4g} s ({trace.divergence.signal}); " if met.diverged else ""
    text = (
        f"{why}(a) estimators settled: {a}, (b) final track/vel error {max(trk):.3g}/{max(vel):.3g} at t={met.t_final:.4g} s: {b}, "
        f"(c) bounded: {c}; {wall:.1f} s"
    )
    assert record(5, ok, text)


def test_criterion_6_manipulator_preset(presets):
    trace, met, wall, _ = presets.get("paper-5b")
    final = met.final_error["track_err"]
    eq37 = met.residuals["eq37"]
    tail = trace.times >= trace.times[-1] - 5.0
    tail_max = max(np.linalg.norm(trace.channel(i, "track_err")[tail], axis=1).max() for i in trace.agents())
    ok = (
        not met.diverged
        and met.t_final >= 30.0
        and max(final) < TRACK_TOL
        and met.bounded
        and eq37 < EQ37_TOL
        and wall < 600
    )
    sup = ", ".join(f"{k} {v:.3g}" for k, v in met.sup_norm.items())
    text = (
        f"final |x_i - x_d| max {max(final):.3g} (< {TRACK_TOL:g}) at t={met.t_final:.4g} s, "
        f"last-5 s max {tail_max:.3g}; sup {sup}; eq37 {eq37:.1e}; {wall:.0f} s"
    )
    assert record(6, ok, text)


def test_criterion_7_consistency(presets):
    parts, ok = [], True
    for name in ("paper-5a", "paper-5b"):
        _, met, _, _ = presets.get(name)
        prod = met.residuals["nussbaum_product"]
        ok &= prod <= NUSSBAUM_PRODUCT_TOL
        parts.append(f"{name} u=N(kappa)ubar {prod:.1e}")
        if "eq38" in met.residuals:
            ok &= met.residuals["eq38"] <= EQ38_REL_TOL
            parts.append(f"{name} closed-loop relation {met.residuals['eq38']:.1e} (relative)")
    assert record(7, ok, "; ".join(parts))


def test_criterion_8_determinism(presets):
    same = {name: presets.get(name)[3] for name in ("paper-5a", "paper-5b")}
    assert record(8, all(same.values()), ", ".join(f"{k} identical: {v}" for k, v in same.items()))


if __name__ == "__main__":  # pragma: no cover
    import sys
    import tempfile
    from pathlib import Path

    runs = PresetRuns(Path(tempfile.mkdtemp()))
    tests = [
        test_criterion_1_graph_certificates,
        test_criterion_2_manipulator_identities,
        test_criterion_3_inequalities,
        test_criterion_4_nussbaum_witness,
        lambda: test_criterion_5_formation_preset(runs),
        lambda: test_criterion_6_manipulator_preset(runs),
        lambda: test_criterion_7_consistency(runs),
        lambda: test_criterion_8_determinism(runs),
    ]
    for fn in tests:
        try:
            fn()
        except AssertionError:
            pass
    print("\n".join(RESULTS))
    sys.exit(0 if all(line.startswith("[PASS]") for line in RESULTS) else 1)
