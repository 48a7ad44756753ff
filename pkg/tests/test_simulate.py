from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from ftformation import kernels
from ftformation.kernels import AUX_WIDTH, PyTaskNetwork, aux_offsets
from ftformation.manipulator import ArmState, arm_derivative
from ftformation.plant import FaultProfile, FaultSegment
from ftformation.scenario import load_scenario, with_overrides
from ftformation.simulate import (
    StateLayout,
    SweepJob,
    initial_state,
    run,
    simulate,
    sweep,
    task_coefficients,
    task_layout,
    task_params,
)

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def pair():
    return load_scenario(DATA / "pair.toml")


@pytest.fixture(scope="module")
def pair_run(pair):
    return run(pair)


def test_layout_round_trip(rng):
    lay = StateLayout([("a", (2, 3)), ("b", (4,)), ("c", (1, 1))])
    parts = {"a": rng.normal(size=(2, 3)), "b": rng.normal(size=4), "c": [[5.0]]}
    y = lay.pack(parts)
    assert y.size == lay.size == 11
    back = lay.unpack(y)
    for k in parts:
        np.testing.assert_array_equal(back[k], np.asarray(parts[k]))
    back["b"][0] = 99.0
    assert y[6] == 99.0
    assert lay.names()[:2] == ["a[0, 0]", "a[0, 1]"] and lay.names()[-1] == "c[0, 0]"


def test_task_layout_matches_kernel_offsets():
    lay = task_layout(6)
    offs = kernels.block_offsets(kernels.TASK_STATE, 6)
    for name, (sl, _) in lay.slices.items():
        assert sl.start == offs[name][0]


def test_pair_converges(pair_run):
    trace, met = pair_run
    assert met.converged and met.status == 0
    assert max(met.final_error["track_err"]) < 1e-3
    assert max(met.settling["est_err"]) < max(met.settling["track_err"])
    assert trace.meta["scenario"] == "pair"


def test_generic_run_is_deterministic(pair, pair_run):
    again = simulate(pair)
    for k, v in pair_run[0].channels.items():
        np.testing.assert_array_equal(again[k], v)


def test_rk4_and_euler_agree_on_benign_case(pair, pair_run):
    tr = simulate(with_overrides(pair, scheme="rk4"))
    diff = np.abs(tr["agent1.x1"] - pair_run[0]["agent1.x1"]).max()
    assert diff < 5e-3


def test_task_backends_agree_on_short_run():
    if not kernels.compiled_available():
        pytest.skip("compiled kernel not built")
    scn = with_overrides(load_scenario("paper-5b"), t_end=2e-3)
    a, b = simulate(scn, "python"), simulate(scn, "cython")
    assert len(a) == len(b) == 3
    for k in a.channels:
        np.testing.assert_allclose(b[k], a[k], rtol=1e-9, atol=1e-12, err_msg=k)


def test_task_plant_matches_arm_model(rng):
    """Joint accelerations from the network equal the single-arm model with the same torque."""
    scn = load_scenario("paper-5b")
    net = PyTaskNetwork(task_params(scn))
    y = initial_state(scn) + 0.05 * rng.normal(size=initial_state(scn).size)
    t = 4.2
    c = task_coefficients(scn, [t])[0]
    dy, aux = np.zeros_like(y), np.zeros((6, AUX_WIDTH))
    net.rhs(y, c, dy, aux)
    lay = task_layout(6)
    s, d = lay.unpack(y), lay.unpack(dy)
    off, _ = aux_offsets()["tau"]
    for i, agent in enumerate(scn.agents):
        seg = agent.faults.active(t)
        prof = FaultProfile((FaultSegment(0.0, seg.phi, seg.psi),))
        _, qdd = arm_derivative(
            ArmState(s["q"][i], s["qdot"][i]), aux[i, off : off + 2], t, agent.arm, prof,
            g_fn=agent.g.at, d_fn=lambda tt, a=agent: np.array([a.d[0].at(tt), a.d[1].at(tt)]),
        )
        np.testing.assert_allclose(d["qdot"][i], qdd, rtol=1e-10, atol=1e-10)


def test_generic_divergence_is_reported(pair):
    scn = replace(pair, controller=replace(pair.controller, k_kappa=1e6))
    scn = with_overrides(scn, t_end=2.0)
    trace, met = run(scn)
    assert trace.diverged and met.status == 2
    assert "kappa" in trace.divergence.signal or "exceeds" in trace.divergence.signal


def test_sweep_keeps_order():
    src = str(DATA / "pair.toml")
    seen = []
    out = sweep([SweepJob(src, t_end=0.2), SweepJob(src, t_end=0.1)], workers=2, on_done=lambda job, tr, m: seen.append(job.t_end))
    assert [r[0].times[-1] for r in out] == pytest.approx([0.2, 0.1])
    assert sorted(seen) == [0.1, 0.2]
