from pathlib import Path

import numpy as np
import pytest

from ftformation.manipulator import TABLE_I, forward_kinematics
from ftformation.plant import paper_fault_schedule, paper_second_order
from ftformation.scenario import PRESETS, ScenarioError, load_scenario, parse_scenario, preset_text, with_overrides

DATA = Path(__file__).parent / "data"
PAIR = (DATA / "pair.toml").read_text()


def parse(text):
    return parse_scenario(text, origin="case.toml", base_dir=DATA)


@pytest.mark.parametrize("name", PRESETS)
def test_presets_load(name):
    scn = load_scenario(name)
    assert scn.name == name and scn.n_agents == 6
    assert scn.integrator.t_end == 30.0
    assert scn.log_every * scn.integrator.step == pytest.approx(1e-3)


def test_preset_5a_matches_hand_built_models(rng):
    scn = load_scenario("paper-5a")
    for i, agent in enumerate(scn.agents, start=1):
        ref = paper_second_order(i)
        np.testing.assert_allclose(agent.model.theta, ref.theta)
        x = rng.normal(size=(2, 2))
        assert agent.model.g(x) == pytest.approx(ref.g(x), rel=1e-12)
        np.testing.assert_allclose(agent.model.f(x), ref.f(x), rtol=1e-12)
        np.testing.assert_allclose(agent.model.d(x, 1.7), ref.d(x, 1.7), rtol=1e-12)
    sched = paper_fault_schedule()
    for t in (1.0, 4.0, 7.0):
        for a, b in zip(scn.agents[0].faults.coefficients(t, 2), sched.coefficients(t, 2)):
            np.testing.assert_allclose(a, b, rtol=1e-12)


def test_preset_5b_start_positions():
    scn = load_scenario("paper-5b")
    x_d0 = np.array([scn.reference[0][k].at(0.0) for k in range(2)])
    for i, agent in enumerate(scn.agents, start=1):
        ang = 2 * np.pi * (i - 1) / 6
        want = x_d0 + 0.5 * np.array([np.cos(ang), np.sin(ang)])
        np.testing.assert_allclose(forward_kinematics(agent.q0, agent.arm), want, atol=1e-12)
        assert agent.arm.m1 == TABLE_I[i - 1][0]
        np.testing.assert_allclose(agent.a_hat0, 0.8 * np.array([agent.arm.l1 * agent.arm.v1, agent.arm.l2 * agent.arm.v1, agent.arm.l1 * agent.arm.v2, agent.arm.l2 * agent.arm.v2]))


def test_edge_file_relative_to_scenario():
    scn = load_scenario(DATA / "pair.toml")
    assert scn.graph.n_followers == 2 and scn.kind == "generic_formation"


def test_unknown_key_is_named():
    with pytest.raises(ScenarioError, match=r"case.toml: integrator.stepp: unknown key"):
        parse(PAIR.replace("step = 1e-3", "stepp = 1e-3"))


def test_agent_count_mismatch():
    text = PAIR.replace('edge_file = "pair_edges.txt"', "followers = 3\nedges = [[1, 2, 1.0], [2, 3, 1.0]]\nleader_links = [[1, 1.0]]")
    with pytest.raises(ScenarioError, match="2 agents declared but the graph has 3"):
        parse(text)


def test_parse_error_reports_position():
    with pytest.raises(ScenarioError, match=r"line 3, column"):
        parse('kind = "generic_formation"\nname = "x"\n[graph\n')


@pytest.mark.parametrize(
    "old, new, where",
    [
        ('g = "1"', 'g = "1 + y"', "agent"),
        ("kappa_m = 3.0", "kappa_m = -3.0", "estimator.kappa_m"),
        ("kbar = [2.0, 4.0]", "kbar = [2.0]", "controller.kbar"),
        ("initial = [[0.4], [0.0]]", "initial = [[0.4]]", "agent"),
        ('kind = "generic_formation"', 'kind = "other"', "kind"),
        ("log_interval = 1e-2", "log_interval = 1e-5", "integrator.log_interval"),
    ],
)
def test_field_errors(old, new, where):
    assert old in PAIR
    with pytest.raises(ScenarioError) as info:
        parse(PAIR.replace(old, new, 1))
    assert where in str(info.value)


def test_graph_without_tree_rejected():
    text = PAIR.replace('edge_file = "pair_edges.txt"', "followers = 2\nedges = []\nleader_links = [[1, 1.0]]")
    with pytest.raises(ScenarioError, match="spanning tree"):
        parse(text)


def test_missing_file_and_unknown_preset():
    with pytest.raises(ScenarioError):
        load_scenario(DATA / "nope.toml")
    with pytest.raises(ScenarioError):
        preset_text("paper-9z")


def test_overrides():
    scn = load_scenario(DATA / "pair.toml")
    new = with_overrides(scn, t_end=1.0, step=5e-4, scheme="rk4")
    assert (new.integrator.t_end, new.integrator.step, new.integrator.scheme) == (1.0, 5e-4, "rk4")
    assert new.log_every == 20
    assert scn.integrator.t_end == 4.0


def test_missing_key_is_reported_once():
    with pytest.raises(ScenarioError) as info:
        parse(PAIR.replace("kappa_m = 3.0\n", ""))
    assert str(info.value) == "case.toml: estimator.kappa_m: missing required key"
