import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftformation.metrics import EXIT_CONVERGED, EXIT_DIVERGED, EXIT_INCONCLUSIVE, Tolerances, compute_metrics
from ftformation.numerics import nussbaum
from ftformation.trace import DivergenceReport, SimTrace


def synthetic(decay=1.0, T=10.0, kappa=0.5, divergence=None):
    t = np.linspace(0, T, 1001)
    e = np.exp(-decay * t)[:, None] * np.array([[0.6, 0.8]])
    ubar = np.column_stack([np.sin(t), np.cos(t)])
    chans = {}
    for i in (1, 2):
        chans[f"agent{i}.track_err"] = e * i
        chans[f"agent{i}.vel_err"] = -e
        chans[f"agent{i}.est_err"] = np.hstack([e, e]) * 0.1
        chans[f"agent{i}.kappa"] = np.full(t.size, kappa)
        chans[f"agent{i}.ubar"] = ubar
        chans[f"agent{i}.u"] = nussbaum(kappa) * ubar
        chans[f"agent{i}.theta_hat"] = np.ones((t.size, 2))
    return SimTrace(t, chans, divergence)


def test_perfect_tracking():
    t = np.linspace(0, 1, 11)
    z = np.zeros((11, 2))
    tr = SimTrace(t, {"agent1.track_err": z, "agent1.vel_err": z, "agent1.est_err": np.zeros((11, 4))})
    met = compute_metrics(tr)
    assert met.settling["track_err"] == [0.0]
    assert met.final_error["est_err"] == [0.0]
    assert met.status == EXIT_CONVERGED


def test_exponential_decay_settling():
    met = compute_metrics(synthetic())
    # |e| = i exp(-t) crosses 0.05 at t = ln(20 i); samples are 0.01 apart
    assert met.settling["track_err"][0] == pytest.approx(np.log(20), abs=0.011)
    assert met.settling["track_err"][1] == pytest.approx(np.log(40), abs=0.011)
    # estimator blocks are stacked (position, velocity); max over blocks
    assert met.settling["est_err"][0] == pytest.approx(np.log(10), abs=0.011)
    assert met.residuals["nussbaum_product"] == 0.0
    assert met.sup_norm["kappa"] == 0.5 and met.bounded


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-3, 0.5), st.floats(1.01, 10.0))
def test_settling_monotone_in_tolerance(tol, factor):
    tr = synthetic()
    a = compute_metrics(tr, Tolerances(tracking=tol, velocity=tol))
    b = compute_metrics(tr, Tolerances(tracking=tol * factor, velocity=tol * factor))
    for x, y in zip(a.settling["track_err"], b.settling["track_err"]):
        assert y <= x


def test_statuses():
    assert compute_metrics(synthetic(decay=0.01)).status == EXIT_INCONCLUSIVE
    div = synthetic(divergence=DivergenceReport(9.9, "agent1.kappa left the admissible range"))
    met = compute_metrics(div)
    assert met.status == EXIT_DIVERGED and not met.converged
    assert all(s is None for s in met.settling["track_err"])
    assert "diverged" in met.summary()
    big = synthetic(kappa=2.0)
    assert compute_metrics(big, Tolerances(bound=1.5)).status == EXIT_INCONCLUSIVE


def test_nussbaum_residual_detects_mismatch():
    tr = synthetic()
    tr.channels["agent2.u"] = tr["agent2.u"] * 1.01
    assert compute_metrics(tr).residuals["nussbaum_product"] == pytest.approx(0.01, rel=0.05)


def test_dict_export_and_empty():
    d = compute_metrics(synthetic()).to_dict()
    assert d["status"] == 0 and d["tolerances"]["tracking"] == 0.05
    with pytest.raises(ValueError):
        compute_metrics(SimTrace(np.zeros(0), {}))
