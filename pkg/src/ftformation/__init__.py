"""Distributed fault-tolerant formation control with unknown control directions.

Simulation library for leader-follower networks of uncertain nonlinear
agents and of two-link manipulators, built around a finite-time distributed
leader estimator and Nussbaum-gain adaptive controllers.
"""

from .graph import DirectedLeaderGraph, GraphCertificate, GraphError, build_graph, certificate, has_leader_spanning_tree
from .metrics import Metrics, Tolerances, compute_metrics
from .numerics import IntegratorConfig, SignumPolicy, integrate, nussbaum, settling_time, sig_pow, signum
from .scenario import PRESETS, Scenario, ScenarioError, load_scenario, with_overrides
from .simulate import run, simulate, sweep
from .trace import SimTrace, export_csv, read_csv

__version__ = "0.1.0"

__all__ = [
    "DirectedLeaderGraph",
    "GraphCertificate",
    "GraphError",
    "build_graph",
    "certificate",
    "has_leader_spanning_tree",
    "Metrics",
    "Tolerances",
    "compute_metrics",
    "IntegratorConfig",
    "SignumPolicy",
    "integrate",
    "nussbaum",
    "settling_time",
    "sig_pow",
    "signum",
    "PRESETS",
    "Scenario",
    "ScenarioError",
    "load_scenario",
    "with_overrides",
    "run",
    "simulate",
    "sweep",
    "SimTrace",
    "export_csv",
    "read_csv",
]
