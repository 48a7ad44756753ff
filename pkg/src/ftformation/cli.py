"""Command-line entry point: ``ftformation <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .graph import GraphError, certificate, has_leader_spanning_tree, read_edge_list
from .metrics import EXIT_CONVERGED, EXIT_DIVERGED, EXIT_INCONCLUSIVE, Tolerances, compute_metrics
from .scenario import PRESETS, ScenarioError, load_scenario, with_overrides
from .trace import export_csv, read_csv

EXIT_USAGE = 64
EXIT_ERROR = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


class CliError(RuntimeError):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ftformation", description="Fault-tolerant formation and networked-arm simulations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="simulate a preset or a scenario file")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--scenario", metavar="FILE")
    src.add_argument("--sweep", nargs="+", metavar="SRC", help="presets or scenario files run concurrently")
    r.add_argument("--t-end", type=float, metavar="S")
    r.add_argument("--step", type=float, metavar="H")
    r.add_argument("--scheme", choices=("explicit_euler", "rk4"))
    r.add_argument("--out", metavar="DIR")
    r.add_argument("--no-plots", action="store_true")
    r.add_argument("--workers", type=int, default=None)
    r.add_argument("--force", action="store_true", help="overwrite existing outputs")
    r.add_argument("--seed", type=int, help="accepted and ignored; the simulations are deterministic")

    c = sub.add_parser("certify-graph", help="print H, pi and lambda_min(Xi) of an edge list")
    c.add_argument("file")

    m = sub.add_parser("metrics", help="recompute metrics from a trace CSV")
    m.add_argument("trace")
    m.add_argument("--tol", type=float, default=Tolerances().tracking, help="tracking tolerance")
    m.add_argument("--est-tol", type=float, default=Tolerances().estimator)
    m.add_argument("--json", action="store_true")

    pl = sub.add_parser("plot", help="render figures from a trace CSV")
    pl.add_argument("trace")
    pl.add_argument("--out", required=True, metavar="DIR")
    pl.add_argument("--force", action="store_true")

    v = sub.add_parser("verify", help="run the numeric property suites")
    v.add_argument("--suite", action="append", choices=("graph", "manipulator", "inequalities", "nussbaum"))
    return p


def _claim(path: Path, force: bool):
    if path.exists() and not force:
        raise CliError(f"{path} exists; pass --force to overwrite")


def _write_outputs(name: str, trace, metrics, out: Path, plots: bool, force: bool):
    from .plotting import export_plots

    out.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out / f"{name}.csv", out / f"{name}.metrics.json"
    plot_dir = out / f"{name}_plots"
    for path in (csv_path, json_path) + ((plot_dir,) if plots else ()):
        _claim(path, force)
    export_csv(trace, csv_path)
    json_path.write_text(json.dumps(metrics.to_dict(), indent=2, default=str) + "\n")
    if plots:
        export_plots(trace, plot_dir)


def _cmd_run(args) -> int:
    from .simulate import SweepJob, run, sweep

    if args.sweep:
        jobs = [SweepJob(s, args.t_end, args.step) for s in args.sweep]
        if args.out:
            for job in jobs:
                name = Path(job.source).stem
                for path in (Path(args.out) / f"{name}.csv", Path(args.out) / f"{name}.metrics.json"):
                    _claim(path, args.force)
        statuses = []
        for job, (trace, metrics) in zip(jobs, sweep(jobs, args.workers)):
            name = Path(job.source).stem
            print(f"== {job.source}\n{metrics.summary()}")
            if args.out:
                _write_outputs(name, trace, metrics, Path(args.out), not args.no_plots, args.force)
            statuses.append(metrics.status)
        if EXIT_DIVERGED in statuses:
            return EXIT_DIVERGED
        return EXIT_INCONCLUSIVE if EXIT_INCONCLUSIVE in statuses else EXIT_CONVERGED

    scn = load_scenario(args.preset or args.scenario)
    scn = with_overrides(scn, t_end=args.t_end, step=args.step, scheme=args.scheme)
    if args.out:
        out = Path(args.out)
        for path in (out / f"{scn.name}.csv", out / f"{scn.name}.metrics.json"):
            _claim(path, args.force)
    trace, metrics = run(scn)
    print(metrics.summary())
    if args.out:
        _write_outputs(scn.name, trace, metrics, Path(args.out), not args.no_plots, args.force)
        print(f"wrote {Path(args.out) / scn.name}.csv")
    return metrics.status


def _cmd_certify(args) -> int:
    g = read_edge_list(args.file)
    if not has_leader_spanning_tree(g):
        raise CliError("graph has no spanning tree rooted at the leader; certificate refused")
    cert = certificate(g)
    import numpy as np

    with np.printoptions(precision=6, suppress=True):
        print("H =")
        print(cert.H)
        print(f"pi = {cert.pi}")
        print("Xi =")
        print(cert.Xi)
    print(f"lambda_min(Xi) = {cert.lambda_min_Xi:.6f}")
    print(f"residual |H^T pi - 1| = {cert.residual:.3e}")
    return 0


def _cmd_metrics(args) -> int:
    trace = read_csv(args.trace)
    tol = Tolerances(estimator=args.est_tol, tracking=args.tol, velocity=args.tol)
    met = compute_metrics(trace, tol)
    print(json.dumps(met.to_dict(), indent=2, default=str) if args.json else met.summary())
    return met.status


def _cmd_plot(args) -> int:
    from .plotting import export_plots

    out = Path(args.out)
    trace = read_csv(args.trace)
    if out.exists() and any(out.iterdir()) and not args.force:
        raise CliError(f"{out} is not empty; pass --force to overwrite")
    for path in export_plots(trace, out):
        print(path)
    return 0


def _cmd_verify(args) -> int:
    from .verify import SUITES

    names = args.suite or list(SUITES)
    results = [SUITES[n]() for n in names]
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else EXIT_ERROR


COMMANDS = {
    "run": _cmd_run,
    "certify-graph": _cmd_certify,
    "metrics": _cmd_metrics,
    "plot": _cmd_plot,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (CliError, ScenarioError, GraphError, OSError, ValueError) as exc:
        print(f"ftformation: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
