"""Compiled vs numpy closed-loop kernel on the six-arm preset.

    python3 benchmarks/bench_kernels.py [--steps N]
"""

import argparse
import time

import numpy as np

from ftformation import kernels
from ftformation.scenario import load_scenario
from ftformation.simulate import initial_state, task_coefficients, task_params


def per_call(net, y, c, repeat):
    dy = np.zeros_like(y)
    t0 = time.perf_counter()
    for _ in range(repeat):
        net.rhs(y, c, dy)
    return (time.perf_counter() - t0) / repeat


def stepped(net, y, C, h):
    y = y.copy()
    t0 = time.perf_counter()
    net.advance(y, C, h)
    return (time.perf_counter() - t0) / C.shape[0], y


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()

    scn = load_scenario("paper-5b")
    params = task_params(scn)
    y0 = initial_state(scn)
    h = scn.integrator.step
    C = task_coefficients(scn, np.arange(args.steps) * h)

    py = kernels.PyTaskNetwork(params)
    rows = [("python", py)]
    if kernels.compiled_available():
        rows.insert(0, ("cython", kernels._CTaskNetwork(params)))
    else:
        print("compiled kernel not built; timing the numpy backend only")

    finals = {}
    for name, net in rows:
        rhs = per_call(net, y0, C[0], args.repeat if name == "cython" else max(5, args.repeat // 50))
        n = args.steps if name == "cython" else min(args.steps, 200)
        step, y = stepped(net, y0, np.ascontiguousarray(C[:n]), h)
        finals[name] = (n, y)
        print(f"{name:7s} rhs {rhs * 1e6:9.2f} us/call   euler {step * 1e6:9.2f} us/step")
    if len(finals) == 2:
        n = finals["python"][0]
        _, yc = stepped(rows[0][1], y0, np.ascontiguousarray(C[:n]), h)
        print(f"max |cython - python| after {n} steps: {np.abs(yc - finals['python'][1]).max():.3e}")


if __name__ == "__main__":
    main()
