"""Compare the compiled and pure-Python Lotka-Volterra stepping kernels.

Runs the same seeded simulation through each available kernel (and through
the general numpy stepper for reference), reports the cost per step and
checks that the kernels produce identical trajectories.

    python3 benchmarks/bench_kernel.py [--steps 200000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from kolmo.core import KolmogorovModel
from kolmo.sde import SimConfig, simulate
from kolmo.sde import backend
from kolmo.zoo import RPSParams, rps_model


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200_000, help="time steps per run")
    ap.add_argument("--repeat", type=int, default=3, help="runs per kernel; the fastest counts")
    ap.add_argument("--general-steps", type=int, default=20_000, help="steps for the general numpy stepper")
    args = ap.parse_args()

    model = rps_model(RPSParams(1.2, 0.6, 0.5))
    y0 = [0.5, 0.4, 0.3]
    dt = 1e-3
    cfg = SimConfig(t_final=args.steps * dt, dt=dt, seed=0, stride=1000)

    print(f"{'path':<22}{'steps':>10}{'seconds':>10}{'us/step':>10}")
    results = {}
    for name in sorted(backend.BACKENDS):
        secs, traj = best_time(lambda: simulate(model, y0, cfg, backend_name=name), args.repeat)
        results[name] = (secs, traj)
        print(f"{name + ' kernel':<22}{args.steps:>10}{secs:>10.3f}{1e6 * secs / args.steps:>10.3f}")

    general = KolmogorovModel(3, lambda x: model.m + x @ model.A.T, model.sigma)
    gcfg = SimConfig(t_final=args.general_steps * dt, dt=dt, seed=0, stride=1000)
    secs, _ = best_time(lambda: simulate(general, y0, gcfg), 1)
    print(f"{'general numpy':<22}{args.general_steps:>10}{secs:>10.3f}{1e6 * secs / args.general_steps:>10.3f}")

    if len(results) == 2:
        (tc, a), (tp, b) = results["compiled"], results["python"]
        same = np.array_equal(a.log_states, b.log_states) and np.array_equal(a.batch_sums, b.batch_sums)
        print(f"\nspeed-up compiled vs python: {tp / tc:.1f}x; identical output: {same}")
    else:
        print("\ncompiled extension not built; only the python kernel was timed")


if __name__ == "__main__":
    main()
