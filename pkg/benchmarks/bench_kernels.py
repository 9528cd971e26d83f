"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--slots N] [--grid K]

Prints wall time per backend and the speed-up, and checks both backends
return identical numbers.
"""

import argparse
import time

import numpy as np

from ffpower import _backend
from ffpower.core import Bernoulli, SystemParams
from ffpower.policies import FixedFractionPolicy, split_budget
from ffpower.sim import draw_arrivals, trial_rng


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--slots", type=int, default=1_000_000)
    parser.add_argument("--grid", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    params = SystemParams(1.0, 1.0, 2.0, 1.5)
    arrivals = draw_arrivals(Bernoulli(0.5, 2.0), args.slots, trial_rng(0, 0))
    kind, q, tt, tp, step = FixedFractionPolicy(0.5, params).kernel_args()
    cost = split_budget(np.linspace(0, 2.0, args.grid), params)[2]
    w = np.linspace(1.0, 0.0, args.grid) ** 2

    cases = {
        f"simulate ({args.slots} slots)": lambda k: k.simulate(
            kind, q, tt, tp, step, arrivals, args.slots, 2.0, 1.0, 1.0, 1.5, 0),
        f"bellman ({args.grid} levels)": lambda k: k.bellman(cost, w),
    }
    backends = _backend.available_backends()
    print(f"{'kernel':<28}" + "".join(f"{b:>12}" for b in backends) + f"{'speed-up':>10}")
    for label, case in cases.items():
        times, outs = [], []
        for name in backends:
            kernels = _backend.get_backend(name)
            t, out = best_of(lambda: case(kernels), args.repeat)
            times.append(t)
            outs.append(out)
        if len(outs) == 2:
            a, b = outs
            same = all(np.array_equal(x, y) for x, y in zip(a, b))
            if not same:
                raise SystemExit(f"{label}: backends disagree")
        speed = f"{times[-1] / times[0]:>9.1f}x" if len(times) == 2 else f"{'-':>10}"
        print(f"{label:<28}" + "".join(f"{t:>11.4f}s" for t in times) + speed)


if __name__ == "__main__":
    main()
