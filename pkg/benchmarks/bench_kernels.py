"""Time the compiled and numpy kernels on representative workloads.

    python benchmarks/bench_kernels.py [--nbar 5] [--repeat 3]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from kerrmzi import _core
from kerrmzi.inputs import InputSpec, build_input
from kerrmzi.interferometer import CircuitSpec, LossChannel, apply_arm_loss, state_after_second_bs
from kerrmzi.metrology import PhaseProbe


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nbar", type=float, default=5.0)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--phases", type=int, default=50)
    args = parser.parse_args(argv)

    state = build_input(InputSpec.thermal(args.nbar))
    spec = CircuitSpec("SK", math.pi / 2)
    mid = state_after_second_bs(state, spec)
    phis = np.linspace(0, math.pi, args.phases)
    print(f"thermal nbar={args.nbar:g}, N_max={state.n_max}, {args.phases} phases, best of {args.repeat}")

    results = {}
    before = _core.backend()
    try:
        for name in _core.available_backends():
            _core.set_backend(name)
            probe = PhaseProbe(state, spec)
            loss = best_of(lambda: apply_arm_loss(mid, LossChannel.from_loss(0.2)), args.repeat)
            counts = best_of(lambda: [probe.counts(p) for p in phis], args.repeat)
            results[name] = (loss, counts)
            print(f"{name:>7s}: loss channel {loss * 1e3:9.2f} ms   count tables {counts * 1e3:9.2f} ms")
    finally:
        _core.set_backend(before)
    if len(results) == 2:
        (pl, pc), (cl, cc) = results["python"], results["cython"]
        print(f"speedup: loss channel x{pl / cl:.1f}, count tables x{pc / cc:.1f}")


if __name__ == "__main__":
    main()
