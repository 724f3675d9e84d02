"""Compare the compiled core against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--runs 20] [--horizon 1000] [--repeat 3]

Each backend replays the same pre-drawn uniforms, so the benchmark also
confirms that both produce identical totals.
"""
import argparse
import time

import numpy as np

from nonstat_aos import kernels
from nonstat_aos.roster import make_policy

POLICIES = ("GR", "EGR", "U", "UCB", "ARW", "AP", "DMAB", "OR")


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--horizon", type=int, default=1000)
    ap.add_argument("--psize", type=int, default=80)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    impls = kernels.backends()
    if "cython" not in impls:
        print("compiled core not built; only the Python backend is available")
    rng = np.random.default_rng(0)
    draws = rng.random((args.runs, kernels.DRAWS_PER_STEP * args.horizon))
    im_draws = rng.random((args.horizon, args.psize))
    steps = args.runs * args.horizon

    names = list(impls)
    print(f"{'kernel':<8}" + "".join(f"{n + ' (ms)':>16}" for n in names) + f"{'speedup':>10}")
    for name in POLICIES:
        pol = make_policy(name)
        timings, outs = [], []
        for mod in impls.values():
            t, out = best_of(lambda: mod.run_binary_totals(
                pol.kernel_code, pol.kernel_params(), 8, 4, 3, args.horizon, draws), args.repeat)
            timings.append(t)
            outs.append(out)
        assert all(np.array_equal(outs[0], o) for o in outs), f"{name}: backends disagree"
        print(_row(name, timings))

    timings, outs = [], []
    for mod in impls.values():
        t, out = best_of(lambda: mod.run_island(8, 4, 3, args.horizon, args.psize, 0.2, 0.01,
                                                False, im_draws), args.repeat)
        timings.append(t)
        outs.append(out[0])
    assert all(np.array_equal(outs[0], o) for o in outs), "IM: backends disagree"
    print(_row("IM", timings))
    print(f"\n{steps} policy steps per binary kernel call; "
          f"{args.horizon * args.psize} individual steps per island call")


def _row(name, timings):
    """Timings are in backend order; speedup is python time over compiled time."""
    by = dict(zip(kernels.backends(), timings))
    speed = (f"{by['python'] / by['cython']:>9.0f}x" if "cython" in by else f"{'-':>10}")
    return f"{name:<8}" + "".join(f"{1000 * t:>16.2f}" for t in timings) + speed


if __name__ == "__main__":
    main()
