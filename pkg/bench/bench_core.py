"""Compare the compiled and pure-Python trial cores.

Times the discrete-channel encoder and backward decoder loops on identical
inputs with both implementations, checks that they agree, and prints
per-trial times and the speedup::

    python bench/bench_core.py --n 64 256 1024 --trials 200
"""

from __future__ import annotations

import argparse
import time

from pmfeedback import bsc, build_kernel
from pmfeedback._core import _pycore
from pmfeedback.codec import grid_for, precision_budget
from pmfeedback.streams import RandomStream

try:
    from pmfeedback._core import _ccore
except ImportError:
    _ccore = None


def make_inputs(kernel, n: int, trials: int, seed: int):
    precision = precision_budget(kernel, n)
    g = grid_for(kernel, precision)
    jobs = []
    for t in range(trials):
        rng = RandomStream(seed, "bench", t)
        jobs.append((rng.bits(precision), rng.bits_many(n, precision), rng.uniforms(n)))
    j0 = (g.modulus // 40, g.modulus - g.modulus // 20)
    return g, jobs, j0


def run(core, g, jobs, j0):
    out = []
    t0 = time.perf_counter()
    for theta, vs, us in jobs:
        thetas, xs, ys = core.dmc_encode(theta, vs, us, g.modulus, g.thresholds,
                                         g.cum_rows, g.tables)
        dec = core.dmc_decode(*j0, ys, vs, g.modulus, g.thresholds, g.values, g.tables)
        out.append((thetas[-1], dec[0], dec[1][-1]))
    return time.perf_counter() - t0, out


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, nargs="+", default=[64, 256, 1024])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--p", default="0.11", help="BSC crossover probability")
    args = p.parse_args(argv)

    kernel = build_kernel(bsc(args.p))
    print(f"BSC({args.p}), {args.trials} trials per horizon")
    print(f"{'n':>6} {'bits':>6} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for n in args.n:
        g, jobs, j0 = make_inputs(kernel, n, args.trials, args.seed)
        t_py, out_py = run(_pycore, g, jobs, j0)
        per_py = 1e3 * t_py / args.trials
        if _ccore is None:
            print(f"{n:>6} {g.precision:>6} {per_py:>10.3f} {'n/a':>10} {'n/a':>8}")
            continue
        t_c, out_c = run(_ccore, g, jobs, j0)
        if out_c != out_py:
            raise SystemExit(f"backends disagree at n={n}")
        per_c = 1e3 * t_c / args.trials
        print(f"{n:>6} {g.precision:>6} {per_py:>10.3f} {per_c:>10.3f} {per_py / per_c:>7.2f}x")
    if _ccore is None:
        print("compiled core not built; only the Python timings are shown")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
