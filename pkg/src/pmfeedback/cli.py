"""Command-line front end.

Subcommands::

    simulate  run end-to-end trials, write transcripts, results and a summary
    lcurve    estimate E L(lam) over a dyadic width grid
    verify    run a named verification suite and write a JSON report
    hlcheck   maximal-stretch tail test for x^2 or the channel's inverse kernels
    info      mutual information, kernel segments and family-property report

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 precision exhausted.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import secrets
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    bonferroni,
    encoder_paths,
    hl_tail_test,
    independence_tests,
    lambda_curve,
    marginal_tests,
    output_serial_test,
    rate_sweep,
    row,
    run_trials,
    saturation_test,
    square_map,
    submartingale_check,
    summarize,
    visit_counts,
    walk_trace,
    write_csv,
)
from .channel import ChannelError, ChannelSpec, bsc, load_channel, mutual_information
from .codec import ConfigError, PrecisionError, Seeds, as_probability, run_trial, write_transcript
from .codec.grid import precision_budget
from .kernel import (
    AwgnKernel,
    DmcKernel,
    KernelError,
    build_kernel,
    dyadic_grid,
    inverse_kernel_map,
    validate_p1,
)
from .streams import RandomStream

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_PRECISION = 0, 1, 2, 3
SUITES = ("lemma6", "uniformity", "lemma8", "hardy-littlewood", "walk", "rate", "precision")
# per-suite defaults for --n, --pe and --trials when not given on the command line
SUITE_DEFAULTS = {
    "lemma6": {"n": 64, "pe": "0.1", "trials": 20_000},
    "uniformity": {"n": 32, "pe": "0.1", "trials": 10_000},
    "lemma8": {},
    "hardy-littlewood": {},
    "walk": {"n": 512, "pe": "0.05", "trials": 200},
    "rate": {"n": 512, "pe": "0.05", "trials": 500},
    "precision": {"n": 128, "pe": "0.05", "trials": 50},
}


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


# -- configuration ---------------------------------------------------------

def _positive(name):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name}: not an integer: {text!r}")
        if value < 1:
            raise argparse.ArgumentTypeError(f"{name}: must be at least 1, got {value}")
        return value
    return parse


def _seed(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed: not an integer: {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed: must fit in 64 unsigned bits")
    return value


def _resolve_seeds(args) -> Seeds:
    parts = (args.message_seed, args.channel_seed, args.common_seed)
    if args.seed is None and None in parts:
        if args.ci:
            raise ConfigError("seed: --ci forbids unseeded runs; pass --seed or all three "
                              "--message-seed/--channel-seed/--common-seed")
        base = secrets.randbits(64)
    else:
        base = args.seed
    m, c, k = (base if p is None else p for p in parts)
    return Seeds(m, c, k)


def _channel(args) -> ChannelSpec:
    if args.channel is None:
        return bsc("0.11")
    return load_channel(args.channel)


def _out_dir(args) -> Path:
    d = Path(args.out or os.environ.get("PMFEEDBACK_OUTPUT_DIR") or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    try:
        return max(1, int(os.environ.get("PMFEEDBACK_WORKERS", "1")))
    except ValueError:
        raise ConfigError("PMFEEDBACK_WORKERS: not an integer")


def _base_config(args, spec: ChannelSpec, seeds: Seeds, **extra) -> dict:
    cfg = {"command": args.command, "channel": spec.to_json(), "channel_hash": spec.hash(),
           "seeds": seeds.to_json(), "version": __version__}
    cfg.update({k: v for k, v in extra.items() if v is not None})
    return cfg


# -- simulate --------------------------------------------------------------

def _simulate_chunk(job):
    spec, n, p_e, seeds, precision, ids, j0, out, cfg = job
    kernel = build_kernel(spec)
    out = Path(out)
    done = []
    for t in ids:
        o = run_trial(spec, kernel, n, p_e, seeds, precision=precision, trial=t, j0_start=j0)
        write_transcript(o.transcript, out / f"trial_{t:05d}.transcript.jsonl", cfg)
        width = -(-o.transcript.precision // 4)
        record = {
            "schema": SCHEMA,
            "channel_hash": spec.hash(),
            "config": cfg,
            "trial": t,
            "result": o.result.to_json(),
            "truth": {"error": o.truth.error,
                      "theta0_hex": format(o.truth.theta0, f"0{width}x"),
                      "theta_end_hex": format(o.truth.theta_end, f"0{width}x")},
        }
        (out / f"trial_{t:05d}.result.json").write_text(_dumps(record))
        done.append(summarize(o, t))
    return done


def cmd_simulate(args) -> int:
    spec = _channel(args)
    p_e = as_probability(args.pe, "pe")
    seeds = _resolve_seeds(args)
    kernel = build_kernel(spec)
    precision = args.precision or precision_budget(kernel, args.n)
    out = _out_dir(args)
    cfg = _base_config(args, spec, seeds, n=args.n, pe=args.pe, trials=args.trials,
                       precision=precision, j0_start=args.j0_start)
    ids = list(range(args.trials))
    workers = _workers(args)
    job = (spec, args.n, p_e, seeds, precision, ids, args.j0_start, str(out), cfg)
    if workers == 1 or args.trials < 2 * workers:
        summaries = _simulate_chunk(job)
    else:
        jobs = [job[:5] + (ids[i::workers],) + job[6:] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = sorted((s for part in pool.map(_simulate_chunk, jobs) for s in part),
                               key=lambda s: s.trial)
    h = spec.hash()
    errors = np.array([s.error for s in summaries], dtype=float)
    rates = np.array([s.rate for s in summaries], dtype=float)
    m = len(summaries)

    def se(a):
        return float(a.std(ddof=1) / math.sqrt(m)) if m > 1 else None

    rows = [
        row("error_rate", h, args.n, None, float(errors.mean()), se(errors)),
        row("rate", h, args.n, None, float(rates.mean()), se(rates)),
        row("invertibility", h, args.n, None, float(np.mean([s.invertible for s in summaries])),
            None, None, all(s.invertible for s in summaries)),
    ]
    write_csv(rows, out / "summary.csv")
    (out / "summary.json").write_text(_dumps({"schema": SCHEMA, "channel_hash": h,
                                              "config": cfg, "rows": rows}))
    print(f"{m} trials: error rate {errors.mean():.4f} (target {float(p_e)}), "
          f"mean rate {rates.mean():.4f} bits/use, I = {mutual_information(spec):.4f}")
    return EXIT_OK


# -- lcurve ----------------------------------------------------------------

def cmd_lcurve(args) -> int:
    spec = _channel(args)
    seeds = _resolve_seeds(args)
    kernel = build_kernel(spec)
    grid = [2.0 ** -j for j in range(1, args.depth + 1)]
    curve = lambda_curve(kernel, grid, args.delta, args.samples,
                         RandomStream(seeds.common, "lcurve"))
    cap = mutual_information(spec)
    h = spec.hash()
    rows = [row("lcurve", h, None, lam, m, s, None, -3 * s <= m <= cap + 3 * s)
            for lam, m, s in zip(curve.grid, curve.means, curve.stderrs)]
    rows += [row(f"moment_{curve.order:g}", h, None, lam, m, s)
             for lam, m, s in zip(curve.grid, curve.moments, curve.moment_stderrs)]
    out = _out_dir(args)
    write_csv(rows, out / "lcurve.csv")
    cfg = _base_config(args, spec, seeds, depth=args.depth, samples=args.samples,
                       delta=args.delta)
    (out / "lcurve.json").write_text(_dumps({"schema": SCHEMA, "channel_hash": h,
                                             "config": cfg, "rows": rows}))
    for lam, m, s in zip(curve.grid, curve.means, curve.stderrs):
        print(f"lambda=2^{math.log2(lam):.0f}  E L = {m:.5f} +- {s:.5f}")
    return EXIT_OK


# -- verify ----------------------------------------------------------------

def _check(test, statistic, threshold, passed, p_value=None, **extra):
    d = {"test": test, "statistic": statistic, "threshold": threshold, "pass": bool(passed)}
    if p_value is not None:
        d["p_value"] = p_value
    d.update(extra)
    return d


def _suite_lemma6(args, spec, seeds):
    p_e = as_probability(args.pe, "pe")
    s = run_trials(spec, args.n, p_e, seeds, args.trials, precision=args.precision,
                   workers=_workers(args))
    rate = float(np.mean([x.error for x in s]))
    tol = 3 * math.sqrt(float(p_e) * (1 - float(p_e)) / len(s))
    return [
        _check("error_rate", rate, [float(p_e) - tol, float(p_e) + tol],
               abs(rate - float(p_e)) <= tol, n=args.n, trials=len(s)),
        _check("round_trip", float(np.mean([x.invertible for x in s])), 1.0,
               all(x.invertible for x in s), n=args.n, trials=len(s)),
    ]


def _suite_uniformity(args, spec, seeds):
    kernel = build_kernel(spec)
    n_list = [1, 4, 16, 32]
    paths = encoder_paths(spec, kernel, max(n_list), args.trials, seeds)
    rows = marginal_tests(spec, paths, n_list) + independence_tests(spec, paths, n_list)
    rows.append(output_serial_test(spec, 2048, seeds))
    rows = bonferroni(rows, 0.01)
    return [_check(f"{r.name}_n{r.n}", r.statistic, r.threshold, r.passed,
                   None if math.isnan(r.p_value) else r.p_value) for r in rows]


def _suite_lemma8(args, spec, seeds):
    kernel = build_kernel(spec)
    cap = mutual_information(spec)
    rng = RandomStream(seeds.common, "lemma8")
    ends = lambda_curve(kernel, [0.999, 0.5, 2.0**-20], 1.0, args.samples, rng)
    (m1, m5, m0), (s1, s5, s0) = ends.means, ends.stderrs
    grid = [2.0 ** -j for j in range(1, 21)]
    curve = lambda_curve(kernel, grid, 1.0, args.samples, rng)
    checks = [
        _check("limit_at_one", m1, 3 * s1, abs(m1) <= 3 * s1, stderr=s1),
        _check("limit_at_zero", m0, [cap - 3 * s0, cap + 3 * s0], abs(m0 - cap) <= 3 * s0,
               stderr=s0),
        _check("strictly_inside", m5, [3 * s5, cap - 3 * s5], 3 * s5 <= m5 <= cap - 3 * s5,
               stderr=s5),
    ]
    for a, b, gap, allowed, ok in curve.continuity():
        checks.append(_check(f"continuity_{a:g}_{b:g}", gap, allowed, ok))
    return checks


def _hl_maps(spec: ChannelSpec):
    kernel = build_kernel(spec)
    maps = [("square", square_map())]
    if isinstance(kernel, DmcKernel):
        ys = [y for y in range(kernel.n_outputs) if kernel.reachable(y)]
    else:
        ys = [-1.0, 0.0, 1.0]
    maps += [(f"inverse_kernel_y{y:g}", inverse_kernel_map(kernel, y)) for y in ys]
    return maps


def _suite_hl(args, spec, seeds):
    checks = []
    for name, g in _hl_maps(spec):
        rep = hl_tail_test(g, [2, 4, 8, 16], args.samples,
                           rng=RandomStream(seeds.common, f"hl-{name}"), name=name)
        for r in rep.rows:
            checks.append(_check(f"{name}_a{r.a:g}", r.prob, r.bound, r.ok, stderr=r.stderr,
                                 lipschitz_zero=r.lipschitz_zero))
    return checks


def _suite_walk(args, spec, seeds):
    p_e = as_probability(args.pe, "pe")
    traces = {}
    # disjoint trial ranges keep the two horizons' samples independent
    for first, n in ((0, 256), (args.trials, 512)):
        s = run_trials(spec, n, p_e, seeds, args.trials, workers=_workers(args),
                       first_trial=first)
        traces[n] = [walk_trace(x, 5.0) for x in s]
    checks = []
    for b in submartingale_check(traces[256] + traces[512]):
        checks.append(_check(f"submartingale_{b.lo:g}_{b.hi:g}", b.mean,
                             None if math.isnan(b.stderr) else -3 * b.stderr, b.ok,
                             count=b.count))
    stat, p, ok = saturation_test(visit_counts(traces[256]), visit_counts(traces[512]))
    checks.append(_check("visit_saturation_t5", stat, 0.01, ok, p_value=p))
    return checks


def _suite_rate(args, spec, seeds):
    p_e = as_probability(args.pe, "pe")
    table = rate_sweep(spec, p_e, [64, 128, 256, 512], args.trials, seeds,
                       epsilon=args.epsilon, workers=_workers(args))
    last = table.rows[-1]
    return [
        _check("fraction_monotone", [r.fraction_above for r in table.rows], "2 sigma",
               table.monotone_within(2.0)),
        _check("fraction_at_512", last.fraction_above, 0.9, last.fraction_above >= 0.9),
        _check("mean_rate_at_512", last.mean_rate, [table.capacity - 0.05, table.capacity + 0.05],
               abs(last.mean_rate - table.capacity) <= 0.05),
    ]


def _suite_precision(args, spec, seeds):
    p_e = as_probability(args.pe, "pe")
    kernel = build_kernel(spec)
    base = precision_budget(kernel, args.n)
    lo = run_trials(spec, args.n, p_e, seeds, args.trials, precision=base)
    hi = run_trials(spec, args.n, p_e, seeds, args.trials, precision=2 * base)
    same_bits = all(a.bits == b.bits for a, b in zip(lo, hi))
    worst = max(abs(a.rate - b.rate) for a, b in zip(lo, hi))
    return [_check("bits_unchanged", same_bits, True, same_bits),
            _check("rate_shift", worst, 2.0**-20, worst < 2.0**-20)]


_SUITE_FUNCS = {
    "lemma6": _suite_lemma6,
    "uniformity": _suite_uniformity,
    "lemma8": _suite_lemma8,
    "hardy-littlewood": _suite_hl,
    "walk": _suite_walk,
    "rate": _suite_rate,
    "precision": _suite_precision,
}


def cmd_verify(args) -> int:
    if args.suite not in _SUITE_FUNCS:
        raise ConfigError(f"suite: unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    for key, value in SUITE_DEFAULTS[args.suite].items():
        if getattr(args, key) is None:
            setattr(args, key, value)
    spec = _channel(args)
    seeds = _resolve_seeds(args)
    checks = _SUITE_FUNCS[args.suite](args, spec, seeds)
    ok = all(c["pass"] for c in checks)
    cfg = _base_config(args, spec, seeds, suite=args.suite, n=args.n, pe=args.pe,
                       trials=args.trials, samples=args.samples)
    report = {"schema": SCHEMA, "suite": args.suite, "channel_hash": spec.hash(),
              "config": cfg, "pass": ok, "tests": checks}
    out = _out_dir(args)
    (out / f"verify_{args.suite}.json").write_text(_dumps(report))
    for c in checks:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['test']}")
    print(f"suite {args.suite}: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


# -- hlcheck ---------------------------------------------------------------

def cmd_hlcheck(args) -> int:
    spec = _channel(args)
    seeds = _resolve_seeds(args)
    maps = _hl_maps(spec) if args.function == "all" else \
        [m for m in _hl_maps(spec) if (m[0] == "square") == (args.function == "square")]
    grid = dyadic_grid(args.depth)
    rows, ok = [], True
    h = spec.hash()
    for name, g in maps:
        rep = hl_tail_test(g, args.a, args.samples, grid,
                           RandomStream(seeds.common, f"hl-{name}"), name=name)
        ok = ok and rep.ok
        rows += [row(f"hl_{name}_a{r.a:g}", h, None, None, r.prob, r.stderr, None, r.ok)
                 for r in rep.rows]
        for r in rep.rows:
            print(f"{'PASS' if r.ok else 'FAIL'}  {name}  a={r.a:g}  "
                  f"Pr={r.prob:.5f}  bound={r.bound:.4f}")
    write_csv(rows, _out_dir(args) / "hlcheck.csv")
    return EXIT_OK if ok else EXIT_FAIL


# -- info ------------------------------------------------------------------

def cmd_info(args) -> int:
    spec = _channel(args)
    kernel = build_kernel(spec)
    print(f"channel  {spec.kind}  hash {spec.hash()}")
    print(f"I(X;Y)   {mutual_information(spec):.12f} bits")
    if isinstance(kernel, DmcKernel):
        print("segments (y, input, theta_lo, theta_hi, slope):")
        for y, i, lo, hi, s in kernel.segment_table():
            print(f"  {y}  {i}  {float(lo):.6f}  {float(hi):.6f}  {float(s):.6f}")
        print(f"max |log2 slope| bits per step: {kernel.max_slope_bits()}")
    else:
        assert isinstance(kernel, AwgnKernel)
        print(f"posterior gain a = {kernel.a:.6f}, sigma = {kernel.sigma:.6f}, "
              f"sqrt(P) = {kernel.sqrt_p:.6f}")
    rep = validate_p1(kernel)
    print("strict monotonicity: " + ("ok" if rep.ok else f"flat segments at {rep.violations}"))
    return EXIT_OK


# -- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--channel", help="channel JSON file (default: BSC(0.11), uniform input)")
    common.add_argument("--seed", type=_seed, help="base seed for all three streams")
    common.add_argument("--message-seed", type=_seed)
    common.add_argument("--channel-seed", type=_seed)
    common.add_argument("--common-seed", type=_seed)
    common.add_argument("--ci", action="store_true", help="refuse unseeded runs")
    common.add_argument("--out", help="output directory (env PMFEEDBACK_OUTPUT_DIR)")
    common.add_argument("--workers", type=_positive("workers"),
                        help="worker processes (env PMFEEDBACK_WORKERS)")

    p = argparse.ArgumentParser(prog="pmfeedback", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="run end-to-end trials")
    s.add_argument("--n", type=_positive("n"), required=True)
    s.add_argument("--pe", required=True)
    s.add_argument("--trials", type=_positive("trials"), default=1)
    s.add_argument("--precision", type=_positive("precision"))
    s.add_argument("--j0-start", help="start of the initial arc (default p_e/2)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("lcurve", parents=[common], help="E L(lambda) on a dyadic grid")
    s.add_argument("--depth", type=_positive("depth"), default=20)
    s.add_argument("--samples", type=_positive("samples"), default=100_000)
    s.add_argument("--delta", type=float, default=1.0)
    s.set_defaults(func=cmd_lcurve)

    s = sub.add_parser("verify", parents=[common], help="run a verification suite")
    s.add_argument("--suite", required=True, help="one of: " + ", ".join(SUITES))
    s.add_argument("--n", type=_positive("n"), help="horizon (suite default)")
    s.add_argument("--pe", help="target error probability (suite default)")
    s.add_argument("--trials", type=_positive("trials"), help="trials (suite default)")
    s.add_argument("--samples", type=_positive("samples"), default=100_000)
    s.add_argument("--epsilon", type=float, default=0.1)
    s.add_argument("--precision", type=_positive("precision"))
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("hlcheck", parents=[common], help="maximal-stretch tail bound")
    s.add_argument("--function", choices=("square", "kernel", "all"), default="all")
    s.add_argument("--a", type=float, nargs="+", default=[2.0, 4.0, 8.0, 16.0])
    s.add_argument("--samples", type=_positive("samples"), default=100_000)
    s.add_argument("--depth", type=_positive("depth"), default=40)
    s.set_defaults(func=cmd_hlcheck)

    s = sub.add_parser("info", parents=[common], help="channel and kernel summary")
    s.set_defaults(func=cmd_info)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PrecisionError as exc:
        print(f"precision error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (ConfigError, ChannelError, KernelError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
