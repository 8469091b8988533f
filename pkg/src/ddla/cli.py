"""Command-line surface: every experiment reproducible from one invocation.

Exit codes: 0 success, 1 usage error, 2 failed verification/check, 3 I/O
error.  The default output directory can be overridden with DDLA_OUT_DIR.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import analysis, checks, io as dio, render
from .cluster import Cluster
from .dynamics import run_continuous, run_discrete, run_dfpp
from .exceptions import DDLAError, WindowBreachError
from .harris import HarrisSystem
from .influence import flat_line, run_colored

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _out_dir(args) -> str:
    d = args.out_dir or os.environ.get("DDLA_OUT_DIR") or "."
    os.makedirs(d, exist_ok=True)
    return d


def _parse_seeds(text: str):
    if ".." in text:
        a, b = text.split("..", 1)
        return range(int(a), int(b) + 1)
    return [int(text)]


def _growth_rows(trace):
    n = len(trace.additions)
    hs = trace.height_profile()
    ds = trace.abs_dev_profile()
    if n == 0:
        pts = [0]
    else:
        pts = sorted(set([0]) | set(np.round(np.geomspace(1, n, 64)).astype(int).tolist()))
    return [(int(k), int(hs[k]), int(ds[k])) for k in pts]


def _cmd_grow(args) -> int:
    out = _out_dir(args)
    prefix = args.prefix or f"grow_n{args.n}_seed{args.seed}_{args.sampler}"
    trace = run_discrete(None, args.n, args.sampler, np.random.default_rng(args.seed))
    base = os.path.join(out, prefix)
    meta = {"kind": "snapshot", "seed": args.seed, "steps": args.n, "sampler": args.sampler}
    dio.write_snapshot(trace.final_cluster().sites, base + "_snapshot.txt", meta)
    dio.write_trace(trace, base + "_trace.csv", {"seed": args.seed})
    dio.write_table(
        base + "_growth.csv",
        _growth_rows(trace),
        ("n", "height", "abs_dev"),
        {"kind": "growth-curve", "seed": args.seed, "n": args.n, "sampler": args.sampler},
    )
    for suffix in ("_snapshot.txt", "_trace.csv", "_growth.csv"):
        print(base + suffix)
    return EXIT_OK


def _cmd_grow_ct(args) -> int:
    out = _out_dir(args)
    prefix = args.prefix or f"growct_T{args.T:g}_seed{args.seed}_{args.mode}"
    source = HarrisSystem(args.seed) if args.mode == "harris" else np.random.default_rng(args.seed)
    trace = run_continuous(None, args.T, args.mode, source)
    base = os.path.join(out, prefix)
    meta = {"kind": "snapshot", "seed": args.seed, "steps": len(trace.additions), "T": args.T}
    dio.write_snapshot(trace.final_cluster().sites, base + "_snapshot.txt", meta)
    dio.write_trace(trace, base + "_trace.csv", {"seed": args.seed})
    print(base + "_snapshot.txt")
    print(base + "_trace.csv")
    return EXIT_OK


def _cmd_dfpp(args) -> int:
    out = _out_dir(args)
    prefix = args.prefix or f"dfpp_T{args.T:g}_seed{args.seed}"
    c0 = Cluster.from_sites(flat_line(args.line_window)) if args.line_window else None
    trace = run_dfpp(c0, args.T, HarrisSystem(args.seed))
    base = os.path.join(out, prefix)
    meta = {"kind": "snapshot", "seed": args.seed, "steps": len(trace.additions), "T": args.T}
    dio.write_snapshot(trace.final_cluster().sites, base + "_snapshot.txt", meta)
    dio.write_trace(trace, base + "_trace.csv", {"seed": args.seed})
    print(base + "_snapshot.txt")
    print(base + "_trace.csv")
    return EXIT_OK


def _cmd_influence(args) -> int:
    out = _out_dir(args)
    F = dio.unpack_sites(args.red) if args.red else []
    prefix = args.prefix or f"influence_T{args.T:g}_seed{args.seed}_w{args.window}"
    try:
        ctrace = run_colored(F, args.T, HarrisSystem(args.seed), args.window)
    except WindowBreachError as exc:
        print(f"window breach: {exc}; rerun with a larger --window", file=sys.stderr)
        return EXIT_CHECK
    base = os.path.join(out, prefix)
    dio.write_colored_trace(ctrace, base + "_colored.csv", {"seed": args.seed})
    h, d = ctrace.red_extent_at(args.T)
    print(base + "_colored.csv")
    print(f"red height {h} red |dev| {d} events {len(ctrace.events)}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    only = None
    if args.only:
        only = [name for spec in args.only for name in spec.split(",") if name]
    seeds = _parse_seeds(args.seeds) if args.seeds else None
    results = checks.run_checks(only=only, seeds=seeds)
    failed = False
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed = failed or not ok
    return EXIT_CHECK if failed else EXIT_OK


def _cmd_stats(args) -> int:
    traces = [dio.read_trace(p) for p in args.traces]
    if args.kind == "exponents":
        curves = [analysis.growth_exponents(t) for t in traces]
        summary = {
            "kind": "exponents",
            "curves": [
                {
                    "beta_h": c.beta_h,
                    "beta_h_se": c.beta_h_se,
                    "beta_d": c.beta_d,
                    "beta_d_se": c.beta_d_se,
                    "fit_window": list(c.fit_window),
                }
                for c in curves
            ],
            "pooled_beta_h": float(np.mean([c.beta_h for c in curves])),
            "pooled_beta_d": float(np.mean([c.beta_d for c in curves])),
        }
    else:
        lo, hi, step = (float(x) for x in args.t_grid.split(":"))
        grid = np.arange(lo, hi + step / 2, step)
        summary = analysis.continuous_rates(traces, grid)
        summary["kind"] = "rates"
    if args.json:
        dio.write_json_summary(args.json, summary)
        print(args.json)
    else:
        import json

        print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_render(args) -> int:
    # sniff the artifact kind from the '#' header
    _, probe_meta = dio.read_table(args.input)
    kind = probe_meta.get("kind", "snapshot")
    sites, red = [], []
    if kind == "colored-trace":
        ctrace = dio.read_colored_trace(args.input)
        state = ctrace.final_state()
        sites = sorted(state.black)
        red = sorted(state.red)
    elif kind == "trace":
        trace = dio.read_trace(args.input)
        sites = sorted(trace.final_cluster().sites)
    else:
        sites, _ = dio.read_snapshot(args.input)
    out = args.out or (os.path.splitext(args.input)[0] + "." + args.style)
    if args.style == "pgm":
        render.render_pgm(sites, out, red=red)
    else:
        render.render_svg(sites, out, red=red, cell=args.cell)
    print(out)
    return EXIT_OK


def build_parser() -> _Parser:
    p = _Parser(prog="ddla", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out-dir", default=None)
        sp.add_argument("--prefix", default=None)

    sp = sub.add_parser("grow", help="discrete growth run")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--sampler", choices=("line", "edge", "exact"), default="line")
    add_common(sp)
    sp.set_defaults(func=_cmd_grow)

    sp = sub.add_parser("grow-ct", help="continuous-time growth run")
    sp.add_argument("--T", type=float, required=True)
    sp.add_argument("--mode", choices=("gillespie", "harris"), default="harris")
    add_common(sp)
    sp.set_defaults(func=_cmd_grow_ct)

    sp = sub.add_parser("dfpp", help="activation dynamics run")
    sp.add_argument("--T", type=float, required=True)
    sp.add_argument("--line-window", type=int, default=0)
    add_common(sp)
    sp.set_defaults(func=_cmd_dfpp)

    sp = sub.add_parser("influence", help="colored run from the flat interface")
    sp.add_argument("--T", type=float, required=True)
    sp.add_argument("--window", type=int, default=64)
    sp.add_argument("--red", default="0 0", help="perturbation sites 'a b;a b'")
    add_common(sp)
    sp.set_defaults(func=_cmd_influence)

    sp = sub.add_parser("verify", help="run the exact-identity check suite")
    sp.add_argument("--only", action="append", default=None, help="subset of checks")
    sp.add_argument("--seeds", default=None, help="seed range a..b")
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("stats", help="summaries from stored traces")
    sp.add_argument("--kind", choices=("exponents", "rates"), required=True)
    sp.add_argument("--t-grid", default="50:200:10")
    sp.add_argument("--json", default=None)
    sp.add_argument("traces", nargs="+")
    sp.set_defaults(func=_cmd_stats)

    sp = sub.add_parser("render", help="render a snapshot or trace")
    sp.add_argument("input")
    sp.add_argument("--style", choices=("pgm", "svg"), default="pgm")
    sp.add_argument("--cell", type=int, default=8)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DDLAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
