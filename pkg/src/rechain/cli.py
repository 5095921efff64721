"""Command-line interface.

Subcommands:
  static-bench   phase-sweep reconfiguration benchmark (CSV/JSON + figures)
  dynamic-bench  per-demand-change benchmark (CSV/JSON + figures)
  convert        bidirectional instance -> symmetric instance + directed demand
  gen-trace      synthetic traffic trace as CSV
  verify         cross-check the chain search against the exhaustive oracle

Exit codes: 0 success, 1 validation/usage error, 2 runtime failure.
Counting convention: connection and rearrangement totals sum the full
symmetric matrices, so one physical connection contributes 2 everywhere.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .bench import BenchConfig, run_dynamic_bench, run_static_bench
from .convert import bidi_to_symmetric, convert_demand, verify_conversion
from .model import (
    ClosError,
    demand_from_json,
    scheme_from_json,
    shape_from_json,
    make_scheme,
)
from .oracle import OracleLimits, oracle_min_chain_length
from .search import SearchConfig, schedule_connection
from .state import SchedulerState
from .traffic import TRACE_MODELS, TraceParams, synthetic_trace, write_trace_csv

SEED_ENV = "RECHAIN_SEED"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); the contract is 1
        raise _UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(
        prog="rechain",
        description="Replacement-chain route scheduling benchmarks for "
                    "two-level bidirectional Clos networks.",
        epilog="Connection/rearrangement totals use full symmetric-matrix sums "
               "(one physical connection counts twice).",
    )
    # verify is a cross-checking aid and stays out of the advertised list
    sub = parser.add_subparsers(
        dest="command", metavar="{static-bench,dynamic-bench,convert,gen-trace}"
    )

    def add_common(p):
        p.add_argument("--config", metavar="FILE", help="JSON bench config")
        p.add_argument("--seed", type=int, help=f"PRNG seed (falls back to ${SEED_ENV})")
        p.add_argument("--out", metavar="DIR", default="rechain-out", help="output directory")
        p.add_argument("--format", choices=["csv", "json", "both"], default="both")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    p_static = sub.add_parser("static-bench", help="phase-sweep reconfiguration benchmark")
    add_common(p_static)
    p_dyn = sub.add_parser("dynamic-bench", help="per-demand-change benchmark")
    add_common(p_dyn)

    p_conv = sub.add_parser("convert", help="bidirectional -> symmetric instance")
    p_conv.add_argument("--in", dest="infile", required=True, metavar="FILE")
    p_conv.add_argument("--out", dest="outfile", required=True, metavar="FILE")
    p_conv.add_argument("--seed", type=int, help="trail tie-break seed")

    p_trace = sub.add_parser("gen-trace", help="write a synthetic traffic trace CSV")
    p_trace.add_argument("--model", choices=TRACE_MODELS, default="uniform")
    p_trace.add_argument("--seed", type=int)
    p_trace.add_argument("--racks", type=int, default=8)
    p_trace.add_argument("--duration", type=int, default=60, help="seconds")
    p_trace.add_argument("--rate", type=int, default=8, help="events per second")
    p_trace.add_argument("--out", metavar="FILE", default="-", help="output file ('-' = stdout)")

    p_verify = sub.add_parser("verify")  # oracle cross-check; intentionally unadvertised
    p_verify.add_argument("--in", dest="infile", required=True, metavar="FILE")
    p_verify.add_argument("--seed", type=int)

    return parser


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise _UsageError(f"${SEED_ENV} must be an integer, got {env!r}") from exc
    return 1


def _load_bench_config(args) -> BenchConfig:
    obj = {}
    if args.config:
        with open(args.config) as fh:
            obj = json.load(fh)
    obj.setdefault("seed", _resolve_seed(args))
    if getattr(args, "seed", None) is not None:
        obj["seed"] = args.seed
    return BenchConfig.from_json(obj)


def _cmd_static(args) -> int:
    config = _load_bench_config(args)
    records = run_static_bench(
        config, out_dir=args.out, fmt=args.format, figures=not args.no_figures
    )
    print(f"static-bench: {len(records)} reconfigurations over loads "
          f"{config.loads} written to {args.out}")
    return 0


def _cmd_dynamic(args) -> int:
    config = _load_bench_config(args)
    summaries = run_dynamic_bench(
        config, out_dir=args.out, fmt=args.format, figures=not args.no_figures
    )
    for s in summaries:
        print(f"dynamic-bench: load {s.load:.2f} ops {s.ops} "
              f"rearr/op {s.rearr_per_op:.4f} ns/op {s.ns_per_op:.0f}")
    return 0


def _cmd_convert(args) -> int:
    with open(args.infile) as fh:
        obj = json.load(fh)
    shape = shape_from_json(obj["shape"])
    demand = demand_from_json(obj["demand"]) if "demand" in obj else None
    scheme = scheme_from_json(obj["scheme"]) if "scheme" in obj else make_scheme(shape.n, shape.m)
    conv = bidi_to_symmetric(shape, scheme)
    out: dict = {
        "symmetric": {"m": shape.m, "n": shape.n, "capacity": conv.sym_capacity},
        "directed_scheme": conv.directed_scheme,
    }
    if demand is not None:
        directed = convert_demand(demand, seed=args.seed if args.seed is not None else 0)
        bad = verify_conversion(demand, directed)
        if bad:
            raise RuntimeError(f"demand conversion failed its own checks: {bad[0]}")
        out["directed_demand"] = directed
    with open(args.outfile, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"convert: wrote symmetric instance to {args.outfile}")
    return 0


def _cmd_gen_trace(args) -> int:
    params = TraceParams(racks=args.racks, duration_s=args.duration, rate=args.rate)
    events = synthetic_trace(args.model, params, seed=_resolve_seed(args))
    if args.out == "-":
        print("t,src,dst,volume")
        for ev in events:
            print(f"{ev.t:g},{ev.src},{ev.dst},{ev.volume:g}")
        return 0
    count = write_trace_csv(events, args.out)
    print(f"gen-trace: wrote {count} events to {args.out}")
    return 0


def _cmd_verify(args) -> int:
    with open(args.infile) as fh:
        obj = json.load(fh)
    shape = shape_from_json(obj["shape"])
    demand = demand_from_json(obj["demand"])
    scheme = scheme_from_json(obj.get("scheme", {"n": shape.n, "m": shape.m,
                                                 "scheme": make_scheme(shape.n, shape.m)}))
    j0, k0 = obj["pair"]
    oracle_len = oracle_min_chain_length(shape, demand, scheme, j0, k0, OracleLimits())
    state = SchedulerState(shape, demand=demand, scheme=scheme, seed=_resolve_seed(args))
    result = schedule_connection(state, j0, k0, SearchConfig(max_comp=None))
    search_len = result.chain.length if result.chain else None
    print(f"verify: oracle={oracle_len} search={search_len}")
    if oracle_len != search_len:
        print("verify: MISMATCH between search and exhaustive oracle", file=sys.stderr)
        return 2
    print("verify: search agrees with the exhaustive oracle")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rechain: error: {exc}", file=sys.stderr)
        return 1
    if args.command is None:
        parser.print_help(sys.stderr)
        return 1
    handlers = {
        "static-bench": _cmd_static,
        "dynamic-bench": _cmd_dynamic,
        "convert": _cmd_convert,
        "gen-trace": _cmd_gen_trace,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (_UsageError, ClosError, ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"rechain: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure, distinct from bad input
        print(f"rechain: failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
