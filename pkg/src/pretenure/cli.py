"""Command-line front end.

Subcommands:

  run      replay a trace in one mode; writes JSON/CSV metrics, optional
           figures, and prints the human report
  compare  per-metric deltas between two run documents
  gen      emit a synthetic workload trace
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import metrics as metrics_mod
from . import report as report_mod
from .config import MIB, SimConfig
from .engine import MODES, replay
from .errors import SimulatorError
from .synth import SyntheticSpec, generate_synthetic
from .tracefile import parse_trace


def _add_config_flags(parser):
    g = parser.add_argument_group("simulator configuration")
    g.add_argument("--gens", type=int, default=4, metavar="G",
                   help="number of older generations (default 4)")
    g.add_argument("--young-mb", type=float, default=32.0,
                   help="young generation capacity in MB (default 32)")
    g.add_argument("--gen-mb", type=float, default=64.0,
                   help="capacity of each older generation in MB (default 64)")
    g.add_argument("--survivor-mb", type=float, default=4.0,
                   help="survivor space budget in MB (default 4)")
    g.add_argument("--n", type=int, default=16,
                   help="lifetime array length per table entry (default 16)")
    g.add_argument("--inc-gen-freq", "--ng2c-inc-gen-freq", type=int,
                   default=4, dest="inc_gen_freq", metavar="K",
                   help="run the policy every K-th collection (default 4)")
    g.add_argument("--inc-gen-thres", default="0.6",
                   help="survivor ratio above which the target generation "
                        "is incremented (default 0.6)")
    g.add_argument("--expand-ctx", default="0.4",
                   help="survivor ratio above which an aggregated site is "
                        "expanded (default 0.4; 1 disables expansion)")
    g.add_argument("--max-alloc-frame", type=int, default=8,
                   help="max call distance from an allocation for a method "
                        "to be profiled (default 8)")
    g.add_argument("--hot-threshold", type=int, default=100,
                   help="invocations before a planned method is profiled "
                        "(default 100)")
    g.add_argument("--packages", default="",
                   help="comma-separated package prefixes to instrument "
                        "(default: all)")
    g.add_argument("--workers", type=int, default=4,
                   help="GC worker tables (default 4)")
    g.add_argument("--warmup-fraction", type=float, default=1 / 6,
                   help="initial fraction of collections excluded from "
                        "pause statistics (default 1/6)")
    g.add_argument("--seed", type=int, default=0,
                   help="seed echoed into the report (default 0)")


def _config_from_args(args) -> SimConfig:
    packages = tuple(p.strip() for p in args.packages.split(",")
                     if p.strip())
    return SimConfig(
        num_generations=args.gens,
        young_capacity=int(args.young_mb * MIB),
        gen_capacity=int(args.gen_mb * MIB),
        survivor_capacity=int(args.survivor_mb * MIB),
        n=args.n,
        inc_gen_freq=args.inc_gen_freq,
        inc_gen_thres=args.inc_gen_thres,
        expand_ctx=args.expand_ctx,
        max_alloc_frame=args.max_alloc_frame,
        hot_threshold=args.hot_threshold,
        packages=packages,
        workers=args.workers,
        seed=args.seed,
        warmup_fraction=args.warmup_fraction,
    )


def cmd_run(args) -> int:
    config = _config_from_args(args)
    text = Path(args.trace).read_text()
    trace = parse_trace(text)
    result = replay(trace, args.mode, config)
    doc = metrics_mod.build_metrics(result)
    if args.json:
        Path(args.json).write_text(metrics_mod.to_json(doc))
    if args.csv:
        Path(args.csv).write_text(metrics_mod.to_csv(doc))
    if args.plots:
        from . import plots as plots_mod
        for path in plots_mod.render_run_plots(doc, args.plots):
            print(f"wrote {path}", file=sys.stderr)
    sys.stdout.write(report_mod.render_text(doc, result.runtime))
    return 0


def cmd_compare(args) -> int:
    metrics_a = json.loads(Path(args.a).read_text())
    metrics_b = json.loads(Path(args.b).read_text())
    rows, warnings = metrics_mod.compare(metrics_a, metrics_b)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if args.json:
        Path(args.json).write_text(
            metrics_mod.compare_to_json(rows, warnings, metrics_a,
                                        metrics_b))
    if args.csv:
        Path(args.csv).write_text(metrics_mod.compare_to_csv(rows))
    if args.plots:
        from . import plots as plots_mod
        for path in plots_mod.render_compare_plots(metrics_a, metrics_b,
                                                   args.plots):
            print(f"wrote {path}", file=sys.stderr)
    sys.stdout.write(report_mod.render_compare_text(rows, warnings))
    return 0


def cmd_gen(args) -> int:
    spec = SyntheticSpec(
        kind=args.kind,
        seed=args.seed,
        long_lived_fraction=args.long_lived_fraction,
        long_lived_site_fraction=args.site_fraction,
    )
    if args.events is not None:
        spec.event_count = args.events
    text, oracle = generate_synthetic(spec)
    Path(args.out).write_text(text)
    print(f"wrote {args.out}: {oracle.alloc_count} allocations, "
          f"{oracle.total_bytes / MIB:.1f} MB, kind={spec.kind}, "
          f"seed={spec.seed}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pretenure",
        description="Trace-driven N-generational heap simulator with "
                    "online lifetime profiling and dynamic pretenuring.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="replay a trace")
    p_run.add_argument("--trace", required=True, help="trace file to replay")
    p_run.add_argument("--mode", choices=MODES, default="rolp",
                       help="allocation policy (default rolp)")
    p_run.add_argument("--json", metavar="PATH",
                       help="write the metrics document here")
    p_run.add_argument("--csv", metavar="PATH",
                       help="write flat metric,value rows here")
    p_run.add_argument("--plots", metavar="DIR",
                       help="render pause figures into this directory")
    _add_config_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="diff two run documents")
    p_cmp.add_argument("a", help="baseline metrics JSON")
    p_cmp.add_argument("b", help="candidate metrics JSON")
    p_cmp.add_argument("--json", metavar="PATH")
    p_cmp.add_argument("--csv", metavar="PATH")
    p_cmp.add_argument("--plots", metavar="DIR",
                       help="render comparison figures into this directory")
    p_cmp.set_defaults(func=cmd_compare)

    p_gen = sub.add_parser("gen", help="emit a synthetic workload trace")
    p_gen.add_argument("--kind", required=True,
                       choices=("generational", "cache", "mixed"))
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--events", type=int, default=None,
                       help="approximate event-line budget "
                            "(default: the workload kind's default)")
    p_gen.add_argument("--long-lived-fraction", type=float, default=0.3)
    p_gen.add_argument("--site-fraction", type=float, default=0.1,
                       dest="site_fraction",
                       help="fraction of sites allocating the long-lived "
                            "cohort (default 0.1)")
    p_gen.add_argument("--out", required=True, help="output trace path")
    p_gen.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SimulatorError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
