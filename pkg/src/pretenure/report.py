"""Aligned-text report for humans; the JSON document is the machine form."""
from __future__ import annotations


def _line(label, value):
    return f"  {label:<28} {value}"


def _fmt_bytes(n):
    if n >= 1024 * 1024:
        return f"{n / (1024 * 1024):.1f} MB"
    if n >= 1024:
        return f"{n / 1024:.1f} KB"
    return f"{n} B"


def _fmt_ms(v):
    return "-" if v is None else f"{v:.3f} ms"


def render_text(metrics: dict, runtime=None) -> str:
    out = []
    out.append(f"mode: {metrics['mode']}    "
               f"trace: {metrics['trace_fingerprint'][:12]}")
    out.append("")
    out.append("Pauses")
    out.append(_line("collections", metrics["collections"]))
    for kind, count in metrics["pauses_by_kind"].items():
        out.append(_line(f"  {kind}", count))
    for name in ("p50", "p90", "p99", "p99.9", "max"):
        out.append(_line(name, _fmt_ms(metrics["pauses_ms"][name])))
    out.append("")
    out.append("Work")
    totals = metrics["totals"]
    for key in ("scanned_bytes", "copied_bytes", "promoted_bytes",
                "compacted_bytes"):
        out.append(_line(key, _fmt_bytes(totals[key])))
    out.append("")
    out.append("Heap")
    heap = metrics["heap"]
    out.append(_line("peak occupancy", _fmt_bytes(heap["peak_occupancy_bytes"])))
    out.append(_line("allocation clock", _fmt_bytes(heap["allocation_clock_bytes"])))
    out.append("")
    out.append("Profiling")
    prof = metrics["profiler"]
    out.append(_line("profiled sites / methods",
                     f"{prof['profiled_sites']} / {prof['profiled_methods']}"))
    out.append(_line("hot methods", prof["hot_methods"]))
    out.append(_line("table entries (peak bytes)",
                     f"{prof['table_entries']} ({_fmt_bytes(prof['table_peak_bytes'])})"))
    out.append(_line("expanded sites", prof["expanded_sites"]))
    out.append(_line("policy runs", prof["policy_runs"]))
    gens = prof["contexts_per_generation"]
    if gens:
        spread = ", ".join(f"gen{g}={n}" for g, n in gens.items() if n)
        out.append(_line("contexts per generation", spread or "none"))
    coll = prof["collisions"]
    out.append(_line("summary collisions",
                     f"{coll['sequence_rate']:.2%} by sequence, "
                     f"{coll['multiset_rate']:.2%} by multiset "
                     f"({coll['sites_observed']} sites)"))
    if runtime is not None:
        out.append("")
        out.append("Runtime (not part of the JSON document)")
        out.append(_line("wall seconds", f"{runtime.wall_seconds:.2f}"))
        out.append(_line("events / second",
                         f"{runtime.events_per_second:,.0f}"))
        out.append(_line("static analysis seconds",
                         f"{runtime.analysis_seconds:.3f}"))
    return "\n".join(out) + "\n"


def render_compare_text(rows, warnings) -> str:
    out = []
    for warning in warnings:
        out.append(f"warning: {warning}")
    out.append(f"{'metric':<48} {'a':>14} {'b':>14} {'delta':>14} {'pct':>8}")
    interesting = ("pauses_ms.", "totals.", "collections", "heap.",
                   "profiler.table_peak_bytes")
    for row in rows:
        if not any(row["metric"].startswith(p) or row["metric"] == p
                   for p in interesting):
            continue
        pct = ("" if row["delta_pct"] is None
               else f"{row['delta_pct']:+.1f}%")
        a, b, d = (f"{v:,.3f}" if isinstance(v, float) else f"{v:,}"
                   for v in (row["a"], row["b"], row["delta"]))
        out.append(f"{row['metric']:<48} {a:>14} {b:>14} {d:>14} {pct:>8}")
    return "\n".join(out) + "\n"
