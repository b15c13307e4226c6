"""Run metrics: assembly, serialization, and run-to-run comparison.

The JSON document is fully deterministic for identical inputs: key order
is fixed, floats come straight from the (deterministic) simulation, and
wall-clock figures are deliberately kept out of it (they live in the
human report only).  Percentiles use nearest-rank on the sorted pause
list: rank = ceil(p/100 * n), no interpolation.
"""
from __future__ import annotations

import csv
import io
import json
import math

SCHEMA_VERSION = 1

PERCENTILES = (("p50", 50.0), ("p90", 90.0), ("p99", 99.0),
               ("p99.9", 99.9))

# Pause-duration histogram bucket edges in milliseconds; the last bucket
# is open ended.
HISTOGRAM_EDGES_MS = (0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0,
                      128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0)


def nearest_rank(sorted_values, percentile: float):
    """Nearest-rank percentile of an ascending list; None when empty."""
    if not sorted_values:
        return None
    rank = max(1, math.ceil(percentile / 100.0 * len(sorted_values)))
    return sorted_values[min(rank, len(sorted_values)) - 1]


def pause_histogram(pause_ms):
    edges = HISTOGRAM_EDGES_MS
    counts = [0] * len(edges)
    for value in pause_ms:
        idx = 0
        for i in range(len(edges) - 1, -1, -1):
            if value >= edges[i]:
                idx = i
                break
        counts[idx] += 1
    buckets = []
    for i, lo in enumerate(edges):
        hi = edges[i + 1] if i + 1 < len(edges) else None
        buckets.append({"lo_ms": lo, "hi_ms": hi, "count": counts[i]})
    return buckets


def build_metrics(result) -> dict:
    """RunMetrics document from a SimulationResult.

    Pause statistics cover the post-warmup (steady-state) collections;
    byte totals cover the whole run.
    """
    pauses = result.pauses
    warmup = int(len(pauses) * result.config.warmup_fraction)
    measured = pauses[warmup:]
    pause_ms = sorted(p.modeled_ms for p in measured)
    by_kind: dict[str, int] = {}
    totals = {"scanned_bytes": 0, "copied_bytes": 0, "promoted_bytes": 0,
              "compacted_bytes": 0}
    for p in pauses:
        totals["scanned_bytes"] += p.scanned_bytes
        totals["copied_bytes"] += p.copied_bytes
        totals["promoted_bytes"] += p.promoted_bytes
        if p.kind != "young":
            totals["compacted_bytes"] += p.copied_bytes
    for p in measured:
        by_kind[p.kind] = by_kind.get(p.kind, 0) + 1

    percentiles = {name: nearest_rank(pause_ms, p)
                   for name, p in PERCENTILES}
    percentiles["max"] = pause_ms[-1] if pause_ms else None

    table = result.table
    contexts_per_gen = {}
    expansions = 0
    table_entries = 0
    if table is not None:
        for g in range(result.config.num_generations + 1):
            contexts_per_gen[str(g)] = 0
        for _kind, _key, entry in table.entries():
            table_entries += 1
            contexts_per_gen[str(entry.target_gen)] += 1
        expansions = len(table.expanded)

    collision = {"sites_observed": 0, "sequence_collision_sites": 0,
                 "multiset_collision_sites": 0, "sequence_rate": 0.0,
                 "multiset_rate": 0.0}
    if result.context_log is not None:
        from .profiler import collision_stats
        rep = collision_stats(result.context_log)
        collision = {
            "sites_observed": rep.sites_observed,
            "sequence_collision_sites": rep.sequence_collision_sites,
            "multiset_collision_sites": rep.multiset_collision_sites,
            "sequence_rate": rep.sequence_rate,
            "multiset_rate": rep.multiset_rate,
        }

    profiling = result.mode == "rolp"
    plan = result.plan
    return {
        "schema_version": SCHEMA_VERSION,
        "mode": result.mode,
        "trace_fingerprint": result.fingerprint,
        "config": result.config.echo(),
        "events": {
            "total": result.events_processed,
            "allocations": result.allocations,
        },
        "collections": len(measured),
        "collections_total": len(pauses),
        "warmup_collections": warmup,
        "pauses_ms": percentiles,
        "pauses_by_kind": dict(sorted(by_kind.items())),
        "pause_histogram_ms": pause_histogram(pause_ms),
        "totals": totals,
        "heap": {
            "peak_occupancy_bytes": result.heap.peak_occupancy,
            "final_occupancy_bytes": result.heap.occupancy_total(),
            "allocation_clock_bytes": result.heap.clock,
        },
        "profiler": {
            "profiled_sites": len(plan.profiled_sites) if profiling else 0,
            "profiled_methods": (len(plan.profiled_methods)
                                 if profiling else 0),
            "analyzed_sites": plan.analyzed_sites if profiling else 0,
            "analyzed_methods": plan.analyzed_methods if profiling else 0,
            "hot_methods": result.hot_methods if profiling else 0,
            "table_peak_bytes": result.table_peak_bytes,
            "table_entries": table_entries,
            "expanded_sites": expansions,
            "policy_runs": len(result.policy_runs),
            "contexts_per_generation": contexts_per_gen,
            "collisions": collision,
        },
    }


def to_json(metrics: dict) -> str:
    return json.dumps(metrics, indent=2) + "\n"


def flatten(metrics: dict, prefix: str = "") -> list:
    """Depth-first (path, value) pairs over dicts and lists."""
    rows = []
    if isinstance(metrics, dict):
        for key, value in metrics.items():
            path = f"{prefix}.{key}" if prefix else str(key)
            rows.extend(flatten(value, path))
    elif isinstance(metrics, list):
        for i, value in enumerate(metrics):
            rows.extend(flatten(value, f"{prefix}.{i}"))
    else:
        rows.append((prefix, metrics))
    return rows


def to_csv(metrics: dict) -> str:
    """Flat metric,value rows; list entries are indexed by position."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "value"])
    for path, value in flatten(metrics):
        writer.writerow([path, value])
    return buf.getvalue()


def compare(metrics_a: dict, metrics_b: dict):
    """Per-metric deltas (b - a) over every numeric leaf.

    Returns (rows, warnings); rows are dicts with metric, a, b, delta and
    delta_pct (None when a == 0).
    """
    warnings = []
    if metrics_a.get("trace_fingerprint") != metrics_b.get(
            "trace_fingerprint"):
        warnings.append("trace fingerprints differ; comparing anyway")
    flat_a = dict(flatten(metrics_a))
    flat_b = dict(flatten(metrics_b))
    rows = []
    for path, a_val in flat_a.items():
        if not isinstance(a_val, (int, float)) or isinstance(a_val, bool):
            continue
        b_val = flat_b.get(path)
        if not isinstance(b_val, (int, float)) or isinstance(b_val, bool):
            continue
        delta = b_val - a_val
        pct = (delta / a_val * 100.0) if a_val else None
        rows.append({"metric": path, "a": a_val, "b": b_val,
                     "delta": delta, "delta_pct": pct})
    return rows, warnings


def compare_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "a", "b", "delta", "delta_pct"])
    for row in rows:
        pct = "" if row["delta_pct"] is None else row["delta_pct"]
        writer.writerow([row["metric"], row["a"], row["b"], row["delta"],
                         pct])
    return buf.getvalue()


def compare_to_json(rows, warnings, metrics_a, metrics_b) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "a_mode": metrics_a.get("mode"),
        "b_mode": metrics_b.get("mode"),
        "a_fingerprint": metrics_a.get("trace_fingerprint"),
        "b_fingerprint": metrics_b.get("trace_fingerprint"),
        "warnings": warnings,
        "deltas": rows,
    }
    return json.dumps(doc, indent=2) + "\n"
