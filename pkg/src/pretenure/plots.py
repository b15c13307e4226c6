"""Figure rendering for run and comparison reports.

Figures are drawn from the metrics documents, never from live simulator
state, so anything written to JSON can be re-plotted later.  Rendering
uses the Agg backend and writes PNG files next to the delimited output.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

PERCENTILE_ORDER = ("p50", "p90", "p99", "p99.9", "max")


def _bucket_labels(buckets):
    labels = []
    for b in buckets:
        hi = "inf" if b["hi_ms"] is None else f"{b['hi_ms']:g}"
        labels.append(f"{b['lo_ms']:g}-{hi}")
    return labels


def render_run_plots(metrics: dict, outdir, prefix: str = "") -> list:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(6, 4))
    values = [metrics["pauses_ms"][p] or 0.0 for p in PERCENTILE_ORDER]
    ax.plot(range(len(values)), values, marker="o")
    ax.set_xticks(range(len(values)), PERCENTILE_ORDER)
    ax.set_ylabel("pause (modeled ms)")
    ax.set_title(f"Pause percentiles ({metrics['mode']})")
    ax.grid(True, alpha=0.3)
    path = outdir / f"{prefix}pause_percentiles.png"
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(7, 4))
    buckets = metrics["pause_histogram_ms"]
    counts = [b["count"] for b in buckets]
    ax.bar(range(len(counts)), counts)
    ax.set_xticks(range(len(counts)), _bucket_labels(buckets),
                  rotation=45, ha="right", fontsize=7)
    ax.set_ylabel("pauses")
    ax.set_xlabel("duration interval (ms)")
    ax.set_title(f"Pauses per duration interval ({metrics['mode']})")
    path = outdir / f"{prefix}pause_histogram.png"
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)
    written.append(path)
    return written


def render_compare_plots(metrics_a: dict, metrics_b: dict, outdir) -> list:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    label_a = metrics_a.get("mode", "a")
    label_b = metrics_b.get("mode", "b")

    fig, ax = plt.subplots(figsize=(6, 4))
    xs = range(len(PERCENTILE_ORDER))
    for metrics, label, shift in ((metrics_a, label_a, -0.17),
                                  (metrics_b, label_b, 0.17)):
        values = [metrics["pauses_ms"][p] or 0.0 for p in PERCENTILE_ORDER]
        ax.bar([x + shift for x in xs], values, width=0.34, label=label)
    ax.set_xticks(list(xs), PERCENTILE_ORDER)
    ax.set_ylabel("pause (modeled ms)")
    ax.set_title("Pause percentiles")
    ax.legend()
    path = outdir / "compare_percentiles.png"
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(7, 4))
    buckets = metrics_a["pause_histogram_ms"]
    xs = range(len(buckets))
    for metrics, label, shift in ((metrics_a, label_a, -0.17),
                                  (metrics_b, label_b, 0.17)):
        counts = [b["count"] for b in metrics["pause_histogram_ms"]]
        ax.bar([x + shift for x in xs], counts, width=0.34, label=label)
    ax.set_xticks(list(xs), _bucket_labels(buckets),
                  rotation=45, ha="right", fontsize=7)
    ax.set_ylabel("pauses")
    ax.set_xlabel("duration interval (ms)")
    ax.set_title("Pauses per duration interval")
    ax.legend()
    path = outdir / "compare_histogram.png"
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)
    written.append(path)
    return written
