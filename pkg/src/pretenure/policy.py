"""Pretenuring policy: periodic target-generation updates.

Every inc_gen_freq-th collection, after the pause has closed, each table
entry is scored by the ratio of objects that reached the current tenuring
threshold to objects allocated in the window:

    allocated = counts[0]
    promoted  = counts[survivor_threshold]   (or counts[n-1] if the
                threshold exceeds the array)
    ratio     = promoted / allocated         (entry skipped when 0 allocs)

Ratios above inc_gen_thres bump the entry's target generation (capped at
the oldest generation, never decremented).  Ratios in the band
(expand_ctx, inc_gen_thres] on an aggregated site mean the site mixes
lifetimes, so it is expanded to per-context tracking instead; an
expand_ctx of 1 makes the band empty, disabling expansion.  Afterwards
every counter is reset to zero so the next window scores fresh data.

Ratio comparisons are exact rational arithmetic: a ratio equal to the
threshold never triggers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


@dataclass
class PolicyRunSummary:
    collection_index: int
    survivor_threshold: int
    entries_seen: int = 0
    entries_skipped: int = 0       # zero-allocation entries
    increments: list = field(default_factory=list)   # (kind, key, old, new)
    expansions: list = field(default_factory=list)   # site ids


def policy_scheduler(collection_index: int, inc_gen_freq: int) -> bool:
    """True when the policy should run after this collection."""
    return collection_index > 0 and collection_index % inc_gen_freq == 0


def update_target_generations(table, survivor_threshold: int,
                              config) -> PolicyRunSummary:
    """One policy window: score every entry, then reset all counters.

    Runs outside any pause and therefore contributes nothing to modeled
    pause time.
    """
    summary = PolicyRunSummary(collection_index=-1,
                               survivor_threshold=survivor_threshold)
    n = table.n
    slot = survivor_threshold if n > survivor_threshold else n - 1
    inc_thres = config.inc_gen_thres
    expand_thres = config.expand_ctx
    max_gen = config.num_generations

    for kind, key, entry in table.entries():
        summary.entries_seen += 1
        allocated = entry.counts[0]
        if allocated == 0:
            summary.entries_skipped += 1
            continue
        ratio = Fraction(entry.counts[slot], allocated)
        if ratio > inc_thres:
            if entry.target_gen < max_gen:
                old = entry.target_gen
                entry.target_gen = old + 1
                summary.increments.append((kind, key, old, old + 1))
        elif (kind == "site" and not table.is_expanded(key)
              and ratio > expand_thres):
            table.expand_site(key)
            summary.expansions.append(key)

    table.reset_counts()
    return summary
