"""Online object-lifetime profiling.

A thread's *context summary* is the wrapping 16-bit sum of the hashes of
its currently active profiled method frames: entering a method adds its
hash, returning subtracts it.  Combined with a 16-bit allocation-site id
this forms a 32-bit allocation context that is cheap to maintain and cheap
to stamp into object headers.

The lifetime table maps allocation contexts to arrays of survivor
counters: slot 0 counts allocations, slot k counts objects observed
surviving at age k (clamped into the last slot).  Each entry also carries
the target generation the pretenuring policy assigns to objects allocated
through that context.

To bound memory, a site starts in *aggregated* mode (one entry per site
id, at most 2^16 entries) and is *expanded* to one-entry-per-context only
when the policy finds its survivor ratio ambiguous.  GC workers record
survivors into private tables merged into the global one once the
collection has finished, so survivor accounting never contends with the
pause itself.
"""
from __future__ import annotations

import zlib
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, NamedTuple

SUMMARY_BITS = 16
SUMMARY_MASK = (1 << SUMMARY_BITS) - 1
SITE_MASK = 0xFFFF
COUNTER_BYTES = 4


def _fold16(value: int) -> int:
    return ((value >> 16) ^ value) & 0xFFFF


def method_hash(signature: str) -> int:
    """Deterministic 16-bit hash of a method signature."""
    if not signature:
        raise ValueError("empty method signature")
    return _fold16(zlib.crc32(signature.encode("utf-8")))


def site_id(signature: str, line: int) -> int:
    """Deterministic 16-bit id for an allocation site (method + line)."""
    if not signature:
        raise ValueError("empty method signature")
    return _fold16(zlib.crc32(f"{signature}#{line}".encode("utf-8")))


class AllocationContext(NamedTuple):
    """32-bit allocation context: summary in the high half, site id low."""
    site_id: int
    summary: int

    @property
    def combined(self) -> int:
        return ((self.summary & SUMMARY_MASK) << SUMMARY_BITS) | \
            (self.site_id & SITE_MASK)

    @classmethod
    def from_combined(cls, combined: int) -> "AllocationContext":
        return cls(site_id=combined & SITE_MASK,
                   summary=(combined >> SUMMARY_BITS) & SUMMARY_MASK)


def combine_context(summary: int, site: int) -> int:
    return ((summary & SUMMARY_MASK) << SUMMARY_BITS) | (site & SITE_MASK)


class ThreadContextState:
    """Per-thread summary accumulator plus the oracle frame multiset.

    The multiset of active profiled frames is a debugging/verification
    side channel: the encoder itself only ever reads ``summary``.
    """

    __slots__ = ("thread_id", "summary", "active_frames")

    def __init__(self, thread_id: int):
        self.thread_id = thread_id
        self.summary = 0
        self.active_frames = Counter()

    def enter_method(self, h: int) -> None:
        self.summary = (self.summary + h) & SUMMARY_MASK
        self.active_frames[h] += 1

    def exit_method(self, h: int) -> None:
        self.summary = (self.summary - h) & SUMMARY_MASK
        self.active_frames[h] -= 1
        if self.active_frames[h] == 0:
            del self.active_frames[h]

    def context_for(self, site: int) -> int:
        return (self.summary << SUMMARY_BITS) | (site & SITE_MASK)


class LifetimeEntry:
    __slots__ = ("counts", "target_gen")

    def __init__(self, n: int, target_gen: int = 0):
        self.counts = [0] * n
        self.target_gen = target_gen

    def __repr__(self):
        return f"LifetimeEntry(counts={self.counts}, target_gen={self.target_gen})"


class LifetimeTable:
    """Global lifetime distribution table.

    Keys are either a bare 16-bit site id (aggregated mode) or a combined
    32-bit context (expanded mode); the two key spaces are kept in
    separate maps.  Once a site is expanded its aggregate entry is frozen:
    it stops receiving increments but keeps its target generation, which
    seeds every per-context entry created afterwards.
    """

    def __init__(self, n: int = 16, counter_bytes: int = COUNTER_BYTES,
                 entry_overhead: int = 0):
        if n < 2:
            raise ValueError("lifetime array length must be >= 2")
        self.n = n
        self.counter_bytes = counter_bytes
        self.entry_overhead = entry_overhead
        self.site_entries: dict[int, LifetimeEntry] = {}
        self.ctx_entries: dict[int, LifetimeEntry] = {}
        # site id -> target generation inherited by new per-context entries
        self.expanded: dict[int, int] = {}

    # -- mode handling ----------------------------------------------------

    def is_expanded(self, site: int) -> bool:
        return site in self.expanded

    def expand_site(self, site: int) -> None:
        """Switch a site to per-context tracking.  Idempotent."""
        if site in self.expanded:
            return
        entry = self.site_entries.get(site)
        self.expanded[site] = entry.target_gen if entry is not None else 0

    # -- recording ---------------------------------------------------------

    def record_allocation(self, combined: int) -> int:
        """Count one allocation; returns the entry's target generation."""
        site = combined & SITE_MASK
        if site in self.expanded:
            entry = self.ctx_entries.get(combined)
            if entry is None:
                entry = LifetimeEntry(self.n, self.expanded[site])
                self.ctx_entries[combined] = entry
        else:
            entry = self.site_entries.get(site)
            if entry is None:
                entry = LifetimeEntry(self.n)
                self.site_entries[site] = entry
        entry.counts[0] += 1
        return entry.target_gen

    def target_generation(self, combined: int) -> int:
        site = combined & SITE_MASK
        if site in self.expanded:
            entry = self.ctx_entries.get(combined)
            if entry is None:
                return self.expanded[site]
        else:
            entry = self.site_entries.get(site)
            if entry is None:
                return 0
        return entry.target_gen

    # -- iteration / bookkeeping -------------------------------------------

    def entries(self) -> Iterator[tuple[str, int, LifetimeEntry]]:
        """All entries as (kind, key, entry); kind is 'site' or 'ctx'."""
        for key, entry in self.site_entries.items():
            yield "site", key, entry
        for key, entry in self.ctx_entries.items():
            yield "ctx", key, entry

    def __len__(self) -> int:
        return len(self.site_entries) + len(self.ctx_entries)

    def reset_counts(self) -> None:
        for entry in self.site_entries.values():
            entry.counts = [0] * self.n
        for entry in self.ctx_entries.values():
            entry.counts = [0] * self.n

    def size_bytes(self) -> int:
        per_entry = self.n * self.counter_bytes + self.entry_overhead
        return len(self) * per_entry

    @staticmethod
    def worst_case_bytes(n: int, counter_bytes: int = COUNTER_BYTES,
                         context_bits: int = 32) -> int:
        """Memory if every possible full context materialized an entry."""
        return (n * counter_bytes) * (1 << context_bits)

    def merge_from(self, worker: "WorkerTable") -> None:
        n = self.n
        for site, counts in worker.site_counts.items():
            entry = self.site_entries.get(site)
            if entry is None:
                entry = LifetimeEntry(n)
                self.site_entries[site] = entry
            ec = entry.counts
            for i, c in enumerate(counts):
                ec[i] += c
        for combined, counts in worker.ctx_counts.items():
            entry = self.ctx_entries.get(combined)
            if entry is None:
                seed = self.expanded.get(combined & SITE_MASK, 0)
                entry = LifetimeEntry(n, seed)
                self.ctx_entries[combined] = entry
            ec = entry.counts
            for i, c in enumerate(counts):
                ec[i] += c


class WorkerTable:
    """Private survivor counters for one GC worker.

    Holds only the current collection's increments; keys are chosen by the
    global table's per-site mode, which never changes mid-collection.
    """

    __slots__ = ("table", "site_counts", "ctx_counts")

    def __init__(self, table: LifetimeTable):
        self.table = table
        self.site_counts: dict[int, list[int]] = {}
        self.ctx_counts: dict[int, list[int]] = {}

    def record_survivor(self, combined: int, age: int) -> None:
        if age < 1:
            raise ValueError("survivor age must be >= 1")
        n = self.table.n
        slot = age if age < n else n - 1
        site = combined & SITE_MASK
        if site in self.table.expanded:
            counts = self.ctx_counts.get(combined)
            if counts is None:
                counts = [0] * n
                self.ctx_counts[combined] = counts
        else:
            counts = self.site_counts.get(site)
            if counts is None:
                counts = [0] * n
                self.site_counts[site] = counts
        counts[slot] += 1

    def clear(self) -> None:
        self.site_counts = {}
        self.ctx_counts = {}


def merge_worker_tables(table: LifetimeTable,
                        workers: list[WorkerTable]) -> None:
    """Fold every worker's increments into the global table and clear them.

    Order-insensitive: counter addition commutes, and entry creation seeds
    depend only on the (stable) expansion state.
    """
    for worker in workers:
        table.merge_from(worker)
        worker.clear()


# -- context-summary collision accounting ----------------------------------

@dataclass
class CollisionReport:
    sites_observed: int
    sequence_collision_sites: int
    multiset_collision_sites: int
    sequence_rate: float
    multiset_rate: float


class ContextLog:
    """Ground-truth record of which real calling contexts hit each site.

    For every (site, summary) pair this keeps the distinct profiled-frame
    sequences and frame multisets that produced the summary, so collisions
    can be reported both ways: counting order-only differences (which the
    commutative summary merges by design) and genuinely distinct frame
    sets that happen to sum to the same value.
    """

    def __init__(self):
        # site -> summary -> (set of frame sequences, set of frame multisets)
        self.observations: dict[int, dict[int, tuple[set, set]]] = {}

    def record(self, site: int, summary: int, frames: tuple) -> None:
        per_site = self.observations.get(site)
        if per_site is None:
            per_site = {}
            self.observations[site] = per_site
        buckets = per_site.get(summary)
        if buckets is None:
            buckets = (set(), set())
            per_site[summary] = buckets
        buckets[0].add(frames)
        buckets[1].add(tuple(sorted(frames)))


def collision_stats(log: ContextLog) -> CollisionReport:
    """Fraction of sites where one summary stands for >= 2 true contexts."""
    observed = len(log.observations)
    seq_hits = 0
    multi_hits = 0
    for per_site in log.observations.values():
        if any(len(b[0]) > 1 for b in per_site.values()):
            seq_hits += 1
        if any(len(b[1]) > 1 for b in per_site.values()):
            multi_hits += 1
    return CollisionReport(
        sites_observed=observed,
        sequence_collision_sites=seq_hits,
        multiset_collision_sites=multi_hits,
        sequence_rate=seq_hits / observed if observed else 0.0,
        multiset_rate=multi_hits / observed if observed else 0.0,
    )
