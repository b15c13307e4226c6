"""Deterministic trace replay.

Three modes share one event loop and differ only in allocation placement:

  baseline  profiling off; everything is allocated in young space and
            survivors are promoted into generation 1, classic
            two-generation behavior (older generations 2..G stay idle).
  rolp      the full online-profiling pipeline: context tracking, the
            lifetime table, and the pretenuring policy decide per
            allocation context where to allocate.
  oracle    profiling off; each allocation is pretenured straight into
            the generation its true remaining lifetime maps to, an upper
            bound on what any profiler could achieve.

Replay is single threaded; trace "threads" are just interleaved event
streams with per-thread context state.  Identical (trace, mode, config)
always produces identical results.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .analysis import hot_gate, select_instrumented
from .collector import (ErgonomicsState, collect_generation,
                        run_young_collection)
from .config import SimConfig
from .errors import TraceFormatError
from .heap import GcTrigger, SimHeap
from .policy import policy_scheduler, update_target_generations
from .profiler import (ContextLog, LifetimeTable, SUMMARY_BITS,
                       ThreadContextState, WorkerTable,
                       merge_worker_tables, method_hash)

MODES = ("baseline", "rolp", "oracle")


class ReplayObserver:
    """Hook points for verification harnesses; every method is a no-op."""

    def on_context_recorded(self, site, summary, combined):
        """Fires when an allocation bumps its table counter, which happens
        before any collection the allocation itself triggers."""

    def on_alloc(self, obj, site, summary, target_gen):
        pass

    def on_survivor(self, obj, new_age, gen_index):
        pass

    def on_collection(self, record):
        pass

    def on_window_close(self, table, collection_index):
        pass

    def on_policy(self, summary):
        pass

    def on_bias_lock(self, obj):
        pass


@dataclass
class RuntimeStats:
    wall_seconds: float = 0.0
    analysis_seconds: float = 0.0
    events_per_second: float = 0.0


@dataclass
class SimulationResult:
    mode: str
    config: SimConfig
    fingerprint: str
    pauses: list
    heap: SimHeap
    plan: object
    table: object               # LifetimeTable or None
    policy_runs: list
    context_log: object         # ContextLog or None
    events_processed: int
    allocations: int
    table_peak_bytes: int
    hot_methods: int
    runtime: RuntimeStats = field(default_factory=RuntimeStats)


def lifetime_class_generation(remaining: int, young_capacity: int,
                              num_generations: int) -> int:
    """Map a remaining lifetime (clock bytes) to a lifetime-class
    generation: under one young turnover stays young, then geometric
    buckets of survived turnovers."""
    if remaining < young_capacity:
        return 0
    survived = remaining // young_capacity
    gen = 1
    bound = 4
    while gen < num_generations and survived >= bound:
        bound *= 4
        gen += 1
    return gen


class ReplayEngine:
    def __init__(self, trace, mode: str, config: SimConfig, observer=None):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.trace = trace
        self.mode = mode
        self.config = config
        self.observer = observer
        self.heap = SimHeap(config)
        self.ergonomics = ErgonomicsState(config.max_tenuring_threshold,
                                          config.target_survivor_fraction)
        t0 = time.perf_counter()
        self.plan = select_instrumented(trace.program, config.max_alloc_frame,
                                        config.packages, config.hot_threshold)
        self.analysis_seconds = time.perf_counter() - t0

        self.profiling = mode == "rolp"
        if self.profiling:
            self.table = LifetimeTable(config.n)
            self.workers = [WorkerTable(self.table)
                            for _ in range(config.workers)]
            self.context_log = ContextLog()
        else:
            self.table = None
            self.workers = []
            self.context_log = None

        self.pauses = []
        self.policy_runs = []
        self.collection_index = 0
        self.table_peak_bytes = 0
        self.allocations = 0
        self.hot_methods: set = set()

        # Per-thread state (rolp only)
        self._states: dict[int, ThreadContextState] = {}
        self._stacks: dict[int, list] = {}    # (method, profiled, hash)
        self._frames: dict[int, list] = {}    # active profiled hashes
        self._invocations: dict[int, int] = {}
        self._method_hashes = {
            mid: method_hash(m.signature)
            for mid, m in trace.program.methods.items()
        }

    # -- collections -------------------------------------------------------

    def _run_collection(self, gen_index: int) -> None:
        if gen_index == 0:
            record = run_young_collection(self.heap, self.workers,
                                          self.ergonomics, self.config,
                                          self.observer)
        else:
            record = collect_generation(self.heap, gen_index, self.workers,
                                        self.ergonomics, self.config,
                                        self.observer)
        self.collection_index += 1
        record.collection_index = self.collection_index
        self.pauses.append(record)
        if self.profiling:
            merge_worker_tables(self.table, self.workers)
            size = self.table.size_bytes()
            if size > self.table_peak_bytes:
                self.table_peak_bytes = size
        if self.observer is not None:
            self.observer.on_collection(record)
        if self.profiling and policy_scheduler(self.collection_index,
                                               self.config.inc_gen_freq):
            if self.observer is not None:
                self.observer.on_window_close(self.table,
                                              self.collection_index)
            summary = update_target_generations(
                self.table, self.ergonomics.survivor_threshold, self.config)
            summary.collection_index = self.collection_index
            self.policy_runs.append(summary)
            if self.observer is not None:
                self.observer.on_policy(summary)
        if gen_index == 0 and record.promoted_bytes > 0:
            gen1 = self.heap.gens[1]
            if gen1.occupancy > gen1.capacity:
                # Promotion overflowed generation 1: cascade immediately,
                # accounted as its own pause.
                self._run_collection(1)

    def _allocate(self, gen_index: int, size: int, context: int,
                  profiled: bool, death_tick: int):
        result = self.heap.try_allocate(gen_index, size, context, profiled,
                                        death_tick)
        if isinstance(result, GcTrigger):
            self._run_collection(result.gen)
            result = self.heap.try_allocate(gen_index, size, context,
                                            profiled, death_tick, force=True)
        return result

    # -- event loop ----------------------------------------------------------

    def run(self) -> SimulationResult:
        started = time.perf_counter()
        observer = self.observer
        profiling = self.profiling
        oracle = self.mode == "oracle"
        heap = self.heap
        sites = self.trace.sites
        profiled_sites = self.plan.profiled_sites if profiling else frozenset()
        plan_methods = self.plan.profiled_methods
        hot_threshold = self.config.hot_threshold
        hashes = self._method_hashes
        young_capacity = self.config.young_capacity
        num_gens = self.config.num_generations
        events_processed = 0

        for ev in self.trace.events:
            events_processed += 1
            kind = ev[0]
            if kind == "A":
                _, thread, src, size, death = ev
                if profiling and src in profiled_sites:
                    state = self._states.get(thread)
                    if state is None:
                        state = ThreadContextState(thread)
                        self._states[thread] = state
                        self._frames[thread] = []
                    site = sites[src]
                    combined = (state.summary << SUMMARY_BITS) | site.hash16
                    target = self.table.record_allocation(combined)
                    self.context_log.record(site.hash16, state.summary,
                                            tuple(self._frames[thread]))
                    if observer is not None:
                        observer.on_context_recorded(site, state.summary,
                                                     combined)
                    obj = self._allocate(target, size, combined, True, death)
                    if observer is not None:
                        observer.on_alloc(obj, site, state.summary, target)
                else:
                    if oracle:
                        gen = lifetime_class_generation(
                            death - heap.clock, young_capacity, num_gens)
                    else:
                        gen = 0
                    obj = self._allocate(gen, size, 0, False, death)
                    if observer is not None:
                        observer.on_alloc(obj, sites[src], 0, gen)
                self.allocations += 1
            elif kind == "C":
                if profiling:
                    _, thread, mid = ev
                    count = self._invocations.get(mid, 0) + 1
                    self._invocations[mid] = count
                    active = (mid in plan_methods
                              and hot_gate(count, hot_threshold))
                    stack = self._stacks.get(thread)
                    if stack is None:
                        stack = []
                        self._stacks[thread] = stack
                        self._states[thread] = ThreadContextState(thread)
                        self._frames[thread] = []
                    if active:
                        self.hot_methods.add(mid)
                        h = hashes[mid]
                        stack.append((mid, True, h))
                        self._states[thread].enter_method(h)
                        self._frames[thread].append(h)
                    else:
                        stack.append((mid, False, 0))
            elif kind == "R":
                if profiling:
                    _, thread, mid = ev
                    stack = self._stacks.get(thread)
                    if not stack:
                        raise TraceFormatError(
                            f"return without call on thread {thread}")
                    _, active, h = stack.pop()
                    if active:
                        self._states[thread].exit_method(h)
                        self._frames[thread].pop()
            elif kind == "L":
                _, thread, ordinal = ev
                obj = heap.objects.get(ordinal)
                if obj is not None:
                    heap.bias_lock(obj, thread)
                    if observer is not None:
                        observer.on_bias_lock(obj)
            else:
                raise TraceFormatError(f"unknown event kind {kind!r}")

        wall = time.perf_counter() - started
        runtime = RuntimeStats(
            wall_seconds=wall,
            analysis_seconds=self.analysis_seconds,
            events_per_second=events_processed / wall if wall > 0 else 0.0,
        )
        return SimulationResult(
            mode=self.mode,
            config=self.config,
            fingerprint=self.trace.fingerprint,
            pauses=self.pauses,
            heap=heap,
            plan=self.plan,
            table=self.table,
            policy_runs=self.policy_runs,
            context_log=self.context_log,
            events_processed=events_processed,
            allocations=self.allocations,
            table_peak_bytes=self.table_peak_bytes,
            hot_methods=len(self.hot_methods),
            runtime=runtime,
        )


def replay(trace, mode: str, config: SimConfig | None = None,
           observer=None) -> SimulationResult:
    """Replay a parsed trace in the given mode."""
    if config is None:
        config = SimConfig()
    return ReplayEngine(trace, mode, config, observer).run()
