"""Simulated N-generational heap.

Objects are bookkeeping records, not buffers.  Time is the allocation
clock: the total number of bytes allocated so far.  An object is live at
clock t iff t < death_tick, so replaying a trace fully determines every
death without reference counting or tracing.

Generation 0 is the young space; generations 1..G are older generations
with fixed capacities.  Capacity is a collection trigger, not a hard
wall: when a collection cannot free enough room the allocation proceeds
over capacity rather than livelocking the engine (the analog of heap
expansion).  Older generations keep a death queue so a collection is only
requested when it can actually reclaim something.
"""
from __future__ import annotations

import heapq

from .errors import UnsatisfiableAllocationError
from .headers import bias_lock_header, header_context, pack_header


class HeapObject:
    __slots__ = ("obj_id", "size", "death_tick", "header", "resident_gen",
                 "profiled", "collected")

    def __init__(self, obj_id, size, death_tick, header, resident_gen,
                 profiled):
        self.obj_id = obj_id
        self.size = size
        self.death_tick = death_tick
        self.header = header
        self.resident_gen = resident_gen
        self.profiled = profiled
        self.collected = False

    def __repr__(self):
        return (f"HeapObject(id={self.obj_id}, size={self.size}, "
                f"death={self.death_tick}, gen={self.resident_gen})")


class GenState:
    __slots__ = ("capacity", "objects", "occupancy", "deaths", "dead_bytes")

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.objects: list[HeapObject] = []
        self.occupancy = 0
        self.deaths: list = []      # heap of (death_tick, obj_id, obj)
        self.dead_bytes = 0         # known-dead bytes not yet collected


class GcTrigger:
    """Allocation failed; collect this generation and retry."""

    __slots__ = ("gen",)

    def __init__(self, gen: int):
        self.gen = gen

    def __repr__(self):
        return f"GcTrigger(gen={self.gen})"


class SimHeap:
    def __init__(self, config):
        self.config = config
        caps = [config.young_capacity]
        caps += [config.gen_capacity] * config.num_generations
        self.gens = [GenState(c) for c in caps]
        self.clock = 0
        self.next_obj_id = 0
        self.objects: dict[int, HeapObject] = {}
        self.peak_occupancy = 0

    @property
    def num_generations(self) -> int:
        return self.config.num_generations

    def occupancy_total(self) -> int:
        return sum(g.occupancy for g in self.gens)

    def _advance_deaths(self, gen_index: int) -> None:
        g = self.gens[gen_index]
        deaths = g.deaths
        clock = self.clock
        while deaths and deaths[0][0] <= clock:
            _, _, obj = heapq.heappop(deaths)
            if not obj.collected:
                g.dead_bytes += obj.size

    def try_allocate(self, gen_index: int, size: int, context: int,
                     profiled: bool, death_tick: int, force: bool = False):
        """Place an object or return a GcTrigger naming the gen to collect.

        With force=True the object is placed even over capacity; the
        engine sets it after one collection attempt so allocation always
        terminates.
        """
        if size <= 0:
            raise ValueError("allocation size must be positive")
        if not 0 <= gen_index < len(self.gens):
            raise ValueError(f"generation index out of range: {gen_index}")
        g = self.gens[gen_index]
        if size > g.capacity:
            raise UnsatisfiableAllocationError(
                f"object of {size} bytes exceeds generation {gen_index} "
                f"capacity {g.capacity}")
        if not force and g.occupancy + size > g.capacity:
            if gen_index == 0:
                return GcTrigger(0)
            self._advance_deaths(gen_index)
            if g.dead_bytes > 0:
                return GcTrigger(gen_index)
            # Nothing reclaimable: collecting would be a pure waste, so
            # grow past capacity instead.
        obj_id = self.next_obj_id
        self.next_obj_id += 1
        header = pack_header(0, 0, obj_id & 0xFFFFFF, context)
        obj = HeapObject(obj_id, size, death_tick, header, gen_index,
                         profiled)
        g.objects.append(obj)
        g.occupancy += size
        if gen_index > 0:
            heapq.heappush(g.deaths, (death_tick, obj_id, obj))
        self.objects[obj_id] = obj
        self.clock += size
        total = self.occupancy_total()
        if total > self.peak_occupancy:
            self.peak_occupancy = total
        return obj

    def bias_lock(self, obj: HeapObject, thread_id: int) -> None:
        """Biased-lock an object: the header's upper word becomes a thread
        marker, so the object drops out of profiling for good."""
        if obj.collected:
            return
        obj.profiled = False
        obj.header = bias_lock_header(obj.header, thread_id)

    def context_of(self, obj: HeapObject) -> int:
        return header_context(obj.header)

    def discard(self, obj: HeapObject) -> None:
        """Bookkeeping for an object reclaimed by a collection."""
        obj.collected = True
        self.objects.pop(obj.obj_id, None)
