"""Stop-the-world collections over the simulated heap.

A young collection discards dead objects, ages every survivor, promotes
those at or above the tenuring threshold into generation 1 and keeps the
rest in young space.  Older generations are compacted in place: dead
objects are dropped and every live object is copied once.  There is no
promotion ladder between older generations; they are lifetime classes,
not ages.

The pause model charges scan_cost per byte examined and copy_cost per
byte relocated (within young, promoted, or compacted alike):

    modeled_ms = scan_cost * scanned_bytes + copy_cost * copied_bytes

``promoted_bytes`` is the subset of ``copied_bytes`` that changed
generation.  Survivor accounting goes through per-worker tables and is
merged after the pause closes, so it never adds to modeled time.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

from .headers import MAX_AGE, header_age, header_context, with_age


@dataclass
class PauseRecord:
    collection_index: int
    kind: str                   # "young" or "gen-<k>"
    scanned_bytes: int
    copied_bytes: int
    promoted_bytes: int
    modeled_ms: float
    survivor_threshold_at_start: int


class ErgonomicsState:
    """Adaptive tenuring threshold, recomputed after every young pause.

    The threshold is the smallest age at which cumulative survivor bytes
    exceed target_survivor_fraction of the survivor space; if survivors
    never fill that budget the threshold rests at the maximum.
    """

    __slots__ = ("survivor_threshold", "target_survivor_fraction",
                 "last_census")

    def __init__(self, max_tenuring_threshold: int,
                 target_survivor_fraction: float = 0.5):
        self.survivor_threshold = max_tenuring_threshold
        self.target_survivor_fraction = target_survivor_fraction
        self.last_census = ()      # survivor bytes by age, last young GC


def update_ergonomics(state: ErgonomicsState, survivor_bytes_by_age,
                      survivor_capacity: int,
                      max_tenuring_threshold: int) -> int:
    """Recompute the threshold from the post-collection survivor census.

    survivor_bytes_by_age[a] holds the bytes of every object that
    survived this collection at (new) age a, whether it stayed in young
    space or was promoted; counting both keeps the threshold from
    flapping between extremes when a low threshold empties the census.
    """
    state.last_census = tuple(survivor_bytes_by_age)
    budget = state.target_survivor_fraction * survivor_capacity
    cumulative = 0
    threshold = max_tenuring_threshold
    for age in range(1, max_tenuring_threshold + 1):
        if age < len(survivor_bytes_by_age):
            cumulative += survivor_bytes_by_age[age]
        if cumulative > budget:
            threshold = age
            break
    state.survivor_threshold = threshold
    return threshold


def run_young_collection(heap, workers, ergonomics, config,
                         observer=None) -> PauseRecord:
    """Collect generation 0.

    Every surviving profiled object reports (context, new age) into a
    worker table, round-robin over workers.  Returns the pause record;
    the caller owns collection numbering, merging, and cascades.
    """
    young = heap.gens[0]
    gen1 = heap.gens[1]
    threshold = ergonomics.survivor_threshold
    clock = heap.clock
    scanned = young.occupancy
    copied = 0
    promoted = 0
    stayed = []
    stayed_bytes = 0
    survivor_bytes_by_age = [0] * (config.max_tenuring_threshold + 1)
    n_workers = len(workers)
    survivor_index = 0

    for obj in young.objects:
        if obj.death_tick <= clock:
            heap.discard(obj)
            continue
        age = header_age(obj.header)
        new_age = age + 1 if age < MAX_AGE else MAX_AGE
        obj.header = with_age(obj.header, new_age)
        copied += obj.size
        if new_age < len(survivor_bytes_by_age):
            survivor_bytes_by_age[new_age] += obj.size
        if new_age >= threshold:
            promoted += obj.size
            obj.resident_gen = 1
            gen1.objects.append(obj)
            gen1.occupancy += obj.size
            heapq.heappush(gen1.deaths, (obj.death_tick, obj.obj_id, obj))
        else:
            stayed.append(obj)
            stayed_bytes += obj.size
        if n_workers and obj.profiled:
            workers[survivor_index % n_workers].record_survivor(
                header_context(obj.header), new_age)
            survivor_index += 1
        if observer is not None:
            observer.on_survivor(obj, new_age, 0)

    young.objects = stayed
    young.occupancy = stayed_bytes
    young.dead_bytes = 0

    record = PauseRecord(
        collection_index=-1,
        kind="young",
        scanned_bytes=scanned,
        copied_bytes=copied,
        promoted_bytes=promoted,
        modeled_ms=config.scan_cost * scanned + config.copy_cost * copied,
        survivor_threshold_at_start=threshold,
    )
    update_ergonomics(ergonomics, survivor_bytes_by_age,
                      config.survivor_capacity,
                      config.max_tenuring_threshold)
    return record


def collect_generation(heap, gen_index, workers, ergonomics, config,
                       observer=None) -> PauseRecord:
    """Compact generation gen_index (>= 1) in place."""
    g = heap.gens[gen_index]
    clock = heap.clock
    scanned = g.occupancy
    copied = 0
    stayed = []
    n_workers = len(workers)
    survivor_index = 0

    for obj in g.objects:
        if obj.death_tick <= clock:
            heap.discard(obj)
            continue
        age = header_age(obj.header)
        new_age = age + 1 if age < MAX_AGE else MAX_AGE
        obj.header = with_age(obj.header, new_age)
        copied += obj.size
        stayed.append(obj)
        if n_workers and obj.profiled:
            workers[survivor_index % n_workers].record_survivor(
                header_context(obj.header), new_age)
            survivor_index += 1
        if observer is not None:
            observer.on_survivor(obj, new_age, gen_index)

    g.objects = stayed
    g.occupancy = copied
    g.dead_bytes = 0

    return PauseRecord(
        collection_index=-1,
        kind=f"gen-{gen_index}",
        scanned_bytes=scanned,
        copied_bytes=copied,
        promoted_bytes=0,
        modeled_ms=config.scan_cost * scanned + config.copy_cost * copied,
        survivor_threshold_at_start=ergonomics.survivor_threshold,
    )
