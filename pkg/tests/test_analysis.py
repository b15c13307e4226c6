import math
from collections import defaultdict

from pretenure.analysis import (ProgramModel, allocation_distance, hot_gate,
                                package_matches, select_instrumented)
from pretenure.profiler import method_hash


def chain_program():
    """A -> B -> C -> D with the only allocation in D."""
    p = ProgramModel()
    for mid, name in enumerate("ABCD", start=1):
        p.add_method(mid, "app", f"app.{name}.run()")
    p.methods[1].calls.append(2)
    p.methods[2].calls.append(3)
    p.methods[3].calls.append(4)
    p.methods[4].sites.append((1, 10))
    return p


def test_distance_direct_alloc_is_zero():
    p = chain_program()
    assert allocation_distance(p)[4] == 0


def test_distance_getter_is_infinite():
    p = chain_program()
    p.add_method(9, "app", "app.Getter.get()")
    assert allocation_distance(p)[9] == math.inf


def test_distance_chain():
    dist = allocation_distance(chain_program())
    assert [dist[m] for m in (1, 2, 3, 4)] == [3, 2, 1, 0]


def test_distance_cycle_converges():
    p = chain_program()
    p.methods[3].calls.append(2)    # C -> B back edge
    dist = allocation_distance(p)
    assert dist[2] == 2 and dist[3] == 1


def test_plan_chain_max_frame_two():
    plan = select_instrumented(chain_program(), max_alloc_frame=2)
    assert plan.profiled_methods == {2, 3, 4}     # B, C, D; A is too far
    assert plan.profiled_sites == {1}


def test_plan_package_filter_excludes_subtree():
    p = chain_program()
    p.add_method(5, "lib.vendor", "lib.vendor.Pool.alloc()")
    p.methods[5].sites.append((2, 20))
    plan = select_instrumented(p, 8, packages=("app",))
    assert 5 not in plan.profiled_methods
    assert plan.profiled_sites == {1}
    everything = select_instrumented(p, 8, packages=())
    assert 2 in everything.profiled_sites       # empty filter means all


def test_plan_empty_for_allocation_free_program():
    p = ProgramModel()
    p.add_method(1, "app", "app.A.run()")
    plan = select_instrumented(p, 8)
    assert not plan.profiled_methods and not plan.profiled_sites


def test_package_prefix_matching():
    assert package_matches("org.app.db", ("org.app",))
    assert not package_matches("org.application", ("org.app",))
    assert package_matches("anything", ())


def test_plan_deterministic():
    a = select_instrumented(chain_program(), 2)
    b = select_instrumented(chain_program(), 2)
    assert a.profiled_methods == b.profiled_methods
    assert a.distances == b.distances


def test_hot_gate_boundary():
    assert not hot_gate(99, 100)
    assert hot_gate(100, 100)
    assert hot_gate(101, 100)
    assert hot_gate(1, 0)            # threshold 0: profiled from first call


def diamond_program():
    """One far root fanning into two near-allocation branches:

        R -> A -> B -> C(alloc)
        R -> X -> Y -> C

    The frames that distinguish the two paths (A/B vs X/Y) sit within two
    frames of the allocation; the shared root R is farther away and adds
    no discrimination.
    """
    p = ProgramModel()
    names = {1: "R", 3: "A", 4: "B", 5: "C", 6: "X", 7: "Y"}
    for mid, n in names.items():
        p.add_method(mid, "app", f"app.{n}.run()")
    p.methods[1].calls.extend([3, 6])
    p.methods[3].calls.append(4)
    p.methods[4].calls.append(5)
    p.methods[6].calls.append(7)
    p.methods[7].calls.append(5)
    p.methods[5].sites.append((1, 10))
    return p


def enumerate_paths(p, site_method):
    callers = defaultdict(list)
    for m in p.methods.values():
        for callee in m.calls:
            callers[callee].append(m.method_id)
    paths = []

    def walk(mid, acc):
        acc = [mid] + acc
        if not callers[mid]:
            paths.append(tuple(acc))
            return
        for c in callers[mid]:
            walk(c, list(acc))

    walk(site_method, [])
    return paths


def summary_partition(p, paths, profiled):
    groups = defaultdict(list)
    for path in paths:
        s = sum(method_hash(p.methods[m].signature)
                for m in path if m in profiled) & 0xFFFF
        groups[s].append(path)
    return sorted(tuple(sorted(g)) for g in groups.values())


def test_pruning_distant_methods_preserves_context_partition():
    p = diamond_program()
    paths = enumerate_paths(p, 5)
    full = {m.method_id for m in p.methods.values()}
    pruned = select_instrumented(p, max_alloc_frame=2).profiled_methods
    assert pruned < full            # something actually got pruned
    assert summary_partition(p, paths, full) == \
        summary_partition(p, paths, pruned)
