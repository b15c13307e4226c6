"""Static call-graph analysis producing the instrumentation plan.

Profiling method entries and exits is the expensive part of context
tracking, so only methods that can actually lead to an allocation within
max_alloc_frame calls are instrumented.  Distance 0 means the method body
allocates; a method that never reaches an allocation (getters, setters)
has infinite distance and is never profiled.  An optional package filter
restricts instrumentation to the subtrees that manage data.

Even planned methods stay cold until they have been invoked
hot_threshold times, mirroring profiling that piggy-backs on JIT
compilation of hot code.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field


@dataclass
class MethodModel:
    method_id: int
    package: str
    signature: str
    calls: list = field(default_factory=list)       # callee method ids
    sites: list = field(default_factory=list)       # (site_src, line)


@dataclass
class ProgramModel:
    methods: dict = field(default_factory=dict)     # id -> MethodModel

    def add_method(self, method_id, package, signature):
        m = MethodModel(method_id, package, signature)
        self.methods[method_id] = m
        return m


@dataclass
class InstrumentationPlan:
    profiled_methods: set
    profiled_sites: set            # site_src ids
    hot_threshold: int
    distances: dict                # method id -> int or math.inf
    analyzed_methods: int = 0      # methods inside the package filter
    analyzed_sites: int = 0


def package_matches(package: str, filters) -> bool:
    """Dotted-prefix match; an empty filter list accepts everything."""
    if not filters:
        return True
    for f in filters:
        if package == f or package.startswith(f + "."):
            return True
    return False


def allocation_distance(program: ProgramModel) -> dict:
    """Shortest call distance from each method to any allocation.

    Multi-source BFS over reversed call edges; cycles are handled by the
    usual visited-once discipline.  Methods that cannot reach an
    allocation map to math.inf.
    """
    callers = {mid: [] for mid in program.methods}
    for m in program.methods.values():
        for callee in m.calls:
            if callee in callers:
                callers[callee].append(m.method_id)

    dist = {mid: math.inf for mid in program.methods}
    queue = deque()
    for m in program.methods.values():
        if m.sites:
            dist[m.method_id] = 0
            queue.append(m.method_id)
    while queue:
        mid = queue.popleft()
        d = dist[mid] + 1
        for caller in callers[mid]:
            if d < dist[caller]:
                dist[caller] = d
                queue.append(caller)
    return dist


def select_instrumented(program: ProgramModel, max_alloc_frame: int,
                        packages=(), hot_threshold: int = 100
                        ) -> InstrumentationPlan:
    """Build the instrumentation plan for a program."""
    if max_alloc_frame < 0:
        raise ValueError("max_alloc_frame must be >= 0")
    distances = allocation_distance(program)
    profiled_methods = set()
    profiled_sites = set()
    analyzed_methods = 0
    analyzed_sites = 0
    for m in program.methods.values():
        if not package_matches(m.package, packages):
            continue
        analyzed_methods += 1
        analyzed_sites += len(m.sites)
        if distances[m.method_id] <= max_alloc_frame:
            profiled_methods.add(m.method_id)
        for site_src, _line in m.sites:
            profiled_sites.add(site_src)
    return InstrumentationPlan(
        profiled_methods=profiled_methods,
        profiled_sites=profiled_sites,
        hot_threshold=hot_threshold,
        distances=distances,
        analyzed_methods=analyzed_methods,
        analyzed_sites=analyzed_sites,
    )


def hot_gate(invocation_count: int, hot_threshold: int) -> bool:
    """Profiling activates once a planned method has been called this
    many times; the activating call itself is already profiled."""
    return invocation_count >= hot_threshold
