"""Line-oriented trace format: parsing, validation, canonical writing.

A trace is a program description followed by an event stream, one record
per line, `#` starts a comment:

    M <method_id> <package> <signature>     method declaration
    E <method_id> <called_method_id>        static call edge
    S <site_id> <method_id> <line>          allocation site declaration
    C <thread> <method_id>                  call
    R <thread> <method_id>                  return (innermost match)
    A <thread> <site> <size> <death_tick>   allocation
    L <thread> <obj_ordinal>                lock event

All ids are decimal.  death_tick is an absolute allocation-clock value
(bytes); obj_ordinal is the zero-based allocation order.  Program lines
must precede all events.  The canonical form (M block, E block, S block,
then events, single spaces, trailing newline) round-trips byte-exactly
through parse/write.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import NamedTuple

from .analysis import ProgramModel
from .errors import TraceFormatError
from .profiler import site_id as site_hash16

# Event tuples: ("C", thread, method) / ("R", thread, method)
#               ("A", thread, site, size, death_tick) / ("L", thread, ordinal)


class SiteInfo(NamedTuple):
    site_src: int
    method_id: int
    line: int
    hash16: int


@dataclass
class ParsedTrace:
    program: ProgramModel
    sites: dict                       # site_src -> SiteInfo
    events: list
    fingerprint: str
    method_order: list = field(default_factory=list)
    edge_order: list = field(default_factory=list)    # (caller, callee)
    site_order: list = field(default_factory=list)    # site_src ids

    @property
    def alloc_count(self) -> int:
        return sum(1 for ev in self.events if ev[0] == "A")


def trace_fingerprint(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def parse_trace(text: str) -> ParsedTrace:
    program = ProgramModel()
    sites: dict[int, SiteInfo] = {}
    events: list = []
    method_order: list[int] = []
    edge_order: list = []
    site_order: list[int] = []

    in_events = False
    clock = 0
    allocs = 0
    stacks: dict[int, list[int]] = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind, _, rest = line.partition(" ")
        parts = rest.split()
        try:
            if kind == "M":
                if in_events:
                    raise TraceFormatError(
                        "program line after first event", line_no)
                mid = int(parts[0])
                package = parts[1]
                signature = rest.split(None, 2)[2]
                if mid in program.methods:
                    raise TraceFormatError(
                        f"duplicate method id {mid}", line_no)
                program.add_method(mid, package, signature)
                method_order.append(mid)
            elif kind == "E":
                if in_events:
                    raise TraceFormatError(
                        "program line after first event", line_no)
                caller, callee = int(parts[0]), int(parts[1])
                for mid in (caller, callee):
                    if mid not in program.methods:
                        raise TraceFormatError(
                            f"edge references unknown method {mid}", line_no)
                program.methods[caller].calls.append(callee)
                edge_order.append((caller, callee))
            elif kind == "S":
                if in_events:
                    raise TraceFormatError(
                        "program line after first event", line_no)
                src, mid, lineno = int(parts[0]), int(parts[1]), int(parts[2])
                if src in sites:
                    raise TraceFormatError(
                        f"duplicate site id {src}", line_no)
                method = program.methods.get(mid)
                if method is None:
                    raise TraceFormatError(
                        f"site references unknown method {mid}", line_no)
                method.sites.append((src, lineno))
                sites[src] = SiteInfo(src, mid, lineno,
                                      site_hash16(method.signature, lineno))
                site_order.append(src)
            elif kind == "C":
                in_events = True
                thread, mid = int(parts[0]), int(parts[1])
                if mid not in program.methods:
                    raise TraceFormatError(
                        f"call to unknown method {mid}", line_no)
                stacks.setdefault(thread, []).append(mid)
                events.append(("C", thread, mid))
            elif kind == "R":
                in_events = True
                thread, mid = int(parts[0]), int(parts[1])
                stack = stacks.get(thread)
                if not stack:
                    raise TraceFormatError(
                        f"return from method {mid} on thread {thread} "
                        "with empty call stack", line_no)
                if stack[-1] != mid:
                    raise TraceFormatError(
                        f"return from method {mid} on thread {thread} does "
                        f"not match innermost call {stack[-1]}", line_no)
                stack.pop()
                events.append(("R", thread, mid))
            elif kind == "A":
                in_events = True
                thread = int(parts[0])
                src = int(parts[1])
                size = int(parts[2])
                death = int(parts[3])
                if src not in sites:
                    raise TraceFormatError(
                        f"allocation at undeclared site {src}", line_no)
                if size <= 0:
                    raise TraceFormatError(
                        f"allocation size must be positive, got {size}",
                        line_no)
                if death < clock:
                    raise TraceFormatError(
                        f"death_tick {death} precedes the allocation clock "
                        f"{clock}", line_no)
                clock += size
                allocs += 1
                events.append(("A", thread, src, size, death))
            elif kind == "L":
                in_events = True
                thread, ordinal = int(parts[0]), int(parts[1])
                if ordinal >= allocs:
                    raise TraceFormatError(
                        f"lock references object ordinal {ordinal} before "
                        "its allocation", line_no)
                events.append(("L", thread, ordinal))
            else:
                raise TraceFormatError(f"unknown record kind {kind!r}",
                                       line_no)
        except TraceFormatError:
            raise
        except (IndexError, ValueError) as exc:
            raise TraceFormatError(f"malformed {kind} record: {exc}",
                                   line_no) from exc

    return ParsedTrace(program=program, sites=sites, events=events,
                       fingerprint=trace_fingerprint(text),
                       method_order=method_order, edge_order=edge_order,
                       site_order=site_order)


def write_trace(trace: ParsedTrace) -> str:
    """Canonical text for a parsed trace."""
    out = []
    for mid in trace.method_order:
        m = trace.program.methods[mid]
        out.append(f"M {mid} {m.package} {m.signature}")
    for caller, callee in trace.edge_order:
        out.append(f"E {caller} {callee}")
    for src in trace.site_order:
        s = trace.sites[src]
        out.append(f"S {s.site_src} {s.method_id} {s.line}")
    for ev in trace.events:
        out.append(" ".join(str(p) for p in ev))
    return "\n".join(out) + "\n" if out else ""
