"""Parameterized synthetic workloads with exact lifetime ground truth.

Three kinds:

  generational  nearly everything dies before its first collection
                opportunity; the control workload where pretenuring has
                nothing to gain.
  cache         a fraction of objects, allocated by a small fraction of
                sites, live for multiples of the young turnover, in
                geometric lifetime tiers (entries evicted after a long,
                tier-dependent residence).  The pretenuring payoff case.
  mixed         one shared allocation site reached through two call paths
                whose cohorts have disjoint lifetime classes; only
                per-context profiling can separate them.

Every workload is deterministic for a fixed spec (seed included), emits
the canonical trace format, and returns an oracle with the true lifetime
of every cohort for verification.

Lifetimes are expressed in allocation-clock bytes relative to the young
capacity: a delta of 2.0 young units means the object dies after two
young generations' worth of allocation.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .config import MIB
from .errors import ConfigError
from .profiler import method_hash, site_id

YOUNG_UNIT = 32 * MIB          # default young capacity the deltas scale by

# Lifetime tiers for cache-like cohorts, in young units.  Geometric
# spacing so distinct tiers map to distinct lifetime-class generations.
CACHE_TIERS = (2.0, 7.0, 28.0)

DEFAULT_THREADS = 4
ALLOCS_PER_BLOCK = 4


@dataclass
class SyntheticSpec:
    kind: str                       # generational | cache | mixed
    seed: int = 0
    event_count: int = 400_000
    long_lived_fraction: float = 0.3
    long_lived_site_fraction: float = 0.1
    mean_size_short: int = 32_000
    mean_size_long: int = 32_000
    threads: int = DEFAULT_THREADS
    young_unit: int = YOUNG_UNIT
    tiers: tuple = CACHE_TIERS

    def validate(self):
        if self.kind not in ("generational", "cache", "mixed"):
            raise ConfigError(f"unknown workload kind {self.kind!r}")
        for name in ("long_lived_fraction", "long_lived_site_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if self.kind == "cache" and self.long_lived_fraction > 0 and \
                self.long_lived_site_fraction == 0:
            raise ConfigError(
                "cache workload with long-lived objects needs a nonzero "
                "long-lived site fraction")
        if self.event_count < 1000:
            raise ConfigError("event_count too small to exercise the heap")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


@dataclass
class SynthOracle:
    """Ground truth recorded while generating a workload."""
    kind: str
    seed: int
    alloc_count: int = 0
    total_bytes: int = 0
    long_sites: set = field(default_factory=set)
    tier_by_site: dict = field(default_factory=dict)   # site -> young units
    site_lifetimes: dict = field(default_factory=dict)  # site -> [delta]
    # (site, path_label) -> [delta]; populated for the mixed kind
    context_lifetimes: dict = field(default_factory=dict)
    shared_site: int = None
    long_bytes: int = 0


class _TraceBuilder:
    def __init__(self):
        self.methods = []          # (mid, package, signature)
        self.edges = []
        self.sites = []            # (src, mid, line)
        self.lines = []
        self.clock = 0
        self.allocs = 0
        self._next_method = 1
        self._next_site = 1

    def method(self, package, signature):
        mid = self._next_method
        self._next_method += 1
        self.methods.append((mid, package, signature))
        return mid

    def edge(self, caller, callee):
        self.edges.append((caller, callee))

    def site(self, mid, line):
        src = self._next_site
        self._next_site += 1
        self.sites.append((src, mid, line))
        return src

    def call(self, thread, mid):
        self.lines.append(f"C {thread} {mid}")

    def ret(self, thread, mid):
        self.lines.append(f"R {thread} {mid}")

    def alloc(self, thread, src, size, death):
        self.lines.append(f"A {thread} {src} {size} {death}")
        self.clock += size
        self.allocs += 1
        return self.allocs - 1     # object ordinal

    def lock(self, thread, ordinal):
        self.lines.append(f"L {thread} {ordinal}")

    @property
    def event_lines(self):
        return len(self.lines)

    def text(self):
        out = []
        for mid, package, signature in self.methods:
            out.append(f"M {mid} {package} {signature}")
        for caller, callee in self.edges:
            out.append(f"E {caller} {callee}")
        for src, mid, line in self.sites:
            out.append(f"S {src} {mid} {line}")
        out.extend(self.lines)
        return "\n".join(out) + "\n"


def _collision_free(signatures):
    """Deterministically salt signatures until their 16-bit hashes and
    derived site hashes are collision free within this corpus."""
    for salt in range(64):
        if salt == 0:
            candidate = list(signatures)
        else:
            candidate = [s.replace("(", f"_v{salt}(") for s in signatures]
        hashes = [method_hash(s) for s in candidate]
        site_hashes = [site_id(s, line) for s in candidate
                       for line in (10, 20, 30, 40)]
        if len(set(hashes)) == len(hashes) and \
                len(set(site_hashes)) == len(site_hashes):
            return candidate
    raise ConfigError("could not find a collision-free method naming")


class _Path:
    """A call path ending in an allocating method with one site."""

    __slots__ = ("methods", "site", "label")

    def __init__(self, methods, site, label):
        self.methods = methods     # method ids, outermost first
        self.site = site
        self.label = label


def _size(rng, mean):
    s = int(rng.gauss(mean, 0.35 * mean))
    return max(256, s)


def _build_program(builder, groups):
    """groups: list of (package, driver_name, [(leaf_name, label)]).

    Each leaf gets its own driver->helper->leaf chain and one site;
    returns {label: _Path}.  Also declares a few allocation-free getters
    that the analyzer must prune.
    """
    names = []
    for package, driver, leaves in groups:
        names.append(f"{package}.{driver}.run()")
        for leaf, _label in leaves:
            names.append(f"{package}.{leaf}.fill()")
    names = _collision_free(names)

    paths = {}
    idx = 0
    for package, driver, leaves in groups:
        driver_id = builder.method(package, names[idx])
        idx += 1
        for leaf, label in leaves:
            leaf_id = builder.method(package, names[idx])
            idx += 1
            builder.edge(driver_id, leaf_id)
            src = builder.site(leaf_id, 10)
            paths[label] = _Path((driver_id, leaf_id), src, label)

    # Allocation-free utility methods: distance is infinite, so a correct
    # plan never profiles them.
    for g in ("lib.util.Size.get()", "lib.util.Flags.is_set()"):
        builder.method("lib.util", g)
    return paths


def _emit_block(builder, thread, path, sizes, deltas, young_unit,
                oracle, context_label=None):
    for mid in path.methods:
        builder.call(thread, mid)
    ordinals = []
    for size, delta in zip(sizes, deltas):
        death = builder.clock + max(1, int(delta * young_unit))
        ordinals.append(builder.alloc(thread, path.site, size, death))
        oracle.alloc_count += 1
        oracle.total_bytes += size
        oracle.site_lifetimes.setdefault(path.site, []).append(delta)
        if context_label is not None:
            oracle.context_lifetimes.setdefault(
                (path.site, context_label), []).append(delta)
    for mid in reversed(path.methods):
        builder.ret(thread, mid)
    return ordinals


# -- generational ------------------------------------------------------------

# Bulk deaths well inside one young turnover; a sliver of mid-lived
# objects exercises survivor accounting without shifting the threshold.
GEN_FAST_DELTA = (0.002, 0.05)
GEN_MID_DELTA = (1.2, 2.5)
GEN_MID_PROB = 0.01
GEN_LOCK_PROB = 0.003


def _generate_generational(spec, builder, rng, oracle):
    leaves = [(f"Step{i}", f"short{i}") for i in range(12)]
    mid_leaves = [("Retained0", "mid0"), ("Retained1", "mid1")]
    paths = _build_program(builder, [
        ("app.core", "Driver", leaves[:6]),
        ("app.data", "Loader", leaves[6:] + mid_leaves),
    ])
    short_paths = [paths[f"short{i}"] for i in range(12)]
    mid_paths = [paths["mid0"], paths["mid1"]]

    while builder.event_lines < spec.event_count:
        thread = rng.randrange(spec.threads)
        if rng.random() < GEN_MID_PROB:
            path = rng.choice(mid_paths)
            deltas = [rng.uniform(*GEN_MID_DELTA)
                      for _ in range(ALLOCS_PER_BLOCK)]
        else:
            path = rng.choice(short_paths)
            deltas = [rng.uniform(*GEN_FAST_DELTA)
                      for _ in range(ALLOCS_PER_BLOCK)]
        sizes = [_size(rng, spec.mean_size_short)
                 for _ in range(ALLOCS_PER_BLOCK)]
        ordinals = _emit_block(builder, thread, path, sizes, deltas,
                               spec.young_unit, oracle)
        if rng.random() < GEN_LOCK_PROB:
            builder.lock(thread, rng.choice(ordinals))


# -- cache -------------------------------------------------------------------

CACHE_FAST_DELTA = (0.002, 0.03)
# Mid-lived band just past one young turnover: keeps the adaptive
# tenuring threshold informative after the long cohorts are pretenured.
CACHE_MID_DELTA = (1.8, 3.0)
CACHE_MID_SITE_SHARE = 0.24    # share of short blocks on mixed-band sites
CACHE_MID_PROB = 0.14          # per-alloc band probability on those sites
CACHE_TIER_JITTER = (0.8, 1.25)
CACHE_LOCK_PROB = 0.002
CACHE_SHORT_SITES = 64
CACHE_MID_SITES = 8


def _generate_cache(spec, builder, rng, oracle):
    n_short = CACHE_SHORT_SITES
    n_mid = CACHE_MID_SITES
    total_plain = n_short + n_mid
    # long_lived_site_fraction of all sites allocate the long-lived cohort
    frac = spec.long_lived_site_fraction
    if spec.long_lived_fraction == 0 or frac == 0:
        n_long = 0
    else:
        n_long = max(1, round(total_plain * frac / (1 - frac)))

    groups = [
        ("app.core", "Driver",
         [(f"Scratch{i}", f"short{i}") for i in range(n_short)]),
        ("app.data", "Loader",
         [(f"Buffer{i}", f"mid{i}") for i in range(n_mid)]),
    ]
    if n_long:
        groups.append(
            ("app.cache", "Store",
             [(f"Entry{i}", f"long{i}") for i in range(n_long)]))
    paths = _build_program(builder, groups)

    short_paths = [paths[f"short{i}"] for i in range(n_short)]
    mid_paths = [paths[f"mid{i}"] for i in range(n_mid)]
    long_paths = [paths[f"long{i}"] for i in range(n_long)]

    # Tier arrival weights proportional to 1/tier equalize standing bytes
    # per tier.
    tiers = list(spec.tiers)
    long_weights = []
    for i, path in enumerate(long_paths):
        tier = tiers[i % len(tiers)]
        oracle.long_sites.add(path.site)
        oracle.tier_by_site[path.site] = tier
        long_weights.append(1.0 / tier)
    wsum = sum(long_weights) or 1.0
    long_weights = [w / wsum for w in long_weights]

    while builder.event_lines < spec.event_count:
        thread = rng.randrange(spec.threads)
        sizes = None
        if long_paths and rng.random() < spec.long_lived_fraction:
            path = rng.choices(long_paths, weights=long_weights)[0]
            tier = oracle.tier_by_site[path.site]
            deltas = [tier * rng.uniform(*CACHE_TIER_JITTER)
                      for _ in range(ALLOCS_PER_BLOCK)]
            sizes = [_size(rng, spec.mean_size_long)
                     for _ in range(ALLOCS_PER_BLOCK)]
            for s in sizes:
                oracle.long_bytes += s
        elif rng.random() < CACHE_MID_SITE_SHARE:
            path = rng.choice(mid_paths)
            deltas = [rng.uniform(*CACHE_MID_DELTA)
                      if rng.random() < CACHE_MID_PROB
                      else rng.uniform(*CACHE_FAST_DELTA)
                      for _ in range(ALLOCS_PER_BLOCK)]
        else:
            path = rng.choice(short_paths)
            deltas = [rng.uniform(*CACHE_FAST_DELTA)
                      for _ in range(ALLOCS_PER_BLOCK)]
        if sizes is None:
            sizes = [_size(rng, spec.mean_size_short)
                     for _ in range(ALLOCS_PER_BLOCK)]
        ordinals = _emit_block(builder, thread, path, sizes, deltas,
                               spec.young_unit, oracle)
        if rng.random() < CACHE_LOCK_PROB:
            builder.lock(thread, rng.choice(ordinals))


# -- mixed -------------------------------------------------------------------

MIXED_SHARED_SHARE = 0.25      # share of blocks hitting the shared site
MIXED_LONG_TIER = 8.0
MIXED_FAST_DELTA = (0.002, 0.05)


def _generate_mixed(spec, builder, rng, oracle):
    background = [(f"Scratch{i}", f"short{i}") for i in range(10)]
    names = _collision_free(
        [f"app.core.{d}.run()" for d in ("Driver", "Ingest", "Serve")]
        + [f"app.core.{leaf}.fill()" for leaf, _ in background]
        + ["app.data.Slab.make()"])

    driver = builder.method("app.core", names[0])
    ingest = builder.method("app.core", names[1])
    serve = builder.method("app.core", names[2])
    short_paths = []
    for i, (leaf, label) in enumerate(background):
        leaf_id = builder.method("app.core", names[3 + i])
        builder.edge(driver, leaf_id)
        src = builder.site(leaf_id, 10)
        short_paths.append(_Path((driver, leaf_id), src, label))
    slab = builder.method("app.data", names[-1])
    builder.edge(driver, ingest)
    builder.edge(driver, serve)
    builder.edge(ingest, slab)
    builder.edge(serve, slab)
    shared = builder.site(slab, 20)
    oracle.shared_site = shared
    path_long = _Path((driver, ingest, slab), shared, "via_ingest")
    path_short = _Path((driver, serve, slab), shared, "via_serve")
    builder.method("lib.util", "lib.util.Size.get()")

    while builder.event_lines < spec.event_count:
        thread = rng.randrange(spec.threads)
        sizes = [_size(rng, spec.mean_size_short)
                 for _ in range(ALLOCS_PER_BLOCK)]
        if rng.random() < MIXED_SHARED_SHARE:
            if rng.random() < 0.5:
                path, label = path_long, "via_ingest"
                deltas = [MIXED_LONG_TIER * rng.uniform(0.9, 1.1)
                          for _ in range(ALLOCS_PER_BLOCK)]
            else:
                path, label = path_short, "via_serve"
                deltas = [rng.uniform(*MIXED_FAST_DELTA)
                          for _ in range(ALLOCS_PER_BLOCK)]
            _emit_block(builder, thread, path, sizes, deltas,
                        spec.young_unit, oracle, context_label=label)
        else:
            path = rng.choice(short_paths)
            deltas = [rng.uniform(*MIXED_FAST_DELTA)
                      for _ in range(ALLOCS_PER_BLOCK)]
            _emit_block(builder, thread, path, sizes, deltas,
                        spec.young_unit, oracle)


_GENERATORS = {
    "generational": _generate_generational,
    "cache": _generate_cache,
    "mixed": _generate_mixed,
}


def generate_synthetic(spec: SyntheticSpec):
    """Produce (trace_text, oracle) for a workload spec."""
    spec.validate()
    rng = random.Random(spec.seed)
    builder = _TraceBuilder()
    oracle = SynthOracle(kind=spec.kind, seed=spec.seed)
    _GENERATORS[spec.kind](spec, builder, rng, oracle)
    return builder.text(), oracle
