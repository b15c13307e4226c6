"""Simulator configuration.

One flat config object covers the heap geometry, the profiling table, the
pretenuring policy, and the static analyzer.  Defaults are desk-scale: a
32 MB young generation plus four 64 MB older generations keeps full runs
under a minute while preserving the relative cost structure of a much
larger heap.

The two policy thresholds are stored as exact fractions so that the
promoted/allocated ratio comparison has no float tie ambiguity: a ratio of
exactly the threshold never triggers (strictly-greater semantics).
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from fractions import Fraction

from .errors import ConfigError

MIB = 1024 * 1024

# Sentinel threshold: a context-expansion bound of 1 can never be exceeded
# by a ratio band capped below it, which disables expansion entirely.
EXPANSION_DISABLED = Fraction(1)


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # Go through the decimal literal so 0.6 means 3/5, not the binary
        # float; exactness of the policy comparison depends on this.
        return Fraction(str(value))
    return Fraction(value)


@dataclass
class SimConfig:
    # Heap geometry
    num_generations: int = 4            # older generations; young is extra
    young_capacity: int = 32 * MIB
    gen_capacity: int = 64 * MIB
    survivor_capacity: int = 4 * MIB
    max_tenuring_threshold: int = 15
    target_survivor_fraction: float = 0.5

    # Pause model (modeled milliseconds per byte)
    scan_cost: float = 1e-6
    copy_cost: float = 5e-6

    # Lifetime table / policy
    n: int = 16                          # lifetime array length per entry
    inc_gen_freq: int = 4                # run policy every N-th collection
    inc_gen_thres: Fraction = Fraction(3, 5)
    expand_ctx: Fraction = Fraction(2, 5)

    # Static analyzer / instrumentation
    max_alloc_frame: int = 8
    hot_threshold: int = 100
    packages: tuple = ()

    # Engine
    workers: int = 4
    seed: int = 0

    # Initial fraction of collections excluded from pause statistics,
    # the usual steady-state measurement discipline (work totals still
    # cover the whole run).
    warmup_fraction: float = 1 / 6

    def __post_init__(self):
        self.inc_gen_thres = _as_fraction(self.inc_gen_thres)
        self.expand_ctx = _as_fraction(self.expand_ctx)
        self.packages = tuple(self.packages)
        self.validate()

    def validate(self):
        if self.num_generations < 1:
            raise ConfigError("need at least one older generation")
        for name in ("young_capacity", "gen_capacity", "survivor_capacity"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 1 <= self.max_tenuring_threshold <= 15:
            raise ConfigError("max_tenuring_threshold must be in [1, 15]")
        if not 0.0 < self.target_survivor_fraction <= 1.0:
            raise ConfigError("target_survivor_fraction must be in (0, 1]")
        if self.n < 2:
            raise ConfigError("lifetime array length n must be at least 2")
        if self.inc_gen_freq < 1:
            raise ConfigError("inc_gen_freq must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.max_alloc_frame < 0:
            raise ConfigError("max_alloc_frame must be >= 0")
        if self.hot_threshold < 0:
            raise ConfigError("hot_threshold must be >= 0")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ConfigError("warmup_fraction must be in [0, 1)")
        self._validate_thresholds()

    def _validate_thresholds(self):
        inc, exp = self.inc_gen_thres, self.expand_ctx
        if not 0 < inc < 1:
            raise ConfigError(
                f"inc_gen_thres must satisfy 0 < t < 1, got {inc}")
        if exp == EXPANSION_DISABLED:
            return  # expansion explicitly disabled
        if not 0 < exp < inc:
            raise ConfigError(
                "thresholds must satisfy 0 < expand_ctx < inc_gen_thres < 1 "
                f"(or expand_ctx == 1 to disable expansion), got "
                f"expand_ctx={exp}, inc_gen_thres={inc}")

    def echo(self) -> dict:
        """Config as a JSON-ready dict; part of every report."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Fraction):
                v = str(v)
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out


# Accepted on the CLI and in config files as an alias for inc_gen_freq.
INC_GEN_FREQ_ALIAS = "ng2c_inc_gen_freq"
