"""Trace-driven N-generational heap simulator with online object-lifetime
profiling and dynamic pretenuring."""

from .config import SimConfig
from .engine import ReplayObserver, SimulationResult, replay
from .synth import SyntheticSpec, generate_synthetic
from .tracefile import parse_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "SimConfig",
    "ReplayObserver",
    "SimulationResult",
    "replay",
    "SyntheticSpec",
    "generate_synthetic",
    "parse_trace",
    "write_trace",
    "__version__",
]
