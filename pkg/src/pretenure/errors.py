"""Exception types shared across the simulator."""


class SimulatorError(Exception):
    """Base class for all simulator errors."""


class ConfigError(SimulatorError):
    """Invalid configuration rejected at startup."""


class TraceFormatError(SimulatorError):
    """Malformed or inconsistent trace input."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class UnsatisfiableAllocationError(SimulatorError):
    """Allocation request larger than the target generation itself."""
