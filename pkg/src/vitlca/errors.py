"""Typed error taxonomy shared across the package.

Every malformed input maps to a distinct exception class so callers can
tell format problems from validation problems from solver events.
"""


class VitLcaError(Exception):
    """Base class for all library errors."""


class FormatError(VitLcaError):
    """Byte-level problem in a container file: bad magic, bad version,
    truncated payload, or a count that disagrees with the payload length."""


class ValidationError(VitLcaError):
    """Well-formed bytes carrying invalid content: non-finite entries,
    out-of-range labels, dimension mismatches, bad parameter values."""


class ConfigError(VitLcaError):
    """Invalid run configuration; carries the offending field name."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DivergenceError(VitLcaError):
    """Neuron state became non-finite during encoding."""

    def __init__(self, step_index: int):
        super().__init__(f"non-finite neuron state at step {step_index}")
        self.step_index = step_index
