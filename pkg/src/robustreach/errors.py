"""Exception hierarchy shared by all modules.

ToolkitError covers every anticipated failure (bad input files, points
outside a system's domain, undefined map regions, malformed witnesses).
Anything else escaping the CLI is an internal invariant failure.
"""


class ToolkitError(Exception):
    """Base class for all anticipated errors raised by this package."""


class DimensionMismatchError(ToolkitError):
    """Operands of a geometric operation have different dimensions."""


class InputFormatError(ToolkitError):
    """A file or literal does not follow the documented format."""
