"""Exact-arithmetic reachability for piecewise affine maps and perturbed machines.

The package decides perturbed-reachability questions with exact rational
arithmetic throughout: no floating point is used anywhere on a verdict path.
"""

from robustreach.errors import InputFormatError, ToolkitError
from robustreach.geometry import Box, Point, parse_rational, format_rational, sup_dist

__all__ = [
    "Box",
    "Point",
    "InputFormatError",
    "ToolkitError",
    "parse_rational",
    "format_rational",
    "sup_dist",
]

__version__ = "0.1.0"
