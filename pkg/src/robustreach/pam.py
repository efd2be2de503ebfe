"""Piecewise affine maps with exact rational coefficients.

A system is a finite list of affine pieces f_i(x) = A_i x + b_i, each
attached to a closed box region inside a common box domain. Regions may
share faces but never interior points, and the piece order is part of
the system: a boundary point belonging to several regions is evaluated
by the lowest-index piece. Evaluation is exact; the declared Lipschitz
bound is the induced sup-norm operator norm, i.e. the largest absolute
row sum over all pieces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Protocol, runtime_checkable

from robustreach.errors import DimensionMismatchError, InputFormatError, ToolkitError
from robustreach.geometry import Box, Point


class PamError(ToolkitError):
    """Base class for evaluation failures of a piecewise affine system."""


class OutsideDomainError(PamError):
    """The queried point is not in the system's domain box."""


class UndefinedRegionError(PamError):
    """The queried point lies in the domain but in no piece's region."""


class EscapesDomainError(PamError):
    """The image of the queried point falls outside the domain box."""


@dataclass(frozen=True)
class AffinePiece:
    """One affine piece x -> matrix @ x + offset on a closed box region."""

    region: Box
    matrix: tuple[tuple[Fraction, ...], ...]
    offset: Point

    def __post_init__(self) -> None:
        d = self.region.dim
        if len(self.matrix) != d or any(len(row) != d for row in self.matrix):
            raise DimensionMismatchError(
                f"matrix must be {d}x{d} for a region of dimension {d}"
            )
        if self.offset.dim != d:
            raise DimensionMismatchError("offset dimension differs from region")

    def apply(self, x: Point) -> Point:
        """A x + b, exactly. The caller is responsible for region membership."""
        return Point(
            tuple(
                sum((a * v for a, v in zip(row, x.coords)), start=Fraction(0)) + b
                for row, b in zip(self.matrix, self.offset.coords)
            )
        )

    def row_sum_norm(self) -> Fraction:
        """Induced sup-norm of the matrix: max over rows of sum |entry|."""
        return max(
            sum((abs(a) for a in row), start=Fraction(0)) for row in self.matrix
        )

    def image_box(self, box: Box) -> Box:
        """Exact image bounding box of a sub-box of the region.

        Each output coordinate is an affine form; its extrema over a box
        are attained at corners, so per component the minimum takes the
        interval endpoint matching the sign of the coefficient.
        """
        if not self.region.contains_box(box):
            raise PamError("image_box requires a box inside the piece region")
        lo = []
        hi = []
        for row, b in zip(self.matrix, self.offset.coords):
            lo_acc = b
            hi_acc = b
            for a, u, v in zip(row, box.lo, box.hi):
                if a >= 0:
                    lo_acc += a * u
                    hi_acc += a * v
                else:
                    lo_acc += a * v
                    hi_acc += a * u
            lo.append(lo_acc)
            hi.append(hi_acc)
        return Box(Point(tuple(lo)), Point(tuple(hi)))


@dataclass(frozen=True)
class PamSystem:
    """A piecewise affine map on a box domain, evaluated exactly."""

    domain: Box
    pieces: tuple[AffinePiece, ...]

    def __post_init__(self) -> None:
        if not self.pieces:
            raise InputFormatError("a system needs at least one piece")
        for i, piece in enumerate(self.pieces):
            if piece.region.dim != self.domain.dim:
                raise DimensionMismatchError(f"piece {i} dimension differs")
            if not self.domain.contains_box(piece.region):
                raise InputFormatError(f"piece {i} region leaves the domain")
        for i in range(len(self.pieces)):
            for j in range(i + 1, len(self.pieces)):
                if self.pieces[i].region.interior_intersects(self.pieces[j].region):
                    raise InputFormatError(
                        f"pieces {i} and {j} overlap on an interior point"
                    )

    @property
    def dim(self) -> int:
        return self.domain.dim

    @cached_property
    def lipschitz(self) -> Fraction:
        """Declared Lipschitz bound: max row-sum norm over all pieces."""
        return max(piece.row_sum_norm() for piece in self.pieces)

    def piece_index_at(self, x: Point) -> int:
        """Lowest index of a piece whose region contains x, or -1."""
        for i, piece in enumerate(self.pieces):
            if piece.region.contains(x):
                return i
        return -1

    def eval_at(self, x: Point) -> Point:
        """Evaluate the map at x.

        Raises OutsideDomainError / UndefinedRegionError / EscapesDomainError
        when x is outside the domain, in no region, or mapped out of the
        domain respectively. Ties on shared region faces go to the
        lowest-index piece.
        """
        if not self.domain.contains(x):
            raise OutsideDomainError(f"point {x.coords} outside domain")
        idx = self.piece_index_at(x)
        if idx < 0:
            raise UndefinedRegionError(f"no piece covers {x.coords}")
        y = self.pieces[idx].apply(x)
        if not self.domain.contains(y):
            raise EscapesDomainError(
                f"image {y.coords} escapes the domain (system not closed)"
            )
        return y

    def eval_approx(self, x: Point, m: int) -> Point:
        """Evaluator interface; the exact image trivially meets every 2^-m bound."""
        return self.eval_at(x)


@runtime_checkable
class MapEvaluator(Protocol):
    """Finite-precision view of a Lipschitz map on a box domain.

    eval_approx(x, m) must return a point within sup distance 2^-m of the
    true image, and consecutive precisions must stay mutually consistent:
    sup_dist(f_m(x), f_n(x)) <= 2^-m + 2^-n.
    """

    domain: Box

    @property
    def lipschitz(self) -> Fraction: ...

    def eval_approx(self, x: Point, m: int) -> Point: ...


class RoundedEvaluator:
    """Dyadic rounding of an exact system, for exercising approximate modes.

    Rounds each coordinate of the exact image to the nearest multiple of
    2^-(m+1), which keeps the error at most 2^-(m+2) and therefore well
    inside both the per-call and the cross-precision contracts.
    """

    def __init__(self, system: PamSystem):
        self._system = system
        self.domain = system.domain

    @property
    def lipschitz(self) -> Fraction:
        return self._system.lipschitz

    def eval_approx(self, x: Point, m: int) -> Point:
        if m < 0:
            raise PamError(f"precision exponent must be >= 0, got {m}")
        exact = self._system.eval_at(x)
        step = Fraction(1, 1 << (m + 1))
        rounded = []
        for c in exact.coords:
            q = c / step
            # Round half up, deterministically.
            n = (q.numerator * 2 + q.denominator) // (q.denominator * 2)
            v = n * step
            # Keep rounded images inside the domain so grid clipping stays exact.
            rounded.append(v)
        y = Point(tuple(rounded))
        clipped = Point(
            tuple(
                min(max(v, lo), hi)
                for v, lo, hi in zip(y.coords, self.domain.lo, self.domain.hi)
            )
        )
        return clipped
