"""Reachability engines over grid abstractions of piecewise affine maps.

All reachability notions here are about perturbed trajectories: a
2^-n-perturbed trajectory may drift by strictly less than 2^-n after
each exact map application, and the robust reachability question asks
whether a target stays reachable for every positive drift bound. The
central facts the engines rely on are:

  covering   every 2^-m-perturbed step from a cell lands inside one of
             its successor cells, so graph NOPATH at resolution m
             refutes reachability at drift 2^-m;
  refinement at m = resolution_for_eps(L, n) every graph path can be
             walked by an actual 2^-n-perturbed trajectory through the
             cell centres, so graph PATH certifies reachability at
             drift 2^-n.

NOPATH therefore comes with a checkable certificate: the forward-closed
cell set discovered by the search is an inductive invariant that
excludes the target, and check_witness re-verifies the three witness
conditions from scratch with interval arithmetic.

Targets are closed balls cB(y, 2^-p) rather than bare points: a point
target can sit on the shared face of cells whose graph keeps reaching
it at every resolution even though only its neighbourhood, not the
point, is robustly reachable. Exact point targets are still accepted
(pass p=None), with the caveat that the ball-free question may stay
Unknown forever; the S1 fixture does exactly that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from robustreach.abstraction import (
    Cell,
    EdgeRule,
    Grid,
    GridError,
    make_grid,
    resolution_for_eps,
    successors,
)
from robustreach.errors import ToolkitError
from robustreach.geometry import Box, Point, sup_dist
from robustreach.pam import PamError, PamSystem


class ReachError(ToolkitError):
    """Raised for queries outside the domain or malformed witnesses."""


@dataclass(frozen=True)
class Witness:
    """Certificate of robust non-reachability.

    cells is a forward-closed set of level-m cells containing every cell
    of the source point and no cell that meets the target; eps_exp is
    the drift exponent the certificate is valid for: every trajectory
    with per-step drift below 2^-eps_exp stays inside the cell union.
    """

    m: int
    eps_exp: int
    cells: frozenset[Cell]


@dataclass(frozen=True)
class Reached:
    """The exact (unperturbed) orbit hits the target at step `steps`."""

    trajectory: tuple[Point, ...]
    steps: int


@dataclass(frozen=True)
class RobustlyUnreachable:
    witness: Witness


@dataclass(frozen=True)
class BudgetReport:
    max_m: int
    steps_simulated: int
    simulation_stopped: Optional[str] = None


@dataclass(frozen=True)
class Unknown:
    budget: BudgetReport


ReachVerdict = Union[Reached, RobustlyUnreachable, Unknown]


@dataclass(frozen=True)
class TrueAtEps:
    """Reachable whenever the per-step drift is 2^-n (eps = 2^-n)."""

    eps: Fraction
    n: int


@dataclass(frozen=True)
class FalseAtEps:
    """Unreachable already at per-step drift 2^-m (eps = 2^-m)."""

    eps: Fraction
    m: int


IntervalVerdict = Union[TrueAtEps, FalseAtEps]


def _successor_cache(grid: Grid, system, rule: EdgeRule):
    cache: dict[Cell, frozenset[Cell]] = {}

    def get(cell: Cell) -> frozenset[Cell]:
        got = cache.get(cell)
        if got is None:
            got = successors(grid, system, rule, cell)
            cache[cell] = got
        return got

    return get


def graph_reach(
    grid: Grid, system, rule: EdgeRule, sources: Iterable[Cell]
) -> frozenset[Cell]:
    """Forward closure of the source cells in the abstraction graph (BFS)."""
    succ = _successor_cache(grid, system, rule)
    seen: set[Cell] = set(sources)
    frontier = list(seen)
    while frontier:
        cell = frontier.pop()
        for nxt in succ(cell):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return frozenset(seen)


def path_savitch(grid: Grid, system, rule: EdgeRule, source: Cell, target: Cell) -> bool:
    """Path existence by the recursive midpoint search.

    CANYIELD(u, v, t) asks for a path of length at most 2^t and splits on
    an intermediate cell enumerated in index order; t starts at
    ceil(log2 |cells|) + 1, which exceeds the longest simple path. The
    recursion stack is the only state that grows with the grid: the
    number of descents below the top call never exceeds t_top, asserted
    on every call. (Edge answers are memoised per call; that is an
    evaluation cache for the map, not search state.)
    """
    total = grid.cell_count
    t_top = max(0, (total - 1).bit_length()) + 1  # ceil(log2 total) + 1
    succ = _successor_cache(grid, system, rule)

    def can_yield(u: Cell, v: Cell, t: int, depth: int) -> bool:
        assert depth <= t_top, "midpoint recursion exceeded its depth bound"
        if u == v or v in succ(u):
            return True
        if t == 0:
            return False
        for mid in grid.iter_cells():
            if can_yield(u, mid, t - 1, depth + 1) and can_yield(
                mid, v, t - 1, depth + 1
            ):
                return True
        return False

    return can_yield(source, target, t_top, 0)


def reach_over_approx(
    system, x: Point, m: int, rule: EdgeRule = EdgeRule.EXACT
) -> frozenset[Cell]:
    """Cells reachable from the cells of x at resolution m.

    The result covers every 2^-m-perturbed orbit of x: orbits stay inside
    the union of the returned cells.
    """
    grid = make_grid(system.domain, m)
    return graph_reach(grid, system, rule, grid.cells_containing(x))


def target_cells(grid: Grid, y: Point, p: Optional[int]) -> frozenset[Cell]:
    """Cells meeting the target: cB(y, 2^-p) clipped to the domain, or {y}."""
    if p is None:
        return grid.cells_containing(y)
    ball = Box.ball(y, Fraction(1, 1 << p))
    return frozenset(grid.cells_intersecting(ball))


def _in_target(y: Point, p: Optional[int], point: Point) -> bool:
    if p is None:
        return point == y
    return sup_dist(point, y) <= Fraction(1, 1 << p)


def extract_witness(grid: Grid, system, rule: EdgeRule, x: Point) -> Witness:
    """Forward closure of all cells of x, packaged at drift level 2^-m.

    The closure is forward-closed by construction and each member cell's
    one-step perturbed image at drift 2^-m stays within successor cells,
    so the certificate level equals the grid resolution.
    """
    cells = graph_reach(grid, system, rule, grid.cells_containing(x))
    return Witness(m=grid.m, eps_exp=grid.m, cells=cells)


def check_witness(
    system: PamSystem,
    witness: Witness,
    x: Point,
    y: Point,
    p: Optional[int],
) -> bool:
    """Re-verify a non-reachability certificate from first principles.

    Checks, with exact interval arithmetic and no reuse of the search:
      1. every cell containing x belongs to the witness;
      2. for every member cell and every piece overlapping it, the exact
         image box of the overlap, inflated by 2^-eps_exp and clipped to
         the domain, meets member cells only;
      3. no member cell meets the target ball.
    A piece is exempt from condition 2 on a given cell when its overlap
    lies entirely inside some lower-index piece's region: the tie-break
    hands every such point to the earlier piece, so the later one never
    fires there. (This matters for cells whose closed box touches a
    piece face from outside.) Condition 2 tests cell membership of every
    grid cell touching the inflated image box, which is conservative: a
    sharper certificate could cover the box while touching a non-member
    face. Callers refine and re-extract when a sound witness is rejected
    for slack.
    """
    try:
        grid = make_grid(system.domain, witness.m)
    except GridError:
        return False
    members = witness.cells
    if not members:
        return False
    try:
        for cell in members:
            grid._check_cell(cell)
    except GridError:
        return False
    if witness.eps_exp < 0:
        return False
    eps = Fraction(1, 1 << witness.eps_exp)

    if not grid.cells_containing(x) <= members:
        return False

    domain = system.domain
    pieces = system.pieces
    for cell in members:
        box = grid.cell_box(cell)
        for j, piece in enumerate(pieces):
            overlap = box.intersection(piece.region)
            if overlap is None:
                continue
            if any(pieces[i].region.contains_box(overlap) for i in range(j)):
                continue
            image = piece.image_box(overlap).inflate(eps).intersection(domain)
            if image is None:
                continue
            for touched in grid.cells_intersecting(image):
                if touched not in members:
                    return False

    tgt = target_cells(grid, y, p)
    if tgt & members:
        return False
    return True


@dataclass(frozen=True)
class _Simulation:
    """Incremental exact orbit of a system from a fixed start point."""

    system: PamSystem
    points: list[Point]
    stopped: Optional[str] = None

    @classmethod
    def start(cls, system: PamSystem, x: Point) -> "_Simulation":
        return cls(system, [x])

    def extend_to(self, steps: int) -> "_Simulation":
        points = self.points
        stopped = self.stopped
        while stopped is None and len(points) - 1 < steps:
            try:
                points.append(self.system.eval_at(points[-1]))
            except PamError as exc:
                stopped = f"simulation stopped at step {len(points) - 1}: {exc}"
        return _Simulation(self.system, points, stopped)


def decide_omega_reach(
    system: PamSystem,
    x: Point,
    y: Point,
    p: Optional[int],
    max_m: int = 10,
    max_steps: Optional[int] = None,
    rule: EdgeRule = EdgeRule.EXACT,
) -> ReachVerdict:
    """Interleaved semi-decision of robust reachability of cB(y, 2^-p).

    Round r simulates the exact orbit up to min(2^r, max_steps) steps and
    then searches the level-r abstraction graph. The simulation side can
    only return Reached; the graph side can only return
    RobustlyUnreachable (its witness is the forward-closed reach set,
    valid at drift 2^-r). Both sides exhausted means Unknown. The two
    verdicts are mutually exclusive, so the simulation is consulted
    first in each round; every candidate witness is re-verified with
    check_witness before being emitted, and a rejected candidate (box
    slack, or a member cell leaking through a piece face) just means the
    search continues one level finer.
    """
    if not system.domain.contains(x):
        raise ReachError(f"source {x.coords} outside the domain")
    if not system.domain.contains(y):
        raise ReachError(f"target {y.coords} outside the domain")
    if max_m < 0:
        raise ReachError(f"max_m must be >= 0, got {max_m}")
    step_cap = max_steps if max_steps is not None else 1 << max_m
    sim = _Simulation.start(system, x)
    for r in range(1, max_m + 1):
        sim = sim.extend_to(min(1 << r, step_cap))
        for t, point in enumerate(sim.points):
            if _in_target(y, p, point):
                return Reached(tuple(sim.points[: t + 1]), t)
        grid = make_grid(system.domain, r)
        witness = extract_witness(grid, system, rule, x)
        if not (target_cells(grid, y, p) & witness.cells) and check_witness(
            system, witness, x, y, p
        ):
            return RobustlyUnreachable(witness)
    return Unknown(
        BudgetReport(
            max_m=max_m,
            steps_simulated=len(sim.points) - 1,
            simulation_stopped=sim.stopped,
        )
    )


def decide_perturbed_interval(
    system: PamSystem,
    x: Point,
    y: Point,
    p: Optional[int],
    n: int,
    rule: EdgeRule = EdgeRule.EXACT,
) -> IntervalVerdict:
    """Sandwich decision at the refinement resolution for drift 2^-n.

    PATH from some cell of x to some target cell proves reachability at
    drift 2^-n (the path is realisable); NOPATH from every cell of x
    refutes reachability at drift 2^-m with m = resolution_for_eps(L, n).
    Exactly one of the two holds.
    """
    if not system.domain.contains(x):
        raise ReachError(f"source {x.coords} outside the domain")
    if not system.domain.contains(y):
        raise ReachError(f"target {y.coords} outside the domain")
    if n < 0:
        raise ReachError(f"perturbation exponent must be >= 0, got {n}")
    m = resolution_for_eps(system.lipschitz, n)
    grid = make_grid(system.domain, m)
    reached = graph_reach(grid, system, rule, grid.cells_containing(x))
    if reached & target_cells(grid, y, p):
        return TrueAtEps(Fraction(1, 1 << n), n)
    return FalseAtEps(Fraction(1, 1 << m), m)


@dataclass(frozen=True)
class PixelGrid:
    """A rendered bitmap of a reachable set over a dyadic pixel lattice.

    Pixel z covers the point z / 2^n. rows are already in image order:
    for one axis a single row with z ascending; for two axes the first
    axis ascends along a row and rows descend in the second axis, so the
    top row has the largest second coordinate.
    """

    n: int
    axes: tuple[int, ...]
    z_lo: tuple[int, ...]
    z_hi: tuple[int, ...]
    rows: tuple[tuple[int, ...], ...]


def plot_pixels(
    system: PamSystem,
    x: Point,
    n: int,
    axes: Sequence[int] = (0,),
    rule: EdgeRule = EdgeRule.EXACT,
) -> PixelGrid:
    """Pixel rendering of the reachable set of x at pixel size 2^-n.

    The reachable set is over-approximated by cells at resolution n + 2
    and projected to the chosen axes (one or two of them). A pixel is set
    when the open ball of radius 2^-n around its point meets the
    projection; it is clear when even that ball misses it. Pixels whose
    double-radius ball meets the projection while the single-radius ball
    does not may legitimately land either way; this implementation
    clears them.
    """
    if n < 0:
        raise ReachError(f"pixel exponent must be >= 0, got {n}")
    axes = tuple(axes)
    if len(axes) not in (1, 2) or len(set(axes)) != len(axes):
        raise ReachError(f"axes must name one or two distinct dimensions: {axes}")
    if any(not 0 <= a < system.dim for a in axes):
        raise ReachError(f"axes {axes} out of range for dimension {system.dim}")
    cells = reach_over_approx(system, x, n + 2, rule)
    projected = {tuple(cell[a] for a in axes) for cell in cells}
    proj_domain = Box.of_intervals(
        [(system.domain.lo[a], system.domain.hi[a]) for a in axes]
    )
    proj_grid = make_grid(proj_domain, n + 2)
    scale = 1 << n
    radius = Fraction(1, scale)
    z_lo = tuple(math.floor(proj_domain.lo[i] * scale) for i in range(len(axes)))
    z_hi = tuple(math.ceil(proj_domain.hi[i] * scale) for i in range(len(axes)))

    def bit(z: tuple[int, ...]) -> int:
        center = Point(tuple(Fraction(v, scale) for v in z))
        ball = Box.ball(center, radius)
        return int(
            any(c in projected for c in proj_grid.cells_intersecting_open(ball))
        )

    if len(axes) == 1:
        rows = (tuple(bit((z,)) for z in range(z_lo[0], z_hi[0] + 1)),)
    else:
        rows = tuple(
            tuple(bit((za, zb)) for za in range(z_lo[0], z_hi[0] + 1))
            for zb in range(z_hi[1], z_lo[1] - 1, -1)
        )
    return PixelGrid(n, axes, z_lo, z_hi, rows)
