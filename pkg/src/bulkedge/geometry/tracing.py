"""Boundary tracing for good sets on the quarter-integer lattice.

The boundary of a good set is a disjoint union of simple axis-aligned
polylines whose vertices are the odd pairs of scale-4 coordinates (the
lattice (1/4,1/4) + (Z/2)^2 scaled by 4).  Every boundary vertex has
exactly two neighbors along the boundary, so tracing is a deterministic
walk over the edges separating inside cells from outside cells.

Curves are returned oriented with the set on the left of the traversal:
for each segment, the adjacent cell on the left of the walking direction
is inside the good set and the right cell is outside.  Truncated curves
(those leaving the tracing block) are PATHs carrying a far-field
classification at both ends: the endpoint and the primitive direction of
the tail boundary arm the curve continues along.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sets import DiscreteSet
from .tails import EndClassificationError

__all__ = [
    "QuarterPoint",
    "CurveEnd",
    "BoundaryCurve",
    "TracingError",
    "good_set_boundary",
    "orient_with_set_on_left",
    "TRACE_MARGIN",
]

# tracing block extends this many lattice units beyond the set's window;
# at the block rim the membership grid already agrees with the tail
TRACE_MARGIN = 2

_DIRS = ((0, 1), (1, 0), (0, -1), (-1, 0))


class TracingError(RuntimeError):
    """Violation of the exactly-two-neighbors law at an interior boundary
    vertex; impossible for genuine good sets, so it signals a tracer bug."""


@dataclass(frozen=True)
class QuarterPoint:
    """Point (qx/4, qy/4) with qx, qy odd (a boundary-lattice vertex)."""

    qx: int
    qy: int

    def __post_init__(self):
        if self.qx % 2 == 0 or self.qy % 2 == 0:
            raise ValueError("boundary vertices have odd scale-4 coordinates")

    @property
    def xy(self) -> tuple[float, float]:
        return (self.qx / 4.0, self.qy / 4.0)


@dataclass(frozen=True)
class CurveEnd:
    """Truncated path end: exit vertex plus the outward primitive direction
    of the tail arm the curve follows to infinity."""

    point: tuple[int, int]
    direction: tuple[int, int]


@dataclass(frozen=True)
class BoundaryCurve:
    """Oriented polyline on the quarter lattice; `points` is (k, 2) scale-4
    integer vertices in traversal order (loops do not repeat the closure)."""

    points: np.ndarray
    kind: str                       # "LOOP" | "PATH"
    ends: tuple[CurveEnd, CurveEnd] | None = None

    def __post_init__(self):
        if self.kind not in ("LOOP", "PATH"):
            raise ValueError(f"bad curve kind {self.kind}")
        if (self.kind == "PATH") != (self.ends is not None):
            raise ValueError("exactly the truncated paths carry end data")
        if np.any(self.points % 2 == 0):
            raise ValueError("curve vertices must be odd scale-4 pairs")

    def __len__(self) -> int:
        return len(self.points)

    def segments(self) -> np.ndarray:
        """(n, 2, 2) array of consecutive vertex pairs (loops wrap around)."""
        pts = self.points
        if self.kind == "LOOP":
            nxt = np.roll(pts, -1, axis=0)
        else:
            nxt = pts[1:]
            pts = pts[:-1]
        return np.stack([pts, nxt], axis=1)

    def reversed(self) -> "BoundaryCurve":
        ends = None if self.ends is None else (self.ends[1], self.ends[0])
        return BoundaryCurve(self.points[::-1].copy(), self.kind, ends)


def _boundary_edges(cells: np.ndarray, A: int):
    """Midpoints of edges separating inside from outside cells (scale-4)."""
    edges = set()
    dv = cells[:-1, :] != cells[1:, :]
    for ia, ib in np.argwhere(dv):
        edges.add((2 * (ia - A) + 1, 2 * (ib - A)))        # vertical edge
    dh = cells[:, :-1] != cells[:, 1:]
    for ia, ib in np.argwhere(dh):
        edges.add((2 * (ia - A), 2 * (ib - A) + 1))        # horizontal edge
    return edges


def _walk(start, first_dir, edges, visited, interior_limit):
    """Walk from `start` along boundary edges until a dead end or closure.

    Removes used edges from `visited`-tracking and enforces the two-neighbor
    law at interior vertices.
    """
    pts = [start]
    v = start
    d = first_dir
    while True:
        visited.add((v[0] + d[0], v[1] + d[1]))
        v = (v[0] + 2 * d[0], v[1] + 2 * d[1])
        pts.append(v)
        if v == start:
            return pts[:-1], True
        back = (-d[0], -d[1])
        options = [nd for nd in _DIRS
                   if nd != back
                   and (v[0] + nd[0], v[1] + nd[1]) in edges]
        interior = abs(v[0]) <= interior_limit and abs(v[1]) <= interior_limit
        if interior and len(options) != 1:
            raise TracingError(
                f"vertex ({v[0]}/4, {v[1]}/4) has {len(options) + 1} neighbors")
        if not options:
            return pts, False
        d = options[0]


def _left_cell_index(p, q, A):
    """Cell-grid index of the cell on the left of segment p -> q."""
    mx, my = (p[0] + q[0]) // 2, (p[1] + q[1]) // 2
    ux, uy = (q[0] - p[0]) // 2, (q[1] - p[1]) // 2
    cx, cy = mx - uy, my + ux          # midpoint + 90-degree-left offset
    return (cx // 2 + A, cy // 2 + A)


def _classify_end(point, step_away, tail):
    """Pick the tail arm the curve continues along at a truncated end.

    `step_away` is the local outgoing step (used only as a sanity check:
    a staircase step never points against its arm's net direction).
    """
    arms = tail.arm_directions()
    if not arms:
        raise EndClassificationError("tail has no unbounded boundary arms")
    dots = sorted(((point[0] * d[0] + point[1] * d[1], d) for d in arms),
                  reverse=True)
    if dots[0][0] <= 0 or (len(dots) > 1 and dots[0][0] == dots[1][0]):
        raise EndClassificationError(
            f"ambiguous far-field arm at exit vertex ({point[0]}/4, {point[1]}/4)")
    d = dots[0][1]
    if step_away is not None and d[0] * step_away[0] + d[1] * step_away[1] < 0:
        raise TracingError("exit step points against the matched tail arm")
    return CurveEnd(point, d)


def good_set_boundary(A: DiscreteSet, margin: int = TRACE_MARGIN) -> list[BoundaryCurve]:
    """All connected components of the good-set boundary of A, oriented with
    A on the left; fully interior components are LOOPs, truncated ones PATHs
    with classified far-field ends."""
    T = A.half_width + margin
    Ablk = 2 * T + 1
    cells = A.cell_interior_grid(T)
    edges = _boundary_edges(cells, Ablk)
    interior_limit = 2 * Ablk - 1

    degree: dict[tuple[int, int], int] = {}
    for (mx, my) in edges:
        if mx % 2:                      # vertical edge: endpoints above/below
            vs = ((mx, my - 1), (mx, my + 1))
        else:
            vs = ((mx - 1, my), (mx + 1, my))
        for v in vs:
            degree[v] = degree.get(v, 0) + 1

    for v, deg in degree.items():
        if abs(v[0]) <= interior_limit and abs(v[1]) <= interior_limit and deg not in (0, 2):
            raise TracingError(f"vertex ({v[0]}/4, {v[1]}/4) has {deg} neighbors")

    visited: set[tuple[int, int]] = set()
    curves: list[BoundaryCurve] = []

    def options_at(v):
        return [d for d in _DIRS
                if (v[0] + d[0], v[1] + d[1]) in edges
                and (v[0] + d[0], v[1] + d[1]) not in visited]

    # truncated paths first, from the lexicographically smallest cut vertex
    for v in sorted(vv for vv, deg in degree.items() if deg == 1):
        opts = options_at(v)
        if not opts:
            continue
        pts, closed = _walk(v, opts[0], edges, visited, interior_limit)
        assert not closed
        curve = _orient(np.array(pts, dtype=np.int64), "PATH", cells, Ablk, A)
        curves.append(curve)

    # remaining edges belong to loops
    for mid in sorted(edges - visited):
        if mid in visited:
            continue
        if mid[0] % 2:
            v = (mid[0], mid[1] - 1)
        else:
            v = (mid[0] - 1, mid[1])
        opts = options_at(v)
        if not opts:
            continue
        pts, closed = _walk(v, opts[0], edges, visited, interior_limit)
        if not closed:
            raise TracingError("open walk among loop edges")
        curve = _orient(np.array(pts, dtype=np.int64), "LOOP", cells, Ablk, A)
        curves.append(curve)

    return curves


def _orient(pts: np.ndarray, kind: str, cells: np.ndarray, A: int,
            dset: DiscreteSet) -> BoundaryCurve:
    """Orient so the set is on the left, canonicalize the start, attach end
    classification for paths."""
    left = _left_cell_index(tuple(pts[0]), tuple(pts[1]), A)
    if not cells[left]:
        pts = pts[::-1].copy()
        left = _left_cell_index(tuple(pts[0]), tuple(pts[1]), A)
        if not cells[left]:
            raise TracingError("segment with the set on neither side")

    # full orientation law check, vectorized over all segments
    nxt = np.roll(pts, -1, axis=0) if kind == "LOOP" else pts[1:]
    cur = pts if kind == "LOOP" else pts[:-1]
    mid = (cur + nxt) // 2
    u = (nxt - cur) // 2
    lc = mid + np.stack([-u[:, 1], u[:, 0]], axis=1)
    rc = mid - np.stack([-u[:, 1], u[:, 0]], axis=1)
    lv = cells[lc[:, 0] // 2 + A, lc[:, 1] // 2 + A]
    rv = cells[rc[:, 0] // 2 + A, rc[:, 1] // 2 + A]
    if not (np.all(lv) and not np.any(rv)):
        raise TracingError("inconsistent left-of-curve orientation along a curve")

    if kind == "LOOP":
        k = int(np.lexsort((pts[:, 1], pts[:, 0]))[0])
        pts = np.roll(pts, -k, axis=0)
        return BoundaryCurve(pts, "LOOP")

    def as_ints(p):
        return (int(p[0]), int(p[1]))

    start_end = _classify_end(as_ints(pts[0]), as_ints(pts[0] - pts[1]), dset.tail)
    head_end = _classify_end(as_ints(pts[-1]), as_ints(pts[-1] - pts[-2]), dset.tail)
    return BoundaryCurve(pts, "PATH", (start_end, head_end))


def orient_with_set_on_left(curve: BoundaryCurve, A: DiscreteSet) -> BoundaryCurve:
    """Return the traversal of `curve` with A on its left (possibly reversed).

    The per-segment law is: the point midpoint + (1/8)*(left normal) lies in
    the good set of A and the right counterpart does not; testing at the
    adjacent cell centers (offset 1/4) is equivalent since the offsets stay
    inside the same cells.
    """
    p, q = curve.points[0], curve.points[1]
    mid = (p + q) // 2
    u = (q - p) // 2
    lc = mid + np.array([-u[1], u[0]])
    if A.good_contains_point(int(lc[0]), int(lc[1])):
        oriented = curve
    else:
        oriented = curve.reversed()
    for k in (0, max(0, (len(oriented.points) - 2) // 2)):
        pp, qq = oriented.points[k], oriented.points[k + 1]
        m = (pp + qq) // 2
        uu = (qq - pp) // 2
        good = A.good_contains_point(int(m[0] - uu[1]), int(m[1] + uu[0]))
        bad = A.good_contains_point(int(m[0] + uu[1]), int(m[1] - uu[0]))
        if not good or bad:
            raise TracingError("left-of-curve test inconsistent along the curve")
    return oriented
