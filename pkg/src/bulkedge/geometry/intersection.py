"""Transversality diagnostics and intersection numbers.

The intersection number of an oriented boundary with a measurement set V
counts entrances into V: every truncated boundary path contributes
1_V(head end) - 1_V(start end), with the far-field memberships decided
symbolically from V's tail along the path's classified arm directions;
closed loops contribute nothing.  Two routes are computed and must agree:

* DIRECT - sum the contributions of all boundary curves of U, each
  oriented with U on the left;
* DECOMPOSED - split U into connected components, each component into the
  simple components of its complement interior, and sum with a sign flip.

Transversality (boundaries separating at a polynomial rate) is only ever
*diagnosed* on the finite window; the reports are labelled accordingly and
never claim the infinite-volume property.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .components import complement_components, connected_components
from .sets import DiscreteSet
from .tracing import BoundaryCurve, good_set_boundary

__all__ = [
    "TransversalityReport",
    "IntersectionReport",
    "boundary_d1_field",
    "psi_field",
    "psi_argmin",
    "transversality_profile",
    "curve_contribution",
    "intersection_number_simple",
    "intersection_number",
]

# stand-in for the distance to an empty boundary (scale-4)
FAR_AWAY = 4 * 10**6


def boundary_d1_field(curves: list[BoundaryCurve], half_width: int) -> np.ndarray:
    """4 * d1(x, boundary) for every window site x, exact integer arithmetic.

    Distances are to the traced part of the boundary; the tracing margin
    guarantees the untraced continuation is never closer to a window site.
    """
    L = half_width
    n = 2 * L + 1
    if not curves:
        return np.full((n, n), FAR_AWAY, dtype=np.int64)
    segs = np.concatenate([c.segments() for c in curves], axis=0)
    p, q = segs[:, 0, :], segs[:, 1, :]
    lo = np.minimum(p, q)[None, :, :]
    hi = np.maximum(p, q)[None, :, :]
    xs = 4 * np.arange(-L, L + 1, dtype=np.int64)
    x1, x2 = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([x1.ravel(), x2.ravel()], axis=1)[:, None, :]
    d = np.maximum(lo - pts, 0) + np.maximum(pts - hi, 0)      # per-axis gap
    return d.sum(axis=2).min(axis=1).reshape(n, n)


def psi_field(U: DiscreteSet, V: DiscreteSet,
              curves_U: list[BoundaryCurve] | None = None,
              curves_V: list[BoundaryCurve] | None = None) -> np.ndarray:
    """4 * Psi_{U,V}(x) = 4 + 4 d1(x, dU) + 4 d1(x, dV) over the window."""
    cu = good_set_boundary(U) if curves_U is None else curves_U
    cv = good_set_boundary(V) if curves_V is None else curves_V
    L = min(U.half_width, V.half_width)
    return 4 + boundary_d1_field(cu, L) + boundary_d1_field(cv, L)


def psi_argmin(U: DiscreteSet, V: DiscreteSet, **kw) -> tuple[int, int]:
    """Window site minimizing Psi (first in row-major scan order)."""
    psi = psi_field(U, V, **kw)
    L = (psi.shape[0] - 1) // 2
    flat = int(np.argmin(psi))
    return (flat // psi.shape[1] - L, flat % psi.shape[1] - L)


@dataclass(frozen=True)
class TransversalityReport:
    """Finite-window transversality diagnostic; not a proof of Def-style
    transversality, which is an asymptotic statement."""

    requested_exponent: float
    verdict: bool
    exponent_estimate: float
    profile: tuple[tuple[float, float, float, float], ...]  # (r_lo, r_hi, min Psi, min ln-ratio)
    off_window: bool = False     # an unbounded boundary never entered the window


def transversality_profile(U: DiscreteSet, V: DiscreteSet, c: float,
                           **kw) -> TransversalityReport:
    """Check Psi(x) >= |x|^c for all window sites with |x| >= 1/c, and report
    per-dyadic-annulus minima of Psi and of ln Psi / ln |x|.

    If a set has an unbounded boundary (its tail has arms) that never enters
    the tracing block, the window saw nothing of the relevant geometry and
    the verdict is conservatively negative.
    """
    if not 0 < c < 1:
        raise ValueError("requested exponent must lie in (0, 1)")
    off = False
    for S, key in ((U, "curves_U"), (V, "curves_V")):
        curves = kw.get(key)
        if curves is None:
            curves = good_set_boundary(S)
            kw[key] = curves
        if S.tail.arm_directions() and not any(cc.kind == "PATH" for cc in curves):
            off = True
    if off:
        return TransversalityReport(c, False, 0.0, (), off_window=True)
    psi4 = psi_field(U, V, **kw)
    L = (psi4.shape[0] - 1) // 2
    xs = np.arange(-L, L + 1, dtype=float)
    x1, x2 = np.meshgrid(xs, xs, indexing="ij")
    r = np.hypot(x1, x2)
    psi = psi4 / 4.0

    sel = r >= 1.0 / c
    verdict = bool(np.all(psi[sel] >= r[sel] ** c)) if np.any(sel) else True

    ratio = np.full_like(psi, np.inf)
    far = r > 1.0
    ratio[far] = np.log(psi[far]) / np.log(r[far])
    estimate = float(np.min(ratio[r >= 2.0])) if np.any(r >= 2.0) else np.inf

    rows = []
    r_lo = 1.0
    while r_lo <= np.sqrt(2) * L:
        r_hi = 2 * r_lo
        ann = (r >= r_lo) & (r < r_hi)
        if np.any(ann):
            rows.append((r_lo, r_hi, float(psi[ann].min()), float(ratio[ann].min())))
        r_lo = r_hi
    return TransversalityReport(c, verdict, estimate, tuple(rows))


@dataclass(frozen=True)
class IntersectionReport:
    total: int
    per_curve: tuple[tuple[int, int], ...]   # (curve index, contribution)
    method: str                              # DIRECT | DECOMPOSED
    decomposed_total: int | None = None

    def __post_init__(self):
        if sum(c for _, c in self.per_curve) != self.total:
            raise ValueError("per-curve contributions do not sum to the total")


def curve_contribution(curve: BoundaryCurve, V: DiscreteSet) -> int:
    """Entrance count of one boundary curve into V: loops contribute 0,
    truncated paths 1_V(+inf end) - 1_V(-inf end) via V's tail."""
    if curve.kind == "LOOP":
        return 0
    start, head = curve.ends
    return (V.tail.ray_limit(head.point, head.direction)
            - V.tail.ray_limit(start.point, start.direction))


def intersection_number_simple(U: DiscreteSet, V: DiscreteSet) -> IntersectionReport:
    """Intersection number for a simple U (single boundary curve)."""
    curves = good_set_boundary(U)
    if len(curves) > 1:
        raise ValueError(f"set is not simple: boundary has {len(curves)} components")
    per = tuple((i, curve_contribution(c, V)) for i, c in enumerate(curves))
    return IntersectionReport(sum(x for _, x in per), per, "DIRECT")


def _chi_decomposed(U: DiscreteSet, V: DiscreteSet) -> int:
    """Split U into connected components, each into the simple components of
    its complement interior, and add up with the sign flip."""
    total = 0
    for comp in connected_components(U):
        inner = 0
        for cc in complement_components(comp.region):
            if cc.curves:
                inner += curve_contribution(cc.curves[0], V)
        total += -inner
    return total


def intersection_number(U: DiscreteSet, V: DiscreteSet) -> IntersectionReport:
    """Intersection number of a good pair, by both routes; they must agree."""
    curves = good_set_boundary(U)
    per = tuple((i, curve_contribution(c, V)) for i, c in enumerate(curves))
    direct = sum(x for _, x in per)
    decomposed = _chi_decomposed(U, V)
    if direct != decomposed:
        raise RuntimeError(
            f"intersection-number routes disagree: DIRECT={direct}, "
            f"DECOMPOSED={decomposed}")
    return IntersectionReport(direct, per, "DIRECT", decomposed_total=decomposed)
