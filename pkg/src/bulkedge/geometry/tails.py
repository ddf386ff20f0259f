"""Parametric far-field models for subsets of Z^2.

A discrete set is stored as a finite membership grid plus a *tail*: a
closed-form predicate that decides membership for every site outside the
grid window.  Only a small family of tails is supported (empty, full,
half-plane, quadrant, vertical strip); this family is closed under
complement (the quadrant picks up a `negated` flag) and is rich enough to
express every scene used by the conductance pipeline.

All exact geometry works in quarter-integer coordinates scaled by 4, so a
continuum point (x, y) is the integer pair (4x, 4y).  Boundary vertices of
the associated continuum "good" sets live on the lattice of odd pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tail",
    "Empty",
    "Full",
    "HalfPlane",
    "Quadrant",
    "VStrip",
    "EndClassificationError",
    "parse_tail",
]


class EndClassificationError(ValueError):
    """A truncated boundary path has an end whose far-field membership in the
    measurement set cannot be decided from the tail data."""


def _sign_limit(coeff: int, offset: int, margin: int) -> int:
    """Limit of the predicate (coeff*t + offset > 0) as t -> +infinity.

    `offset` is in scale-4 units; decidable at coeff == 0 only when the
    offset clears `margin` (also scale-4).
    """
    if coeff > 0:
        return 1
    if coeff < 0:
        return 0
    if offset >= margin:
        return 1
    if offset <= -margin:
        return 0
    raise EndClassificationError(
        f"ray runs parallel to a tail boundary at offset {offset}/4")


@dataclass(frozen=True)
class Tail:
    """Base class; concrete tails implement the site predicate, complement,
    boundary arm directions and symbolic ray limits."""

    def contains(self, x1, x2):
        """Site membership; accepts scalars or integer arrays."""
        raise NotImplementedError

    def complement(self) -> "Tail":
        raise NotImplementedError

    def arm_directions(self) -> tuple[tuple[int, int], ...]:
        """Primitive directions of the unbounded boundary arms."""
        raise NotImplementedError

    def ray_limit(self, pq: tuple[int, int], d: tuple[int, int]) -> int:
        """lim_{t->+inf} 1_{good set}(p + t*d) with p = pq/4, d integer."""
        raise NotImplementedError

    def far_region_key(self, x1: int, x2: int):
        """Which unbounded component of the tail region a far site sits in."""
        return 0

    def piece_tail(self, key) -> "Tail":
        """Tail describing the unbounded component labelled by `key`."""
        return self

    def to_text(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Empty(Tail):
    def contains(self, x1, x2):
        return np.zeros(np.broadcast(x1, x2).shape, dtype=bool) if np.ndim(x1) else False

    def complement(self):
        return Full()

    def arm_directions(self):
        return ()

    def ray_limit(self, pq, d):
        return 0

    def to_text(self):
        return "EMPTY"


@dataclass(frozen=True)
class Full(Tail):
    def contains(self, x1, x2):
        return np.ones(np.broadcast(x1, x2).shape, dtype=bool) if np.ndim(x1) else True

    def complement(self):
        return Empty()

    def arm_directions(self):
        return ()

    def ray_limit(self, pq, d):
        return 1

    def to_text(self):
        return "FULL"


@dataclass(frozen=True)
class HalfPlane(Tail):
    """Sites with a1*x1 + a2*x2 > b."""

    a1: int
    a2: int
    b: int

    def __post_init__(self):
        if self.a1 == 0 and self.a2 == 0:
            raise ValueError("half-plane normal must be nonzero")

    def contains(self, x1, x2):
        return self.a1 * np.asarray(x1) + self.a2 * np.asarray(x2) > self.b \
            if np.ndim(x1) else (self.a1 * x1 + self.a2 * x2 > self.b)

    def complement(self):
        # a.x <= b on integers is (-a).x > -b-1
        return HalfPlane(-self.a1, -self.a2, -self.b - 1)

    def arm_directions(self):
        g = math.gcd(abs(self.a1), abs(self.a2))
        p = (-self.a2 // g, self.a1 // g)
        return (p, (-p[0], -p[1]))

    def ray_limit(self, pq, d):
        coeff = self.a1 * d[0] + self.a2 * d[1]
        offset = self.a1 * pq[0] + self.a2 * pq[1] - 4 * self.b
        margin = 8 * (abs(self.a1) + abs(self.a2))
        return _sign_limit(coeff, offset, margin)

    def to_text(self):
        return f"HALF_PLANE {self.a1} {self.a2} {self.b}"


@dataclass(frozen=True)
class Quadrant(Tail):
    """Sites with sx*x1 > bx and sy*x2 > by (corner set); `negated` flips it."""

    sx: int
    bx: int
    sy: int
    by: int
    negated: bool = False

    def __post_init__(self):
        if abs(self.sx) != 1 or abs(self.sy) != 1:
            raise ValueError("quadrant signs must be +1 or -1")

    def contains(self, x1, x2):
        inside = (self.sx * np.asarray(x1) > self.bx) & (self.sy * np.asarray(x2) > self.by)
        return ~inside if self.negated else inside

    def complement(self):
        return Quadrant(self.sx, self.bx, self.sy, self.by, not self.negated)

    def arm_directions(self):
        return ((self.sx, 0), (0, self.sy))

    def ray_limit(self, pq, d):
        f1 = _sign_limit(self.sx * d[0], self.sx * pq[0] - 4 * self.bx, 8)
        f2 = _sign_limit(self.sy * d[1], self.sy * pq[1] - 4 * self.by, 8)
        inside = f1 & f2
        return 1 - inside if self.negated else inside

    def to_text(self):
        tag = "NOT_QUADRANT" if self.negated else "QUADRANT"
        return f"{tag} {self.sx} {self.bx} {self.sy} {self.by}"


@dataclass(frozen=True)
class VStrip(Tail):
    """Vertical strip in x1: interior = {l < x1 < r}; `interior=False` is the
    complement {x1 <= l or x1 >= r}."""

    l: int
    r: int
    interior: bool = True

    def __post_init__(self):
        if self.r - self.l < 2:
            raise ValueError("strip needs r - l >= 2 to contain a site")

    def contains(self, x1, x2):
        inside = (np.asarray(x1) > self.l) & (np.asarray(x1) < self.r)
        return inside if self.interior else ~inside

    def complement(self):
        return VStrip(self.l, self.r, not self.interior)

    def arm_directions(self):
        return ((0, 1), (0, -1))

    def ray_limit(self, pq, d):
        if d[0] != 0:
            inside = 0
        else:
            qx = pq[0]
            if 4 * self.l + 8 <= qx <= 4 * self.r - 8:
                inside = 1
            elif qx <= 4 * self.l - 8 or qx >= 4 * self.r + 8:
                inside = 0
            else:
                raise EndClassificationError(
                    f"vertical ray inside the strip boundary band at x1 = {qx}/4")
        return inside if self.interior else 1 - inside

    def far_region_key(self, x1, x2):
        if self.interior:
            # the strip escapes the tracing block above and below; the two
            # half-infinite pieces are distinct far components
            return "T" if x2 > 0 else "B"
        return "L" if 2 * x1 < self.l + self.r else "R"

    def piece_tail(self, key):
        if self.interior:
            raise ValueError(
                "a severed strip piece has no representable parametric tail")
        if key == "L":
            return HalfPlane(-1, 0, -self.l - 1)   # x1 <= l
        return HalfPlane(1, 0, self.r - 1)         # x1 >= r

    def to_text(self):
        tag = "VSTRIP" if self.interior else "VSTRIP_COMPLEMENT"
        return f"{tag} {self.l} {self.r}"


def parse_tail(text: str) -> Tail:
    """Inverse of Tail.to_text()."""
    parts = text.split()
    kind, args = parts[0].upper(), [int(p) for p in parts[1:]]
    if kind == "EMPTY":
        return Empty()
    if kind == "FULL":
        return Full()
    if kind == "HALF_PLANE":
        return HalfPlane(*args)
    if kind == "QUADRANT":
        return Quadrant(args[0], args[1], args[2], args[3])
    if kind == "NOT_QUADRANT":
        return Quadrant(args[0], args[1], args[2], args[3], negated=True)
    if kind == "VSTRIP":
        return VStrip(args[0], args[1], True)
    if kind == "VSTRIP_COMPLEMENT":
        return VStrip(args[0], args[1], False)
    raise ValueError(f"unknown tail kind: {parts[0]}")
