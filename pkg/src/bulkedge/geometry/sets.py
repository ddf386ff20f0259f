"""Discrete subsets of Z^2 with parametric tails, and their continuum
"good set" realization.

Given the site set A ⊂ Z^2, the associated good set is

    A_good = { x in R^2 : dist_sup(x, Z^2 \\ A) > 3/4 },

the union of the open half-integer cells whose covering sites all belong
to A.  Its boundary is a disjoint union of axis-aligned polylines through
the quarter-integer lattice of odd pairs (scale-4 coordinates), traced in
`tracing.py`.  Cells are squares of side 1/2 centered on (Z/2)^2; in
scale-4 coordinates a cell center is the even pair (2a, 2b) and the cell
covers the sites i with |2i - a| <= 1 (one, two or four sites depending on
parity).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .tails import Tail, Empty, Full

__all__ = ["DiscreteSet", "RIM_BELT", "perturb_compactly"]

# membership on the outermost RIM_BELT rings of the window must agree with
# the tail predicate; keeps window content and far field consistent
RIM_BELT = 2


@dataclass(frozen=True)
class DiscreteSet:
    """Finite membership grid (indexed [x1+L, x2+L]) plus a tail."""

    half_width: int
    membership: np.ndarray
    tail: Tail

    def __post_init__(self):
        L = self.half_width
        n = 2 * L + 1
        if self.membership.shape != (n, n):
            raise ValueError(f"membership grid must be {(n, n)}, got {self.membership.shape}")
        if self.membership.dtype != bool:
            object.__setattr__(self, "membership", self.membership.astype(bool))
        xs = np.arange(-L, L + 1)
        x1, x2 = np.meshgrid(xs, xs, indexing="ij")
        belt = (np.abs(x1) > L - RIM_BELT) | (np.abs(x2) > L - RIM_BELT)
        want = self.tail.contains(x1, x2)
        if np.any(self.membership[belt] != want[belt]):
            bad = np.argwhere(belt & (self.membership != want))[0]
            raise ValueError(
                f"rim belt disagrees with tail at site ({bad[0]-L}, {bad[1]-L})")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_tail(cls, half_width: int, tail: Tail) -> "DiscreteSet":
        xs = np.arange(-half_width, half_width + 1)
        x1, x2 = np.meshgrid(xs, xs, indexing="ij")
        return cls(half_width, np.asarray(tail.contains(x1, x2), dtype=bool), tail)

    def with_sites(self, sites, value: bool = True) -> "DiscreteSet":
        """Copy with the listed (x1, x2) sites set to `value`."""
        grid = self.membership.copy()
        L = self.half_width
        for (x1, x2) in sites:
            grid[x1 + L, x2 + L] = value
        return replace(self, membership=grid)

    def with_block(self, x1_range, x2_range, value: bool = True) -> "DiscreteSet":
        """Copy with the inclusive block [a1,b1] x [a2,b2] set to `value`."""
        grid = self.membership.copy()
        L = self.half_width
        a1, b1 = x1_range
        a2, b2 = x2_range
        grid[a1 + L:b1 + L + 1, a2 + L:b2 + L + 1] = value
        return replace(self, membership=grid)

    # -- membership --------------------------------------------------------

    def complement(self) -> "DiscreteSet":
        return DiscreteSet(self.half_width, ~self.membership, self.tail.complement())

    def lattice_contains(self, x1, x2):
        """Site membership for scalar or array integer coordinates."""
        x1 = np.asarray(x1)
        x2 = np.asarray(x2)
        L = self.half_width
        inside = (np.abs(x1) <= L) & (np.abs(x2) <= L)
        out = np.asarray(self.tail.contains(x1, x2), dtype=bool).copy()
        if out.ndim == 0:
            if inside:
                return bool(self.membership[int(x1) + L, int(x2) + L])
            return bool(out)
        i1 = np.clip(x1 + L, 0, 2 * L)
        i2 = np.clip(x2 + L, 0, 2 * L)
        out[inside] = self.membership[i1[inside], i2[inside]]
        return out

    def site_mask(self, op_half_width: int) -> np.ndarray:
        """Membership over the (2M+1)^2 operator window, row-major (x1, x2)."""
        xs = np.arange(-op_half_width, op_half_width + 1)
        x1, x2 = np.meshgrid(xs, xs, indexing="ij")
        return self.lattice_contains(x1, x2).reshape(-1)

    # -- continuum cells ---------------------------------------------------

    def cell_interior_grid(self, trace_half_width: int) -> np.ndarray:
        """Boolean grid over cells |a|,|b| <= 2T+1: True iff the closed cell
        lies inside the good set (all covering sites are members)."""
        T = trace_half_width
        A = 2 * T + 1
        xs = np.arange(-T - 1, T + 2)
        x1, x2 = np.meshgrid(xs, xs, indexing="ij")
        M = self.lattice_contains(x1, x2)             # (2T+3, 2T+3)
        # reduce site grid to cell grid axis by axis: even cell coordinate a
        # covers the single site a/2, odd a the pair (a-1)/2, (a+1)/2; with
        # A = 2T+1 odd, even output positions hold odd cell coordinates
        def along_axis(arr):
            s = arr.shape[0]                          # 2T+3 sites
            out = np.empty((2 * A + 1,) + arr.shape[1:], dtype=bool)
            out[0::2] = arr[:-1] & arr[1:]            # odd a
            out[1::2] = arr[1:s - 1]                  # even a
            return out
        C = along_axis(M)
        C = along_axis(C.swapaxes(0, 1)).swapaxes(0, 1)
        return C

    def good_contains_point(self, qx: int, qy: int) -> bool:
        """Continuum membership of the scale-4 point (qx/4, qy/4); the point
        must lie strictly inside a cell (both coordinates non-even-mod-4)."""
        # containing cell center (2a, 2b): a = round(qx/2) with qx not on a
        # cell edge; edges are at odd scale-4 coordinates
        if qx % 2 == 1 or qy % 2 == 1:
            raise ValueError("point lies on a cell edge; membership ambiguous")
        a, b = qx // 2, qy // 2
        # covering sites of the cell centered at (a/2, b/2)
        def cover(c):
            if c % 2 == 0:
                return [c // 2]
            return [(c - 1) // 2, (c + 1) // 2]
        return all(
            self.lattice_contains(i, j) for i in cover(a) for j in cover(b))


def perturb_compactly(base: DiscreteSet, patch: np.ndarray, center: tuple[int, int]) -> DiscreteSet:
    """XOR a boolean patch into the membership grid; the tail is untouched.

    The patch (shape (p, q)) is anchored with its lower corner so that it is
    centered on `center`; every flipped site must stay off the rim belt.
    """
    L = base.half_width
    patch = np.asarray(patch, dtype=bool)
    p, q = patch.shape
    c1, c2 = center
    lo1 = c1 - (p - 1) // 2 + L
    lo2 = c2 - (q - 1) // 2 + L
    flips = np.argwhere(patch)
    if flips.size:
        x1 = flips[:, 0] + lo1 - L
        x2 = flips[:, 1] + lo2 - L
        if np.any((np.abs(x1) > L - RIM_BELT) | (np.abs(x2) > L - RIM_BELT)):
            raise ValueError("perturbation patch touches the rim belt")
    grid = base.membership.copy()
    grid[lo1:lo1 + p, lo2:lo2 + q] ^= patch
    return replace(base, membership=grid)
