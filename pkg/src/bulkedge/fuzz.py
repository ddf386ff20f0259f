"""Randomized geometry scenes and the exact property suite they must pass.

Every generated scene is checked for: tracing totality and the
two-neighbor law, the lattice roundtrip A ∩ Z^2 = A_sites, boundary
vertices off the integer lattice, the left-orientation midpoint law,
antisymmetry of the intersection number under complementing V, additivity
over connected components of U and of V, and agreement of the DIRECT and
DECOMPOSED routes.  These are exact integer statements; any failure is a
bug, so the suite reports a failure count that must be zero.

Tail pairs are drawn from templates whose boundary arms stay mutually
decidable (no parallel arms at small offsets), and strip scenes only add
sites so strips are never severed into unrepresentable pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (DiscreteSet, Empty, Full, HalfPlane, Quadrant, VStrip,
                       connected_components, good_set_boundary,
                       intersection_number, orient_with_set_on_left)

__all__ = ["FuzzSummary", "random_scene", "check_scene", "fuzz_geometry"]


@dataclass
class FuzzSummary:
    scenes: int = 0
    failures: int = 0
    checks: dict = field(default_factory=dict)
    failed_seeds: list = field(default_factory=list)

    def record(self, name: str):
        self.checks[name] = self.checks.get(name, 0) + 1


def _rand_halfplane(rng, normals) -> HalfPlane:
    a1, a2 = normals[rng.integers(len(normals))]
    return HalfPlane(int(a1), int(a2), int(rng.integers(-3, 4)))


def _rand_quadrant(rng, negated_ok=True) -> Quadrant:
    return Quadrant(int(rng.choice([-1, 1])), int(rng.integers(-3, 4)),
                    int(rng.choice([-1, 1])), int(rng.integers(-3, 4)),
                    negated=bool(rng.integers(2)) if negated_ok else False)


def _tail_pair(rng):
    """A (tail_U, tail_V, add_only) template with decidable far fields."""
    case = rng.integers(8)
    if case == 0:
        return (_rand_halfplane(rng, [(0, 1), (0, -1)]),
                _rand_halfplane(rng, [(1, 0), (-1, 0)]), False)
    if case == 1:
        return (_rand_halfplane(rng, [(1, 1), (1, -1), (-1, 1), (-1, -1)]),
                _rand_halfplane(rng, [(1, 0), (0, 1), (-1, 0), (0, -1)]), False)
    if case == 2:
        return (_rand_halfplane(rng, [(1, 2), (2, 1), (-1, 2), (2, -1)]),
                _rand_halfplane(rng, [(1, 1), (-1, -1)]), False)
    if case == 3:
        # parallel quadrant arms must stay geometrically >= 4 apart; the
        # boundary line of the constraint s*x > b sits at s*(b + 3/4)
        qU = _rand_quadrant(rng)
        sxV = int(rng.choice([-1, 1]))
        syV = int(rng.choice([-1, 1]))
        bxV = round(sxV * (qU.sx * (qU.bx + 0.75) + rng.choice([-6, 6])) - 0.75)
        byV = round(syV * (qU.sy * (qU.by + 0.75) + rng.choice([-6, 6])) - 0.75)
        qV = Quadrant(sxV, int(bxV), syV, int(byV), negated=bool(rng.integers(2)))
        return qU, qV, False
    if case == 4:
        return (_rand_quadrant(rng),
                _rand_halfplane(rng, [(1, 1), (1, -1), (-1, 1), (-1, -1)]), False)
    if case == 5:
        l = int(rng.integers(-5, -1))
        r = int(rng.integers(2, 6))
        strip = VStrip(l, r, bool(rng.integers(2)))
        return strip, _rand_halfplane(rng, [(0, 1), (0, -1)]), True
    if case == 6:
        return Empty(), _rand_halfplane(rng, [(1, 0), (0, 1)]), False
    return (_rand_halfplane(rng, [(0, 1), (0, -1)]),
            rng.choice([Empty(), Full()]), False)


def _add_blobs(rng, S: DiscreteSet, add_only: bool) -> DiscreteSet:
    L = S.half_width
    grid = S.membership.copy()
    # blobs inside the corridor of a strip complement could bridge its two
    # half-plane pieces, whose severed complement has no representable tail;
    # keep the corridor untouched for those scenes
    corridor = None
    if isinstance(S.tail, VStrip) and not S.tail.interior:
        corridor = (S.tail.l + 1, S.tail.r - 1)
    for _ in range(int(rng.integers(0, 4))):
        w = int(rng.integers(1, 5))
        h = int(rng.integers(1, 5))
        for _ in range(40):
            c1 = int(rng.integers(-(L - 4), L - 4 + 1))
            lo1 = c1 - (w - 1) // 2
            if corridor is None or lo1 + w - 1 < corridor[0] or lo1 > corridor[1]:
                break
        else:
            continue
        c2 = int(rng.integers(-(L - 4), L - 4 + 1))
        lo1 += L
        lo2 = c2 - (h - 1) // 2 + L
        if add_only:
            grid[lo1:lo1 + w, lo2:lo2 + h] = True
        else:
            grid[lo1:lo1 + w, lo2:lo2 + h] ^= True
    return DiscreteSet(L, grid, S.tail)


def random_scene(rng) -> tuple[DiscreteSet, DiscreteSet]:
    L = int(rng.integers(8, 12))
    tail_u, tail_v, add_only = _tail_pair(rng)
    U = _add_blobs(rng, DiscreteSet.from_tail(L, tail_u), add_only)
    V = _add_blobs(rng, DiscreteSet.from_tail(L, tail_v), add_only)
    return U, V


def check_scene(U: DiscreteSet, V: DiscreteSet, summary: FuzzSummary):
    """Run the exact property suite on one scene; raises on any violation."""
    for name, S in (("U", U), ("V", V)):
        curves = good_set_boundary(S)       # two-neighbor law asserted inside
        summary.record("two_neighbor_law")

        # tracing totality: no vertex is visited twice
        seen = set()
        for c in curves:
            for p in map(tuple, c.points):
                if p in seen:
                    raise AssertionError(f"vertex {p} visited twice on {name}")
                seen.add(p)
        summary.record("tracing_totality")

        # boundary vertices avoid the integer lattice (odd quarter coords)
        for c in curves:
            if np.any(c.points % 2 == 0):
                raise AssertionError("boundary vertex on the integer lattice")
        summary.record("boundary_off_lattice")

        # left-orientation midpoint law: already oriented, so the op is a no-op
        for c in curves:
            oc = orient_with_set_on_left(c, S)
            if oc.points is not c.points:
                raise AssertionError(f"curve of {name} was not set-on-left oriented")
        summary.record("orientation_law")

        # good-set roundtrip on every window site
        L = S.half_width
        cells = S.cell_interior_grid(L)
        A = 2 * L + 1
        site_cells = cells[A - 2 * L:A + 2 * L + 1:2, A - 2 * L:A + 2 * L + 1:2]
        if not np.array_equal(site_cells, S.membership):
            raise AssertionError(f"good-set roundtrip failed for {name}")
        summary.record("roundtrip")

    rep = intersection_number(U, V)         # DIRECT vs DECOMPOSED inside
    summary.record("direct_eq_decomposed")

    rep_c = intersection_number(U, V.complement())
    if rep_c.total != -rep.total:
        raise AssertionError(
            f"antisymmetry: chi(U, Vc) = {rep_c.total}, chi(U, V) = {rep.total}")
    summary.record("antisymmetry")

    parts_u = sum(intersection_number(comp.region, V).total
                  for comp in connected_components(U))
    if parts_u != rep.total:
        raise AssertionError(
            f"U-additivity: sum over components {parts_u} != {rep.total}")
    summary.record("additivity_U")

    parts_v = sum(intersection_number(U, comp.region).total
                  for comp in connected_components(V))
    if parts_v != rep.total:
        raise AssertionError(
            f"V-additivity: sum over components {parts_v} != {rep.total}")
    summary.record("additivity_V")


def fuzz_geometry(n: int, seed: int) -> FuzzSummary:
    """Run the property suite on n random scenes; failures must be zero."""
    if n < 1:
        raise ValueError("need at least one scene")
    summary = FuzzSummary()
    for i in range(n):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        U, V = random_scene(rng)
        summary.scenes += 1
        try:
            check_scene(U, V, summary)
        except Exception:
            summary.failures += 1
            summary.failed_seeds.append((seed, i))
    return summary
