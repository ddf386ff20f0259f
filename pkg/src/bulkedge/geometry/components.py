"""Connected-component structure of good sets.

A good set decomposes into continuum components; each component owns a
subset of the boundary curves and is itself a good set whose lattice trace
is returned as a DiscreteSet (with the matching piece of the parent tail,
or an empty tail for bounded components).  For a connected good set, the
components of the interior of its complement are simple: each owns exactly
one boundary curve.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .sets import DiscreteSet
from .tails import Empty
from .tracing import (BoundaryCurve, TracingError, good_set_boundary,
                      TRACE_MARGIN, _left_cell_index)

__all__ = ["Component", "connected_components", "complement_components"]


@dataclass(frozen=True)
class Component:
    """One continuum component: its lattice trace and its boundary curves
    (oriented with the *parent* set on the left)."""

    region: DiscreteSet
    curves: tuple[BoundaryCurve, ...]


def _label_cells(cells: np.ndarray) -> np.ndarray:
    """4-connectivity labels of True cells; -1 elsewhere.

    Vectorized min-label propagation with pointer jumping; components are
    numbered 0, 1, ... in row-major order of their first cell.
    """
    H, W = cells.shape
    n = H * W
    flat = cells.ravel()
    if not flat.any():
        return np.full(cells.shape, -1, dtype=np.int64)
    lab = np.where(flat, np.arange(n, dtype=np.int64), n)
    right = flat[:-1] & flat[1:]
    right[W - 1::W] = False
    A1 = np.nonzero(right)[0]
    down = flat[:-W] & flat[W:]
    A2 = np.nonzero(down)[0]
    A = np.concatenate([A1, A2])
    B = np.concatenate([A1 + 1, A2 + W])
    while True:
        before = lab.copy()
        mn = np.minimum(lab[A], lab[B])
        np.minimum.at(lab, A, mn)
        np.minimum.at(lab, B, mn)
        hop = lab[np.where(lab < n, lab, 0)]
        lab = np.where(lab < n, np.minimum(lab, hop), lab)
        if np.array_equal(lab, before):
            break
    filled = lab < n
    _, inverse = np.unique(lab[filled], return_inverse=True)
    out = np.full(n, -1, dtype=np.int64)
    out[filled] = inverse
    return out.reshape(H, W)


def connected_components(A: DiscreteSet, margin: int = TRACE_MARGIN) -> list[Component]:
    """Continuum components of the good set of A.

    Window components touching the tracing rim are merged through the far
    field: the rim rows already equal the tail, whose region has one
    unbounded component per `far_region_key` value.
    """
    T = A.half_width + margin
    Ablk = 2 * T + 1
    cells = A.cell_interior_grid(T)
    labels = _label_cells(cells)
    curves = good_set_boundary(A, margin)

    # merge labels connected through the tail's far region: rim cells already
    # carry tail membership, and each far_region_key names one unbounded
    # piece of the tail region, so labels sharing a key are one component
    rim = np.zeros(cells.shape, dtype=bool)
    rim[0, :] = rim[-1, :] = True
    rim[:, 0] = rim[:, -1] = True
    parent: dict[object, object] = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx

    keys_of: dict[int, set] = {}
    for ia, ib in np.argwhere(rim & cells):
        lab = int(labels[ia, ib])
        a, b = ia - Ablk, ib - Ablk          # cell center = (a/2, b/2)
        key = A.tail.far_region_key(a / 2.0, b / 2.0)
        keys_of.setdefault(lab, set()).add(key)
        union(("lab", lab), ("key", key))

    def root_of(lab: int):
        return find(("lab", lab))

    # curve ownership: the cell on the left of the first segment
    owner: dict[object, list[BoundaryCurve]] = {}
    for c in curves:
        idx = _left_cell_index(tuple(c.points[0]), tuple(c.points[1]), Ablk)
        lab = root_of(int(labels[idx]))
        owner.setdefault(lab, []).append(c)

    L = A.half_width
    all_labels = [int(l) for l in np.unique(labels) if l >= 0]
    groups: dict[object, list[int]] = {}
    for lab in all_labels:
        groups.setdefault(root_of(lab), []).append(lab)

    # map the label grid to merged-group ids once, on the site sublattice
    n_lab = (max(all_labels) + 1) if all_labels else 0
    group_list = sorted(groups, key=lambda r: min(groups[r]))
    group_id_of_label = np.full(n_lab + 1, -1, dtype=np.int64)
    for gid, root in enumerate(group_list):
        for lab in groups[root]:
            group_id_of_label[lab] = gid
    site_labels = labels[Ablk - 2 * L:Ablk + 2 * L + 1:2,
                         Ablk - 2 * L:Ablk + 2 * L + 1:2]
    site_groups = group_id_of_label[site_labels]   # label -1 indexes the tail slot
    site_groups[site_labels < 0] = -1

    out: list[Component] = []
    for gid, root in enumerate(group_list):
        members = groups[root]
        grid = site_groups == gid
        keys = set().union(*(keys_of.get(m, set()) for m in members))
        if not keys:
            tail = Empty()
        elif len(keys) == 1:
            tail = A.tail.piece_tail(next(iter(keys)))
        else:
            # the component reaches every unbounded piece of the tail region
            all_keys = _all_far_keys(A.tail)
            if keys != all_keys:
                raise ValueError(
                    "component far field is not representable in the tail family")
            tail = A.tail
        region = DiscreteSet(L, grid, tail)
        out.append(Component(region, tuple(owner.get(root, []))))

    # every curve must be owned by exactly one component
    assert sum(len(c.curves) for c in out) == len(curves)
    return out


def _all_far_keys(tail) -> set:
    """Every far_region_key value the tail can produce."""
    probes = [(-1e9, -1e9), (-1e9, 1e9), (1e9, -1e9), (1e9, 1e9),
              (0.0, 1e9), (0.0, -1e9), (1e9, 0.0), (-1e9, 0.0)]
    return {tail.far_region_key(x, y) for (x, y) in probes}


def complement_components(A: DiscreteSet, margin: int = TRACE_MARGIN) -> list[Component]:
    """Components of the interior of the complement of a *connected* good
    set A, each owning exactly one boundary curve (oriented with the
    complement component on the left, i.e. the reverse of A's orientation).
    """
    comps = connected_components(A.complement(), margin)
    for comp in comps:
        if len(comp.curves) > 1:
            raise TracingError(
                "complement component owns several boundary curves; "
                "input is not a connected good set")
    return comps
