"""Exact disjointness defect, norms and distance to weighted composition maps."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (OperatorMatrix, WCMapModel, _l1_rows, operator_distance)

__all__ = [
    "ENUMERATION_LIMIT", "SupportTooLargeError", "RowPartitionWitness",
    "DistanceWitness", "op_norm", "row_max_disjoint_product", "epsilon_exact",
    "row_cost", "cost_matrix", "wcm_feasible", "dist_to_wcm", "nearest_wcm",
    "operator_distance",
]

ENUMERATION_LIMIT = 24
# Below this support size every subset is listed directly.
_DIRECT_LIMIT = 14


class SupportTooLargeError(ValueError):
    def __init__(self, size: int):
        super().__init__(
            f"support exceeds enumeration threshold ({size} > {ENUMERATION_LIMIT})")
        self.size = size


@dataclass(frozen=True)
class RowPartitionWitness:
    """Disjoint index sets A, B of one row; ``product = sum|w[A]| * sum|w[B]|``."""

    subset_a: tuple
    subset_b: tuple
    product: float

    def __post_init__(self):
        if set(self.subset_a) & set(self.subset_b):
            raise ValueError("witness subsets overlap")


@dataclass(frozen=True)
class DistanceWitness:
    """Optimal zeroing and labelling for a minimax distance value ``tau``.

    ``components[j]`` is a component of the kept vertices and receives the
    X-index ``labels[j]``.
    """

    tau: float
    zero_set: tuple
    components: tuple
    labels: tuple
    binding_vertex: Optional[int]

    def label_map(self, n_vertices: int) -> tuple:
        h = [None] * n_vertices
        for comp, x in zip(self.components, self.labels):
            for y in comp:
                h[y] = x
        return tuple(h)


def op_norm(T: OperatorMatrix) -> float:
    return float(T.row_norms.max()) if T.n_vertices else 0.0


def _subset_sums(values: np.ndarray) -> np.ndarray:
    # Entry at position b is the sum over the bits of b.
    sums = np.zeros(1)
    for v in values:
        sums = np.concatenate([sums, sums + v])
    return sums


def _best_mask(w: np.ndarray) -> int:
    """Bitmask over ``w`` of a subset sum closest to half the total."""
    s = w.size
    total = w.sum()
    if s <= _DIRECT_LIMIT:
        sums = _subset_sums(w)
        return int(np.argmax(sums * (total - sums)))
    half = s // 2
    left = _subset_sums(w[:half])
    right = _subset_sums(w[half:])
    order = np.argsort(right, kind="stable")
    rs = right[order]
    pos = np.searchsorted(rs, total / 2 - left)
    best, best_mask = -1.0, 0
    for off in (-1, 0):
        j = np.clip(pos + off, 0, rs.size - 1)
        tot = left + rs[j]
        prod = tot * (total - tot)
        i = int(np.argmax(prod))
        if prod[i] > best:
            best = prod[i]
            best_mask = i | (int(order[j[i]]) << half)
    return best_mask


def row_max_disjoint_product(w) -> tuple[float, RowPartitionWitness]:
    """Largest ``sum(A) * sum(B)`` over disjoint index sets of a row.

    Only absolute values matter.  With ``W`` the row total the optimum is
    ``max s(W - s)`` over subset sums ``s``, so ``B`` is always the rest of
    the support.  The returned ``A`` contains the first support index.
    """
    w = np.abs(np.asarray(w, dtype=float))
    support = np.flatnonzero(w)
    if support.size > ENUMERATION_LIMIT:
        raise SupportTooLargeError(int(support.size))
    if support.size < 2:
        return 0.0, RowPartitionWitness(tuple(int(i) for i in support), (), 0.0)
    vals = w[support]
    mask = _best_mask(vals)
    in_a = np.array([(mask >> b) & 1 for b in range(support.size)], dtype=bool)
    if not in_a[0]:
        in_a = ~in_a
    a_idx, b_idx = support[in_a], support[~in_a]
    product = float(w[a_idx].sum() * w[b_idx].sum())
    return product, RowPartitionWitness(tuple(int(i) for i in a_idx),
                                        tuple(int(i) for i in b_idx), product)


def epsilon_exact(T: OperatorMatrix) -> tuple[float, int, RowPartitionWitness]:
    """Smallest eps for which T is eps-disjointness preserving.

    Returns the value, the first row attaining it and that row's partition.
    """
    best = (-1.0, 0, None)
    for y in range(T.n_vertices):
        val, wit = row_max_disjoint_product(T.rows[y])
        if val > best[0]:
            best = (val, y, wit)
    return best


def _defect_table(k: int) -> np.ndarray:
    """0/1 matrix of all subsets of range(k), one per row."""
    return ((np.arange(2 ** k)[:, None] >> np.arange(k)) & 1).astype(float)


def _fast_defect(abs_rows: np.ndarray, table: np.ndarray) -> float:
    # Value-only defect for small k, used in inner optimisation loops.
    sums = abs_rows @ table.T
    totals = abs_rows.sum(axis=1)[:, None]
    return float((sums * (totals - sums)).max())


def row_cost(w, x: int) -> float:
    """``sum_{i != x} |w_i|``: what it costs to keep only the atom at ``x``."""
    w = np.array(w, dtype=float)
    w[x] = 0.0
    return float(_l1_rows(w[None, :])[0])


def cost_matrix(T: OperatorMatrix) -> np.ndarray:
    """``C[y, x] = row_cost(T_y, x)``, summed exactly as ``operator_distance`` sums."""
    C = np.empty(T.rows.shape)
    for x in range(T.k):
        rows = T.rows.copy()
        rows[:, x] = 0.0
        C[:, x] = _l1_rows(rows)
    return C


def _feasible(T: OperatorMatrix, C: np.ndarray, tau: float):
    mandatory = T.row_norms > tau
    comps = T.graph_y.components(mandatory)
    labels = []
    for comp in comps:
        worst = C[list(comp)].max(axis=0)
        ok = np.flatnonzero(worst <= tau)
        if ok.size == 0:
            return None
        labels.append(int(ok[0]))
    return mandatory, comps, labels


def _witness(T: OperatorMatrix, C: np.ndarray, found) -> DistanceWitness:
    mandatory, comps, labels = found
    cost = np.where(mandatory, 0.0, T.row_norms)
    for comp, x in zip(comps, labels):
        cost[list(comp)] = C[list(comp), x]
    binding = int(np.argmax(cost)) if cost.size else None
    tau = float(cost.max()) if cost.size else 0.0
    zero = tuple(int(y) for y in np.flatnonzero(~mandatory))
    return DistanceWitness(tau, zero, tuple(comps), tuple(labels), binding)


def wcm_feasible(T: OperatorMatrix, tau: float) -> Optional[DistanceWitness]:
    """A WCM within ``tau`` of T, or None when none exists.

    Vertices with ``||T_y|| <= tau`` are zeroed, since that costs at most tau
    and only removes labelling constraints.  The witness ``tau`` is the cost
    actually achieved, which may be below the requested value.
    """
    C = cost_matrix(T)
    found = _feasible(T, C, tau)
    return None if found is None else _witness(T, C, found)


def dist_to_wcm(T: OperatorMatrix) -> tuple[float, DistanceWitness]:
    """Exact ``min ||T - S||`` over weighted composition maps S.

    Feasibility is monotone in tau and any optimum equals a row norm, a row
    cost or 0, so a binary search over those values is exact.
    """
    C = cost_matrix(T)
    cands = np.unique(np.concatenate([[0.0], T.row_norms, C.ravel()]))
    lo, hi = 0, cands.size - 1
    # The largest candidate is at least every row norm, so it is feasible.
    best = _feasible(T, C, cands[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        found = _feasible(T, C, cands[mid])
        if found is None:
            lo = mid + 1
        else:
            hi, best = mid, found
    wit = _witness(T, C, best)
    return wit.tau, wit


def nearest_wcm(T: OperatorMatrix) -> WCMapModel:
    """A weighted composition map attaining ``dist_to_wcm(T)``.

    A labelled vertex whose kept entry is 0 is zeroed instead, at equal cost.
    """
    _, wit = dist_to_wcm(T)
    a = np.zeros(T.n_vertices)
    h = list(wit.label_map(T.n_vertices))
    for y, x in enumerate(h):
        if x is None:
            continue
        if T.rows[y, x] == 0.0:
            h[y] = None
        else:
            a[y] = T.rows[y, x]
    return WCMapModel(a, tuple(h), T.space_x, T.graph_y)
