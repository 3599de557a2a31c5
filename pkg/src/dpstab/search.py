"""Random-restart hill climbing for operators far from every WCM at a given defect."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .calculus import (_DIRECT_LIMIT, _defect_table, _fast_defect, dist_to_wcm,
                       epsilon_exact, nearest_wcm)
from .model import OperatorMatrix, SpaceX, TopGraphY, wcm_as_matrix

TRACE_HEADER = ("restart", "evaluation", "dist", "eps")
MIN_STEP = 1e-10


@dataclass(frozen=True, eq=False)
class SearchResult:
    operator: OperatorMatrix
    best_dist: float
    trace: tuple

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for rec in self.trace:
            w.writerow([rec[0], rec[1], f"{rec[2]:.12g}", f"{rec[3]:.12g}"])
        return buf.getvalue()

    def __iter__(self):
        return iter((self.operator, self.best_dist, self.trace))


class _Evaluator:
    """Defect and distance of a row matrix, with fast paths for small k."""

    def __init__(self, k: int, graph_y: TopGraphY):
        self.k = k
        self.graph = graph_y
        self.space = SpaceX.of_size(k)
        self.table = _defect_table(k) if k <= _DIRECT_LIMIT else None

    def eps(self, rows: np.ndarray) -> float:
        if self.table is not None:
            return _fast_defect(np.abs(rows), self.table)
        return epsilon_exact(self.op(rows))[0]

    def dist(self, rows: np.ndarray) -> float:
        if self.graph.is_edgeless:
            a = np.abs(rows)
            return float((a.sum(axis=1) - a.max(axis=1)).max())
        return dist_to_wcm(self.op(rows))[0]

    def op(self, rows: np.ndarray) -> OperatorMatrix:
        return OperatorMatrix(rows, self.space, self.graph)


def _normalise(rows: np.ndarray) -> np.ndarray:
    return rows / np.abs(rows).sum(axis=1).max()


def search_extremal(card_x: int, graph_y: TopGraphY, eps: float, budget: int,
                    seed: int) -> SearchResult:
    """Maximise ``dist_to_wcm`` over nonnegative norm-one T with defect <= eps.

    Each restart begins at a simplex-uniform row matrix (or its nearest WCM if
    that start already exceeds eps), then perturbs single entries, rejecting
    moves that break the defect bound or lower the distance.  The step
    grows on acceptance and halves after a run of rejections long enough to
    have tried every single-entry move; a restart ends once the step
    falls below ``MIN_STEP``, and restarts continue until ``budget``
    evaluations are spent.  Each restart draws from its own spawned seed.
    """
    if int(card_x) != card_x or card_x < 2:
        raise ValueError(f"card X must be an integer >= 2, got {card_x}")
    if not 0 < eps < 0.25:
        raise ValueError(f"eps must lie in (0, 1/4), got {eps}")
    if int(budget) != budget or budget < 1:
        raise ValueError(f"budget must be a positive integer, got {budget}")
    k, n_y, budget = int(card_x), len(graph_y), int(budget)
    ev = _Evaluator(k, graph_y)
    # enough consecutive misses that every +-step entry move was likely tried
    patience = 4 * n_y * k
    seeds = np.random.SeedSequence(seed)
    trace = []
    best = (-1.0, None)
    used, r = 0, 0
    while used < budget:
        rng = np.random.default_rng(seeds.spawn(1)[0])
        rows = _normalise(rng.exponential(size=(n_y, k)))
        e = ev.eps(rows)
        if e > eps:
            rows = np.abs(wcm_as_matrix(nearest_wcm(ev.op(rows))).rows)
            if not rows.any():
                rows[:, 0] = 1.0
            rows = _normalise(rows)
            e = ev.eps(rows)
        d = ev.dist(rows)
        used += 1
        trace.append((r, used, d, e))
        step, misses = 0.25, 0
        while used < budget and step >= MIN_STEP:
            cand = rows.copy()
            i, j = rng.integers(n_y), rng.integers(k)
            cand[i, j] = max(cand[i, j] + rng.choice((-1.0, 1.0)) * step, 0.0)
            if not cand.any():
                continue
            cand = _normalise(cand)
            ce = ev.eps(cand)
            used += 1
            cd = ev.dist(cand) if ce <= eps else -1.0
            improved = ce <= eps and cd > d
            if ce <= eps and cd >= d:
                rows, d, e = cand, cd, ce
                trace.append((r, used, d, e))
            if improved:
                step, misses = min(step * 1.5, 0.5), 0
            else:
                # ties are kept but do not reset the shrink schedule
                misses += 1
                if misses >= patience:
                    step, misses = step / 2, 0
        if d > best[0]:
            best = (d, rows)
        r += 1
    d, rows = best
    return SearchResult(ev.op(rows), d, tuple(trace))
