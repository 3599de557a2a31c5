"""Constructions of nearby weighted composition maps, each with a certificate."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounds import TWO_SEVENTEENTHS, o_prime_X
from .calculus import epsilon_exact, op_norm
from .model import TOL, Certificate, OperatorMatrix, WCMapModel, operator_distance

# Extra margin for level sets whose boundary is hit exactly in exact
# arithmetic but may be overshot by rounding (e.g. scaled instances).
LEVEL_GUARD = 1e-12


@dataclass(frozen=True)
class DominantAtomReport:
    """Largest atom per vertex of ``Y_threshold`` and per-component agreement.

    ``atoms[y]`` is ``(x, |a_x|)`` or None outside the level set.
    """

    atoms: tuple
    threshold: float
    components: tuple
    consistent: tuple

    @property
    def all_consistent(self) -> bool:
        return all(self.consistent)

    def label(self, comp_index: int) -> Optional[int]:
        if not self.consistent[comp_index]:
            return None
        return self.atoms[self.components[comp_index][0]][0]


def _check_pre(T: OperatorMatrix, eps: float, eps_max: float) -> None:
    if not 0 <= eps < eps_max:
        raise ValueError(f"eps must lie in [0, {eps_max:.12g}), got {eps}")
    if abs(op_norm(T) - 1) > TOL:
        raise ValueError(f"operator norm must be 1, got {op_norm(T)!r}")
    e, _, _ = epsilon_exact(T)
    if e > eps + TOL:
        raise ValueError(f"defect {e!r} exceeds eps={eps!r}")


def dominant_atoms(T: OperatorMatrix, eps: float, threshold: float) -> DominantAtomReport:
    """Largest atom on each row with ``||T_y|| > threshold``.

    Above ``sqrt(9 eps / 2)`` that atom carries more than half the row and is
    unique; ``consistent`` says whether it is constant on each component.
    """
    if threshold < 2 * math.sqrt(eps) - TOL:
        raise ValueError("threshold must be at least 2 sqrt(eps)")
    e, _, _ = epsilon_exact(T)
    if e > eps + TOL:
        raise ValueError(f"defect {e!r} exceeds eps={eps!r}")
    mask = T.row_norms > threshold
    absrows = np.abs(T.rows)
    atoms = []
    for y in range(T.n_vertices):
        if mask[y]:
            x = int(np.argmax(absrows[y]))
            atoms.append((x, float(absrows[y, x])))
        else:
            atoms.append(None)
    comps = T.graph_y.components(mask)
    consistent = tuple(len({atoms[y][0] for y in c}) == 1 for c in comps)
    return DominantAtomReport(tuple(atoms), float(threshold), tuple(comps), consistent)


def _assemble(T: OperatorMatrix, a: np.ndarray, h: list) -> WCMapModel:
    for y in range(T.n_vertices):
        if a[y] == 0.0:
            h[y] = None
    return WCMapModel(a, tuple(h), T.space_x, T.graph_y)


def construct_finiteX(T: OperatorMatrix, eps: float) -> tuple[WCMapModel, Certificate]:
    """A weighted composition map within ``2 sqrt(eps)`` of T.

    On ``Y_{2 sqrt(eps)}`` each component keeps one atom ``u`` carrying at
    least ``sqrt(t^2 - 4 eps)`` of every row, scaled by
    ``alpha(t) = sqrt((t - 2 sqrt(eps)) / (t + 2 sqrt(eps)))`` so the row cost
    ``t - alpha |a_u|`` is at most ``2 sqrt(eps)``.  Rows below the level are
    zeroed.  A component with no common admissible atom is zeroed as well
    and the certificate reports what that costs.
    """
    _check_pre(T, eps, 0.25)
    r = 2 * math.sqrt(eps)
    norms = T.row_norms
    mask = norms > r
    absrows = np.abs(T.rows)
    a = np.zeros(T.n_vertices)
    h: list = [None] * T.n_vertices
    notes = [f"rows with norm <= 2sqrt(eps)={r!r} zeroed at cost <= 2sqrt(eps)"]
    for comp in T.graph_y.components(mask):
        idx = list(comp)
        t = norms[idx]
        need = np.sqrt(np.maximum((t - r) * (t + r), 0.0))
        admissible = np.all(absrows[idx] >= need[:, None] - TOL, axis=0)
        dominant = {int(np.argmax(absrows[y])) for y in idx}
        if len(dominant) == 1 and admissible[next(iter(dominant))]:
            u = dominant.pop()
        elif admissible.any():
            u = int(np.flatnonzero(admissible)[0])
        else:
            notes.append(f"component {comp}: no common atom with |a_u| >= "
                         "sqrt(t^2-4eps); zeroed")
            continue
        alpha = np.sqrt((t - r) / (t + r))
        a[idx] = alpha * T.rows[idx, u]
        for y in idx:
            h[y] = u
        notes.append(f"component {comp}: atom {u}, cost t - alpha|a_u| <= 2sqrt(eps)")
    S = _assemble(T, a, h)
    return S, Certificate.check("construct_finiteX", r, operator_distance(T, S),
                                notes=notes)


def construct_discreteY(T: OperatorMatrix, eps: float) -> tuple[WCMapModel, Certificate]:
    """Keep the largest atom of every row; certified against ``o'_X(eps, k)``."""
    if not T.graph_y.is_edgeless:
        raise ValueError("construct_discreteY needs an edgeless Y")
    _check_pre(T, eps, 0.25)
    a = np.zeros(T.n_vertices)
    h: list = [None] * T.n_vertices
    for y in range(T.n_vertices):
        x = int(np.argmax(np.abs(T.rows[y])))
        a[y], h[y] = T.rows[y, x], x
    S = _assemble(T, a, h)
    bound = o_prime_X(eps, T.k) if eps > 0 and T.k >= 2 else 0.0
    return S, Certificate.check(
        "construct_discreteY", bound, operator_distance(T, S),
        notes=[f"o'_X(eps, {T.k}) = {bound!r}",
               "each row keeps its largest atom; cost ||T_y|| - max|a|"])


def construct_rz(T: OperatorMatrix, eps: float) -> tuple[WCMapModel, Certificate]:
    """A weighted composition map within ``sqrt(17 eps / 2)`` of T, for eps < 2/17.

    Above ``r9 = sqrt(9 eps / 2)`` each row has a unique atom with more than
    half its mass.  Where that atom is constant on a component the row is
    replaced by ``(T1)(y)`` at the atom, costing at most
    ``t - sqrt(t^2 - 4 eps) <= 2 sqrt(eps)``.  On a component where it is not
    constant, rows with norm at most ``r17 = sqrt(17 eps / 2)`` are dropped and
    the remaining pieces are treated the same way.
    """
    if eps >= TWO_SEVENTEENTHS:
        raise ValueError(f"construct_rz needs eps < 2/17, got {eps}")
    _check_pre(T, eps, TWO_SEVENTEENTHS)
    r9 = math.sqrt(9 * eps / 2)
    r17 = math.sqrt(17 * eps / 2)
    norms = T.row_norms
    absrows = np.abs(T.rows)
    ones = T.rows.sum(axis=1)
    a = np.zeros(T.n_vertices)
    h: list = [None] * T.n_vertices
    notes = [f"rows with norm <= r9={r9!r} zeroed at cost <= r9 < r17"]

    def atom(y):
        x = int(np.argmax(absrows[y]))
        return x if absrows[y, x] > norms[y] / 2 else None

    def label(comp):
        xs = {atom(y) for y in comp}
        return xs.pop() if len(xs) == 1 and None not in xs else None

    def keep(comp, u):
        for y in comp:
            a[y], h[y] = ones[y], u

    for comp in T.graph_y.components(norms > r9 + LEVEL_GUARD):
        u = label(comp)
        if u is not None:
            keep(comp, u)
            notes.append(f"component {comp}: h_T = {u}, cost <= t - sqrt(t^2-4eps)")
            continue
        inner = np.zeros(T.n_vertices, dtype=bool)
        inner[list(comp)] = norms[list(comp)] > r17
        notes.append(f"component {comp}: h_T not constant; shell r9 < t <= r17 zeroed")
        for sub in T.graph_y.components(inner):
            u = label(sub)
            if u is None:
                notes.append(f"component {sub}: h_T not constant above r17; zeroed")
                continue
            keep(sub, u)
            notes.append(f"component {sub}: h_T = {u}, cost <= t - sqrt(t^2-4eps)")
    S = _assemble(T, a, h)
    return S, Certificate.check("construct_rz", r17, operator_distance(T, S), notes=notes)
