"""Builders for the extremal instances, each bundled with its expected facts.

Instances that discretise a connected space X (tripods) are tagged
``x_kind="sampled-continuum"``: their X is a finite sample of a continuum, so
statements that need a genuinely finite X do not apply to them.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .bounds import o_X, o_prime_X, omega
from .calculus import epsilon_exact
from .functionals import extremal_functional
from .model import InstanceBundle, OperatorMatrix, SpaceX, TopGraphY

SQRT2_2 = math.sqrt(2) / 2
PI0 = 0.5 - math.sqrt(2) / 4


def _check_eps(eps: float, hi: float = 0.25) -> None:
    if not 0 < eps < hi:
        raise ValueError(f"eps must lie in (0, {hi:.12g}), got {eps}")


def _check_int(name: str, value, lo: int) -> int:
    if int(value) != value or value < lo:
        raise ValueError(f"{name} must be an integer >= {lo}, got {value}")
    return int(value)


class _Builder:
    """Accumulates X points, Y vertices, edges and sparse row entries."""

    def __init__(self):
        self.xs: dict = {}
        self.ys: dict = {}
        self.edges: set = set()
        self.entries: dict = {}

    def x(self, name) -> int:
        return self.xs.setdefault(name, len(self.xs))

    def y(self, name) -> int:
        return self.ys.setdefault(name, len(self.ys))

    def edge(self, a, b) -> None:
        i, j = self.y(a), self.y(b)
        self.edges.add((min(i, j), max(i, j)))

    def set(self, yname, xname, w: float) -> None:
        self.entries[(self.y(yname), self.x(xname))] = w

    def operator(self) -> OperatorMatrix:
        rows = np.zeros((len(self.ys), len(self.xs)))
        for (i, j), w in self.entries.items():
            rows[i, j] = w
        return OperatorMatrix(rows, SpaceX(tuple(self.xs)),
                              TopGraphY(tuple(self.ys), frozenset(self.edges)))


def gen_recero(n: int, eps: float, m: int = 2) -> InstanceBundle:
    """Path-Y instance at exact distance ``o'_X(eps, n)`` from the WCMs.

    One end carries ``c`` times the uniform measure on the n points, the other
    end a point mass; every other row is zero.
    """
    n = _check_int("n", n, 2)
    m = _check_int("m", m, 2)
    _check_eps(eps)
    if n % 2:
        c = min(2 * n * math.sqrt(eps) / math.sqrt(n * n - 1), 1.0)
    else:
        c = 2 * math.sqrt(eps)
    rows = np.zeros((m, n))
    rows[0, :] = c / n
    rows[-1, 0] = 1.0
    T = OperatorMatrix(rows, SpaceX.of_size(n), TopGraphY.path(m))
    exact_eps = c * c * omega(n) if n % 2 else c * c / 4
    return InstanceBundle(
        T, expected_eps=exact_eps, expected_dist=(1 - 1 / n) * c,
        provenance=f"recero(n={n}, eps={eps!r}, m={m})",
        meta={"eps_bound": eps, "o_prime_X": o_prime_X(eps, n)})


def _interval_weights(eps: float, t: float) -> tuple[float, float]:
    r = 2 * math.sqrt(eps)
    s = abs(t)
    alpha = r + (1 - r) * s
    beta = 1 + (1 / math.sqrt(1 - 4 * eps) - 1) * s
    # at |t| = 1 the product below is 1 in exact arithmetic
    spread = 1.0 if s == 1 else beta * math.sqrt(max(alpha * alpha - 4 * eps, 0.0))
    if spread > alpha:
        raise ArithmeticError(f"profile violates beta*sqrt(alpha^2-4eps) <= alpha at t={t}")
    sg = float(np.sign(t))
    return (alpha + sg * spread) / 2, (alpha - sg * spread) / 2


def gen_interval(eps: float, m: int = 201) -> InstanceBundle:
    """Mesh of an operator on [-1, 1] with defect eps and distance ``2 sqrt(eps)``.

    Rows move continuously from a point mass at A (t = 1) to one at B
    (t = -1) through ``(sqrt(eps), sqrt(eps))`` at t = 0.
    """
    m = _check_int("m", m, 3)
    if m % 2 == 0:
        raise ValueError("m must be odd so that the mesh contains t = 0")
    _check_eps(eps)
    ts = [(2 * j - (m - 1)) / (m - 1) for j in range(m)]
    rows = np.array([_interval_weights(eps, t) for t in ts])
    graph = TopGraphY(tuple(f"t={t:.12g}" for t in ts),
                      frozenset((j, j + 1) for j in range(m - 1)))
    T = OperatorMatrix(rows, SpaceX(("A", "B")), graph)
    return InstanceBundle(T, expected_eps=eps, expected_dist=2 * math.sqrt(eps),
                          provenance=f"interval(eps={eps!r}, m={m})")


_LEGS = ("A", "B", "C")


def _tripod_builder(n: int, m: int, weight) -> _Builder:
    """Rows of the tripod operator scaled by ``weight(kind, t)``.

    X has three tripods with centres D0, D1, D2; tripod i reaches the outer
    point ``E{n}`` on leg ``_LEGS[i]`` and ``E0`` on the other two, so every
    E0 lies in two tripods and every E{n} in one.  X also has the segments
    E0 -> E'0 -> E''0 and E{n} -> E'{n}.  Y is the centre tripod D0 -> E0 with
    the same outer segments E0 -> E'0 -> E''0.
    """
    b = _Builder()
    ends = {E: (f"{E}{n}", f"{E}0") for E in _LEGS}

    def leg_x(i, E, j):
        if j == 0:
            return f"D{i}"
        if j == m:
            return ends[E][0] if _LEGS[i] == E else ends[E][1]
        return f"W{i}:{E}:{j}/{m}"

    def outer_x(E, j):
        return f"{E}0" if j == 0 else f"{E}0-{E}''0:{j}/{2 * m}"

    def inner_x(E, j):
        return f"{E}{n}" if j == 0 else f"{E}{n}-{E}'{n}:{j}/{m}"

    def leg_y(E, j):
        return "D0" if j == 0 else (f"{E}0" if j == m else f"W0:{E}:{j}/{m}")

    def outer_y(E, j):
        return f"{E}0" if j == 0 else f"{E}0-{E}''0:{j}/{2 * m}"

    # register X in a stable order: tripods, then outer and inner segments
    for i in range(3):
        for E in _LEGS:
            for j in range(m + 1):
                b.x(leg_x(i, E, j))
    for E in _LEGS:
        for j in range(2 * m + 1):
            b.x(outer_x(E, j))
        for j in range(m + 1):
            b.x(inner_x(E, j))

    for E in _LEGS:
        for j in range(m):
            t = j / m
            y = leg_y(E, j)
            w = weight("centre", t)
            for i in range(3):
                b.set(y, leg_x(i, E, j), w / 3)
            b.edge(y, leg_y(E, j + 1))
        for j in range(2 * m + 1):
            y = outer_y(E, j)
            if j <= m:
                t = j / m
                zeta = 2 / 3 + t / 3
                w = weight("blend", t)
                b.set(y, outer_x(E, j), w * zeta)
                if j < m:
                    b.set(y, inner_x(E, j), w * (1 - zeta))
            else:
                b.set(y, outer_x(E, j), weight("outer", (j - m) / m))
            if j < 2 * m:
                b.edge(y, outer_y(E, j + 1))
    return b


def _tripod_bundle(n, m, weight, name, eps) -> InstanceBundle:
    n = _check_int("n", n, 1)
    m = _check_int("m", m, 2)
    T = _tripod_builder(n, m, weight).operator()
    return InstanceBundle(T, expected_eps=eps, provenance=f"{name}(n={n}, m={m})",
                          meta={"x_kind": "sampled-continuum", "n": n, "m": m})


def gen_tripod(n: int, m: int = 4) -> InstanceBundle:
    """Norm-one averaging operator between tripod meshes with defect 2/9."""
    return _tripod_bundle(n, m, lambda kind, t: 1.0, "tripod", 2 / 9)


RHO0 = 3 / math.sqrt(17)


def gen_tripod_weighted(n: int, m: int = 4) -> InstanceBundle:
    """The tripod operator damped by ``3/sqrt(17)`` except near E''0; defect 2/17."""
    def rho(kind, t):
        return RHO0 + (1 - RHO0) * t if kind == "outer" else RHO0
    return _tripod_bundle(n, m, rho, "tripod-weighted", 2 / 17)


def gen_circles(N: int, m: int = 16, eps: Optional[float] = None) -> InstanceBundle:
    """N circle meshes chained by a path ending at a ``(sqrt2/2) delta_inf`` row.

    On circle n the row is ``(alpha + sqrt2/2)`` at 2n and ``-alpha`` at 2n-1,
    with alpha falling linearly in arc length from ``pi0`` at r_n to 0 at
    -r_n.  The defect is 1/8; with ``eps`` the instance is rescaled to it.
    """
    N = _check_int("N", N, 1)
    m = _check_int("m", m, 4)
    if m % 2:
        raise ValueError("m must be even so each circle mesh contains -r_n")
    b = _Builder()
    for i in range(1, 2 * N + 1):
        b.x(str(i))
    b.x("inf")
    half = m // 2
    for n in range(1, N + 1):
        for j in range(m):
            a = PI0 * (1 - min(j, m - j) / half)
            y = f"C{n}:{j}/{m}"
            b.set(y, str(2 * n), a + SQRT2_2)
            if a:
                b.set(y, str(2 * n - 1), -a)
            b.edge(y, f"C{n}:{(j + 1) % m}/{m}")
    for n in range(1, N + 1):
        start = f"C{n}:{half}/{m}"
        end = f"C{n + 1}:{half}/{m}" if n < N else "0"
        nxt = str(2 * n + 2) if n < N else "inf"
        prev = start
        for j in range(1, half):
            t = 1 - j / half
            y = f"S{n}:{j}/{half}"
            b.set(y, str(2 * n), SQRT2_2 * t)
            b.set(y, nxt, SQRT2_2 * (1 - t))
            b.edge(prev, y)
            prev = y
        if end == "0":
            b.set("0", "inf", SQRT2_2)
        b.edge(prev, end)
    base = InstanceBundle(b.operator(), expected_eps=1 / 8,
                          provenance=f"circles(N={N}, m={m})")
    return base if eps is None else gen_scaled(base, eps)


def gen_scaled(base: InstanceBundle, eps_target: float) -> InstanceBundle:
    """Scale ``base`` by ``sqrt(eps_target / eps(base))`` and add an isolated identity row.

    The new point keeps the norm at 1, the defect becomes ``eps_target`` and
    the distance scales with the same factor.
    """
    e_base, _, _ = epsilon_exact(base.operator)
    if not 0 < eps_target <= e_base:
        raise ValueError(f"target {eps_target} must lie in (0, {e_base!r}]")
    g = math.sqrt(eps_target / e_base)
    T = base.operator
    rows = np.zeros((T.n_vertices + 1, T.k + 1))
    rows[:-1, :-1] = g * T.rows
    rows[-1, -1] = 1.0
    new_x = _fresh("x*", T.space_x.points)
    new_y = _fresh("y*", T.graph_y.vertices)
    S = OperatorMatrix(rows, SpaceX(T.space_x.points + (new_x,)),
                       TopGraphY(T.graph_y.vertices + (new_y,), T.graph_y.edges))
    meta = dict(base.meta)
    meta["gamma"] = g
    if "eps_bound" in meta:
        meta["eps_bound"] = g * g * meta["eps_bound"]
    dist = None if base.expected_dist is None else g * base.expected_dist
    return InstanceBundle(S, expected_eps=eps_target, expected_dist=dist,
                          provenance=f"scaled({base.provenance}, eps={eps_target!r})",
                          meta=meta)


def _fresh(stem: str, taken) -> str:
    taken = set(taken)
    name, i = stem, 0
    while name in taken:
        i += 1
        name = f"{stem}{i}"
    return name


def gen_extremal_functional(k: int, eps: float) -> InstanceBundle:
    """Single-vertex instance at distance ``o_X(eps, k)``."""
    phi = extremal_functional(k, eps)
    return InstanceBundle(phi.as_operator(), expected_dist=o_X(eps, k),
                          provenance=f"extremal-functional(k={k}, eps={eps!r})",
                          meta={"eps_bound": eps})


FAMILIES = ("recero", "interval", "tripod", "tripod-weighted", "circles",
            "extremal-functional", "scaled")
