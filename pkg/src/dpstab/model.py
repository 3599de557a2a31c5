"""Finite models of bounded operators C(X) -> C(Y).

X is an ordered list of points carrying the discrete topology.  Y is a finite
simple graph whose edges stand in for its topology: a map from a subset of Y
into the discrete X is continuous exactly when it is constant on every
connected piece of the induced subgraph.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Hashable, Iterable, Optional

import jsonschema
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

# Slack used by certificates and preconditions; the model layer itself is exact.
TOL = 1e-12


class ModelError(ValueError):
    """Raised when an instance violates a structural invariant."""


def _readonly(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ModelError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ModelError("entries must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpaceX:
    points: tuple

    def __post_init__(self):
        pts = tuple(self.points)
        if not pts:
            raise ModelError("X needs at least one point")
        if len(set(pts)) != len(pts):
            raise ModelError("point identifiers in X must be distinct")
        object.__setattr__(self, "points", pts)

    @classmethod
    def of_size(cls, k: int, prefix: str = "x") -> "SpaceX":
        return cls(tuple(f"{prefix}{i + 1}" for i in range(k)))

    def __len__(self) -> int:
        return len(self.points)

    def index(self, point: Hashable) -> int:
        return self.points.index(point)


@dataclass(frozen=True)
class TopGraphY:
    """Finite simple graph; ``edges`` holds index pairs ``(i, j)`` with ``i < j``."""

    vertices: tuple
    edges: frozenset = frozenset()

    def __post_init__(self):
        verts = tuple(self.vertices)
        if not verts:
            raise ModelError("Y needs at least one vertex")
        if len(set(verts)) != len(verts):
            raise ModelError("vertex identifiers in Y must be distinct")
        raw = list(self.edges)
        norm = []
        for e in raw:
            i, j = (int(v) for v in e)
            if i == j:
                raise ModelError(f"loop at vertex {i}")
            if not (0 <= i < len(verts) and 0 <= j < len(verts)):
                raise ModelError(f"edge ({i}, {j}) has an endpoint outside Y")
            norm.append((min(i, j), max(i, j)))
        if len(set(norm)) != len(norm):
            raise ModelError("duplicate edge")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def edgeless(cls, n: int, prefix: str = "y") -> "TopGraphY":
        return cls(tuple(f"{prefix}{i + 1}" for i in range(n)))

    @classmethod
    def singleton(cls) -> "TopGraphY":
        return cls(("y",))

    @classmethod
    def path(cls, m: int, prefix: str = "y") -> "TopGraphY":
        return cls(tuple(f"{prefix}{i + 1}" for i in range(m)),
                   frozenset((i, i + 1) for i in range(m - 1)))

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def is_edgeless(self) -> bool:
        return not self.edges

    @cached_property
    def _edge_array(self) -> np.ndarray:
        if not self.edges:
            return np.zeros((0, 2), dtype=np.intp)
        return np.array(sorted(self.edges), dtype=np.intp)

    def discrete(self) -> "TopGraphY":
        return TopGraphY(self.vertices)

    def components(self, mask) -> list[tuple[int, ...]]:
        """Connected components of the subgraph induced by ``mask``.

        Each component is sorted; components are ordered by their first vertex.
        """
        mask = np.asarray(mask, dtype=bool)
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            return []
        e = self._edge_array
        e = e[mask[e[:, 0]] & mask[e[:, 1]]]
        pos = np.full(len(self.vertices), -1, dtype=np.intp)
        pos[idx] = np.arange(idx.size)
        adj = coo_matrix((np.ones(len(e)), (pos[e[:, 0]], pos[e[:, 1]])),
                         shape=(idx.size, idx.size))
        ncomp, labels = connected_components(adj, directed=False)
        comps = [tuple(int(v) for v in idx[labels == c]) for c in range(ncomp)]
        comps.sort(key=lambda c: c[0])
        return comps


def _l1_rows(rows: np.ndarray) -> np.ndarray:
    # Every row-norm and row-distance goes through here so equal inputs give
    # bit-identical sums.
    return np.abs(rows).sum(axis=1)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """T as one weight row per Y-vertex: ``(Tf)(y) = sum_i rows[y, i] f(x_i)``."""

    rows: np.ndarray
    space_x: SpaceX
    graph_y: TopGraphY

    def __post_init__(self):
        rows = _readonly(self.rows, 2)
        if rows.shape != (len(self.graph_y), len(self.space_x)):
            raise ModelError(
                f"rows have shape {rows.shape}, expected "
                f"({len(self.graph_y)}, {len(self.space_x)})")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(cls, rows, graph_y: Optional[TopGraphY] = None,
                  space_x: Optional[SpaceX] = None) -> "OperatorMatrix":
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if space_x is None:
            space_x = SpaceX.of_size(rows.shape[1])
        if graph_y is None:
            graph_y = TopGraphY.edgeless(rows.shape[0])
        return cls(rows, space_x, graph_y)

    @property
    def k(self) -> int:
        return len(self.space_x)

    @property
    def n_vertices(self) -> int:
        return len(self.graph_y)

    @cached_property
    def row_norms(self) -> np.ndarray:
        """||T_y|| for every vertex (total variation of the row measure)."""
        out = _l1_rows(self.rows)
        out.setflags(write=False)
        return out

    def level_set(self, r: float) -> np.ndarray:
        """Boolean mask of Y_r = {y : ||T_y|| > r}."""
        return self.row_norms > r

    def row(self, y: int) -> "FunctionalVec":
        return FunctionalVec(self.rows[y])

    def apply(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.k,):
            raise ModelError(f"f must have {self.k} entries")
        return self.rows @ f

    def scaled(self, c: float) -> "OperatorMatrix":
        return OperatorMatrix(c * self.rows, self.space_x, self.graph_y)

    def with_graph(self, graph_y: TopGraphY) -> "OperatorMatrix":
        return OperatorMatrix(self.rows, self.space_x, graph_y)

    def as_discrete(self) -> "OperatorMatrix":
        """Same rows over the edgeless graph on the same vertices."""
        return self.with_graph(self.graph_y.discrete())


@dataclass(frozen=True, eq=False)
class FunctionalVec:
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _readonly(self.weights, 1))

    @classmethod
    def delta(cls, k: int, i: int) -> "FunctionalVec":
        w = np.zeros(k)
        w[i] = 1.0
        return cls(w)

    @property
    def k(self) -> int:
        return self.weights.size

    @property
    def norm(self) -> float:
        return float(_l1_rows(self.weights[None, :])[0])

    def as_operator(self, space_x: Optional[SpaceX] = None) -> OperatorMatrix:
        space_x = space_x or SpaceX.of_size(self.k)
        return OperatorMatrix(self.weights[None, :], space_x, TopGraphY.singleton())


@dataclass(frozen=True, eq=False)
class WCMapModel:
    """Weighted composition map ``(Sf)(y) = a(y) f(h(y))``.

    ``h[y]`` is an index into X, defined exactly where ``a[y] != 0`` and
    constant on each component of the cozero set of ``a``.
    """

    a: np.ndarray
    h: tuple
    space_x: SpaceX
    graph_y: TopGraphY

    def __post_init__(self):
        a = _readonly(self.a, 1)
        h = tuple(None if v is None else int(v) for v in self.h)
        n = len(self.graph_y)
        if a.size != n or len(h) != n:
            raise ModelError("a and h need one entry per Y-vertex")
        for y, (ay, hy) in enumerate(zip(a, h)):
            if (ay != 0) != (hy is not None):
                raise ModelError(f"h must be defined exactly on c(a) (vertex {y})")
            if hy is not None and not 0 <= hy < len(self.space_x):
                raise ModelError(f"h({y}) = {hy} is not a point of X")
        for comp in self.graph_y.components(a != 0):
            if len({h[y] for y in comp}) > 1:
                raise ModelError(
                    f"h is not constant on the component {comp} of c(a)")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "h", h)

    @classmethod
    def zero(cls, space_x: SpaceX, graph_y: TopGraphY) -> "WCMapModel":
        return cls(np.zeros(len(graph_y)), (None,) * len(graph_y), space_x, graph_y)

    @property
    def cozero(self) -> np.ndarray:
        return self.a != 0


def wcm_apply(S: WCMapModel, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (len(S.space_x),):
        raise ModelError(f"f must have {len(S.space_x)} entries")
    out = np.zeros(len(S.graph_y))
    for y, hy in enumerate(S.h):
        if hy is not None:
            out[y] = S.a[y] * f[hy]
    return out


def wcm_as_matrix(S: WCMapModel) -> OperatorMatrix:
    rows = np.zeros((len(S.graph_y), len(S.space_x)))
    for y, hy in enumerate(S.h):
        if hy is not None:
            rows[y, hy] = S.a[y]
    return OperatorMatrix(rows, S.space_x, S.graph_y)


def operator_distance(T: OperatorMatrix, S) -> float:
    """||T - S|| = max_y ||T_y - S_y||_1 for a matrix or WCMapModel ``S``."""
    if isinstance(S, WCMapModel):
        S = wcm_as_matrix(S)
    if S.rows.shape != T.rows.shape:
        raise ModelError("operators act between different spaces")
    if T.n_vertices == 0:
        return 0.0
    return float(_l1_rows(T.rows - S.rows).max())


PASS, FAIL, NOT_APPLICABLE = "pass", "fail", "not-applicable"


@dataclass(frozen=True)
class Certificate:
    claim_source: str
    claimed_bound: float
    achieved_value: float
    status: str
    tolerance: float = TOL
    notes: tuple = ()

    def __post_init__(self):
        if self.status not in (PASS, FAIL, NOT_APPLICABLE):
            raise ModelError(f"unknown status {self.status!r}")
        if self.status != NOT_APPLICABLE:
            holds = self.achieved_value <= self.claimed_bound + self.tolerance
            if holds != (self.status == PASS):
                raise ModelError("status disagrees with the certified inequality")
        object.__setattr__(self, "notes", tuple(self.notes))

    @classmethod
    def check(cls, claim_source: str, claimed_bound: float, achieved_value: float,
              tolerance: float = TOL, notes: Iterable[str] = ()) -> "Certificate":
        ok = achieved_value <= claimed_bound + tolerance
        return cls(claim_source, float(claimed_bound), float(achieved_value),
                   PASS if ok else FAIL, tolerance, tuple(notes))

    @classmethod
    def not_applicable(cls, claim_source: str, reason: str) -> "Certificate":
        return cls(claim_source, math.nan, math.nan, NOT_APPLICABLE, TOL, (reason,))

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    def to_dict(self) -> dict:
        def num(v):
            return None if math.isnan(v) else v
        return {"claim_source": self.claim_source,
                "claimed_bound": num(self.claimed_bound),
                "achieved_value": num(self.achieved_value),
                "status": self.status,
                "tolerance": self.tolerance,
                "notes": list(self.notes)}


INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["x_points", "y_graph", "rows"],
    "properties": {
        "x_points": {"type": "array", "minItems": 1,
                     "items": {"type": ["string", "integer"]}},
        "y_graph": {
            "type": "object",
            "required": ["vertices"],
            "properties": {
                "vertices": {"type": "array", "minItems": 1,
                             "items": {"type": ["string", "integer"]}},
                "edges": {"type": "array",
                          "items": {"type": "array", "minItems": 2, "maxItems": 2,
                                    "items": {"type": "integer", "minimum": 0}}},
            },
        },
        "rows": {"type": "array",
                 "items": {"type": "array", "items": {"type": "number"}}},
        "meta": {
            "type": "object",
            "properties": {
                "expected_eps": {"type": ["number", "null"]},
                "expected_dist": {"type": ["number", "null"]},
                "eps_bound": {"type": ["number", "null"]},
                "provenance": {"type": "string"},
                "x_kind": {"enum": ["finite", "sampled-continuum"]},
            },
        },
    },
}


@dataclass(frozen=True, eq=False)
class InstanceBundle:
    """An operator together with the facts its builder expects of it.

    ``meta`` carries extra keys: ``eps_bound`` (a proven upper bound for the
    defect when the exact value is not known in closed form) and ``x_kind``
    (``"sampled-continuum"`` when X is a mesh of a connected space rather than
    a genuinely finite space).
    """

    operator: OperatorMatrix
    expected_eps: Optional[float] = None
    expected_dist: Optional[float] = None
    provenance: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def space_x(self) -> SpaceX:
        return self.operator.space_x

    @property
    def graph_y(self) -> TopGraphY:
        return self.operator.graph_y

    @property
    def eps_bound(self) -> Optional[float]:
        return self.meta.get("eps_bound")

    @property
    def x_kind(self) -> str:
        return self.meta.get("x_kind", "finite")

    def to_dict(self) -> dict:
        T = self.operator
        meta = {"expected_eps": self.expected_eps,
                "expected_dist": self.expected_dist,
                "provenance": self.provenance}
        meta.update(self.meta)
        return {"x_points": list(T.space_x.points),
                "y_graph": {"vertices": list(T.graph_y.vertices),
                            "edges": [list(e) for e in sorted(T.graph_y.edges)]},
                "rows": T.rows.tolist(),
                "meta": meta}

    def to_json(self, indent: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(indent=1) + "\n")

    @classmethod
    def from_dict(cls, doc: Any) -> "InstanceBundle":
        try:
            jsonschema.validate(doc, INSTANCE_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ModelError(f"instance does not match schema: {exc.message}") from exc
        space = SpaceX(tuple(doc["x_points"]))
        g = doc["y_graph"]
        graph = TopGraphY(tuple(g["vertices"]), [tuple(e) for e in g.get("edges", [])])
        rows = doc["rows"]
        if len(rows) != len(graph) or any(len(r) != len(space) for r in rows):
            raise ModelError(f"rows must form a {len(graph)} x {len(space)} matrix")
        T = OperatorMatrix(np.array(rows, dtype=float).reshape(len(graph), len(space)),
                           space, graph)
        meta = dict(doc.get("meta", {}))
        exp_eps = meta.pop("expected_eps", None)
        exp_dist = meta.pop("expected_dist", None)
        prov = meta.pop("provenance", "")
        return cls(T, exp_eps, exp_dist, prov, meta)

    @classmethod
    def from_json(cls, text: str) -> "InstanceBundle":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelError(f"not valid JSON: {exc}") from exc
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path) -> "InstanceBundle":
        return cls.from_json(Path(path).read_text())

