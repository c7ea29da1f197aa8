"""Discrete directed multigraphs with edge multiplicities in N or infinity.

``mult[(u, v)]`` counts edges with source ``u`` and range ``v``. In the graph
correspondence the right action and inner product go through the source map
and the left action through the range map, so ``lambda(delta_v)`` is compact
exactly when ``v`` receives finitely many edges.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import matcore as mc
from .correspondence import Correspondence
from .cstar import MultiMatrixAlgebra
from .hilbmod import HilbertModule


class _Infinity:
    """Symbolic infinite multiplicity. Never converted to a number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


class InfiniteMultiplicityError(ValueError):
    pass


def _add(a, b):
    if a is INF or b is INF:
        return INF
    return a + b


@dataclass(frozen=True)
class Multigraph:
    vertices: tuple[str, ...]
    mult: Mapping[tuple[str, str], object]

    def __post_init__(self):
        verts = tuple(sorted(set(self.vertices)))
        clean = {}
        for (u, v), k in dict(self.mult).items():
            if u not in verts or v not in verts:
                raise ValueError(f"edge ({u}, {v}) uses an undeclared vertex")
            if k is not INF:
                if int(k) != k or k < 0:
                    raise ValueError(f"multiplicity of ({u}, {v}) must be a count or INF, got {k!r}")
                k = int(k)
                if k == 0:
                    continue
            clean[(u, v)] = k
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "mult", dict(sorted(clean.items())))

    def __hash__(self):
        return hash((self.vertices, tuple(self.mult.items())))

    @classmethod
    def from_edges(cls, vertices: Iterable[str], edges: Iterable[tuple[str, str, object]]) -> "Multigraph":
        mult: dict = {}
        for u, v, k in edges:
            mult[(u, v)] = _add(mult.get((u, v), 0), k)
        verts = set(vertices) | {u for u, _ in mult} | {v for _, v in mult}
        return cls(tuple(verts), mult)

    def multiplicity(self, u: str, v: str):
        return self.mult.get((u, v), 0)

    def indegree(self, v: str):
        total = 0
        for (_, w), k in self.mult.items():
            if w == v:
                total = _add(total, k)
        return total

    def outdegree(self, u: str):
        total = 0
        for (w, _), k in self.mult.items():
            if w == u:
                total = _add(total, k)
        return total

    def is_finite(self) -> bool:
        return all(k is not INF for k in self.mult.values())

    def edges(self) -> list[tuple[str, str, int]]:
        """Edges ``(source, range, copy)`` in the fixed order used by the correspondence."""
        if not self.is_finite():
            raise InfiniteMultiplicityError("graph has infinite multiplicities; truncate first")
        return [(u, v, k) for (u, v), n in self.mult.items() for k in range(n)]


def e0_fin(g: Multigraph) -> set[str]:
    """Vertices receiving finitely many edges (sources and isolated vertices included)."""
    return {v for v in g.vertices if g.indegree(v) is not INF}


def katsura_support(g: Multigraph) -> set[str]:
    """Regular vertices: ``0 < indegree < infinity``."""
    return {v for v in g.vertices if g.indegree(v) is not INF and g.indegree(v) > 0}


@dataclass(frozen=True)
class GraphVerdict:
    hyperrigid: bool
    offending: tuple[str, ...]
    e0_fin: tuple[str, ...]
    katsura_support: tuple[str, ...]

    def __bool__(self):
        return self.hyperrigid


def is_hyperrigid(g: Multigraph) -> GraphVerdict:
    """Hyperrigid exactly when no vertex receives infinitely many edges."""
    fin = e0_fin(g)
    offending = tuple(v for v in g.vertices if v not in fin)
    return GraphVerdict(not offending, offending, tuple(sorted(fin)), tuple(sorted(katsura_support(g))))


def truncate(g: Multigraph, cap: int) -> Multigraph:
    if cap < 1:
        raise ValueError("truncation cap must be >= 1")
    return Multigraph(g.vertices, {e: (cap if k is INF else k) for e, k in g.mult.items()})


def disjoint_union(g: Multigraph, h: Multigraph, tags: tuple[str, str] = ("a", "b")) -> Multigraph:
    """Disjoint union with vertices relabelled ``tag:label``."""
    ta, tb = tags
    verts = [f"{ta}:{v}" for v in g.vertices] + [f"{tb}:{v}" for v in h.vertices]
    mult = {(f"{ta}:{u}", f"{ta}:{v}"): k for (u, v), k in g.mult.items()}
    mult.update({(f"{tb}:{u}", f"{tb}:{v}"): k for (u, v), k in h.mult.items()})
    return Multigraph(tuple(verts), mult)


def graph_correspondence(g: Multigraph) -> Correspondence:
    """``X(E)`` over ``C(E^0)``: one 1x1 algebra block per vertex (lexicographic order).

    Module block ``v`` has one row per edge with source ``v``; ``lambda(delta_u)``
    is the diagonal projection onto edges with range ``u``.
    """
    edges = g.edges()
    algebra = MultiMatrixAlgebra(tuple(1 for _ in g.vertices))
    by_source = {v: [e for e in edges if e[0] == v] for v in g.vertices}
    rows = []
    for v in g.vertices:
        out_edges = by_source[v]
        ident = mc.eye(len(out_edges))
        row = []
        for u in g.vertices:
            cols = [k for k, e in enumerate(out_edges) if e[1] == u]
            row.append(ident[:, cols] if cols else mc.zeros(len(out_edges), 0))
        rows.append(tuple(row))
    module = HilbertModule(algebra, tuple(len(by_source[v]) for v in g.vertices))
    return Correspondence(module, tuple(rows))


def vectorize(g: Multigraph, f: Mapping[tuple[str, str, int], complex]):
    """Module element of ``graph_correspondence(g)`` for a function on edges."""
    corr = graph_correspondence(g)
    blocks = []
    for v in g.vertices:
        col = [f.get(e, 0.0) for e in g.edges() if e[0] == v]
        blocks.append(np.array(col, dtype=np.complex128).reshape(len(col), 1))
    return corr.module.element(blocks)
