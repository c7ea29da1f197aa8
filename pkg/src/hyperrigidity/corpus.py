"""Seeded generators for test corpora of correspondences and graphs."""
from __future__ import annotations

import numpy as np

from . import matcore as mc
from .correspondence import Correspondence
from .cstar import MultiMatrixAlgebra
from .graph import INF, Multigraph

KINDS = ("unital", "subunital", "zero", "mixed")


def random_correspondence(
    rng: np.random.Generator,
    kind: str = "mixed",
    max_blocks: int = 3,
    max_size: int = 3,
    max_mult: int = 4,
    rotate: bool = True,
) -> Correspondence:
    """A random correspondence whose left action is of the requested kind.

    ``unital``: every module block is exhausted by the left action.
    ``subunital``: at least one nonzero block keeps a degenerate part.
    ``zero``: the left action vanishes on a nonzero module.
    ``mixed``: each module block independently unital, sub-unital or zero.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    while True:
        b = int(rng.integers(1, max_blocks + 1))
        sizes = tuple(int(s) for s in rng.integers(1, max_size + 1, size=b))
        cmat = np.zeros((b, b), dtype=int)
        mult = []
        modes = []
        for i in range(b):
            mode = kind if kind != "mixed" else str(rng.choice(["unital", "subunital", "zero"]))
            modes.append(mode)
            if mode != "zero":
                for j in range(b):
                    if rng.random() < 0.6:
                        cmat[i, j] = int(rng.integers(0, max_mult // sizes[j] + 1))
            used = int(cmat[i] @ np.array(sizes))
            if mode == "unital":
                mult.append(used)
            else:
                mult.append(int(rng.integers(used + 1, max_mult + 1)) if used < max_mult else -1)
        if any(m < 0 or m > max_mult for m in mult):
            continue
        if kind == "unital" and sum(mult) == 0:
            continue
        if kind in ("subunital", "zero") and not any(
            mode != "unital" and m > 0 for mode, m in zip(modes, mult)
        ):
            continue
        if kind == "subunital" and not cmat.any():
            continue
        unitaries = [mc.random_unitary(rng, m) for m in mult] if rotate else None
        return Correspondence.from_multiplicities(MultiMatrixAlgebra(sizes), mult, cmat, unitaries)


def acceptance_corpus(n: int = 240, seed: int = 20240101) -> list[tuple[str, Correspondence]]:
    """``n`` correspondences cycling through unital, sub-unital, zero and mixed actions."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n):
        kind = KINDS[k % len(KINDS)]
        out.append((kind, random_correspondence(rng, kind)))
    return out


def cycle_graph(n: int) -> Multigraph:
    verts = [f"v{k}" for k in range(n)]
    return Multigraph.from_edges(verts, [(verts[k], verts[(k + 1) % n], 1) for k in range(n)])


def complete_graph(n: int, loops: bool = True) -> Multigraph:
    verts = [f"v{k}" for k in range(n)]
    return Multigraph.from_edges(
        verts, [(u, v, 1) for u in verts for v in verts if loops or u != v]
    )


def random_multigraph(rng: np.random.Generator, max_vertices: int = 5, max_mult: int = 3,
                      density: float = 0.4) -> Multigraph:
    n = int(rng.integers(1, max_vertices + 1))
    verts = [f"v{k}" for k in range(n)]
    edges = [
        (u, v, int(rng.integers(1, max_mult + 1)))
        for u in verts for v in verts if rng.random() < density
    ]
    return Multigraph.from_edges(verts, edges)


def with_infinite_receiver(g: Multigraph, rng: np.random.Generator) -> Multigraph:
    """Add an infinite bundle of edges into a random vertex."""
    v = g.vertices[int(rng.integers(len(g.vertices)))]
    u = g.vertices[int(rng.integers(len(g.vertices)))]
    mult = dict(g.mult)
    mult[(u, v)] = INF
    return Multigraph(g.vertices, mult)
