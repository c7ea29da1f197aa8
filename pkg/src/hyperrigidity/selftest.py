"""Built-in acceptance corpus run by ``hyperrigidity selftest``."""
from __future__ import annotations

import numpy as np

from . import graph as gr
from .corpus import acceptance_corpus, complete_graph, cycle_graph, random_multigraph, with_infinite_receiver
from .correspondence import Correspondence, is_hyperrigid
from .cstar import MultiMatrixAlgebra
from .repcert import certificate


def _check_corpus(n: int) -> tuple[bool, str]:
    bad = 0
    lo, hi = float("inf"), 0.0
    for _, c in acceptance_corpus(n, seed=7):
        v = is_hyperrigid(c).hyperrigid
        rep = certificate(c, 2, 4)
        if v:
            hi = max(hi, rep.defect)
            bad += rep.defect > 1e-10
        else:
            lo = min(lo, rep.defect)
            bad += rep.defect < 0.1
        bad += v != rep.verdict
    return bad == 0, f"{n} correspondences, max hyperrigid defect {hi:.2e}, min degenerate defect {lo:.3f}"


def _check_witness() -> tuple[bool, str]:
    c = Correspondence.from_multiplicities(MultiMatrixAlgebra((1,)), [2], [[1]])
    v = is_hyperrigid(c)
    d = certificate(c, 2, 4).pair_defect((0, 1, 0), (0, 1, 0))
    return (not v.hyperrigid) and abs(d - 1) <= 1e-10, f"defect at (e2, e2) = {d:.12f}"


def _check_graphs() -> tuple[bool, str]:
    rng = np.random.default_rng(11)
    graphs = [cycle_graph(k) for k in (1, 3, 5)] + [complete_graph(k) for k in (2, 3)]
    graphs += [random_multigraph(rng) for _ in range(10)]
    ok = all(
        gr.is_hyperrigid(g).hyperrigid and is_hyperrigid(gr.graph_correspondence(g)).hyperrigid
        for g in graphs
    )
    inf = with_infinite_receiver(graphs[2], rng)
    ok = ok and not gr.is_hyperrigid(inf).hyperrigid
    ok = ok and all(is_hyperrigid(gr.graph_correspondence(gr.truncate(inf, cap))).hyperrigid for cap in (1, 2, 5))
    return ok, f"{len(graphs)} finite graphs, one infinite receiver with truncations 1, 2, 5"


def run_selftest(n: int = 60, out=print) -> bool:
    checks = [
        ("structural verdict equals certificate verdict", lambda: _check_corpus(n)),
        ("canonical degenerate witness", _check_witness),
        ("graph criterion, both code paths", _check_graphs),
    ]
    all_ok = True
    for name, fn in checks:
        ok, detail = fn()
        all_ok &= ok
        out(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return all_ok
