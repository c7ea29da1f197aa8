"""Line-oriented input format and the JSON report format.

Correspondence documents::

    format-version 1
    algebra 2 1          # block sizes n_j
    module 3 1           # multiplicities m_i
    lambda 1 1 1         # c_ij: copies of algebra block j inside L(X) block i
    lambda-matrix 2 2    # explicit intertwiner V_ij, m_i rows follow
    1+0I

Graph documents::

    vertex v
    edge v v inf         # source, range, count or inf

Indices are 1-based. ``#`` starts a comment. Complex entries are written
``a``, ``bI``, ``a+bI`` or ``a-bI``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .correspondence import Correspondence
from .cstar import MultiMatrixAlgebra
from .graph import INF, Multigraph
from .hilbmod import HilbertModule

FORMAT_VERSION = 1
REPORT_FORMAT_VERSION = 1

KIND_CORRESPONDENCE = "algebra-correspondence"
KIND_GRAPH = "graph"

_NUMBER_CHARS = re.compile(r"^[0-9.eE+-]+$")


class ParseError(ValueError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


@dataclass
class CorrespondenceDoc:
    algebra: list[int]
    module: list[int]
    counts: dict[tuple[int, int], int] = field(default_factory=dict)
    matrices: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, CorrespondenceDoc):
            return NotImplemented
        return (
            self.algebra == other.algebra
            and self.module == other.module
            and self.counts == other.counts
            and self.matrices.keys() == other.matrices.keys()
            and all(np.array_equal(self.matrices[k], other.matrices[k]) for k in self.matrices)
        )


@dataclass
class GraphDoc:
    vertices: list[str]
    edges: list[tuple[str, str, object]] = field(default_factory=list)


@dataclass
class InputDocument:
    kind: str
    body: CorrespondenceDoc | GraphDoc


def parse_complex(token: str) -> complex:
    """Parse ``a``, ``bI``, ``a+bI`` or ``a-bI`` (``I`` alone means ``1I``)."""
    imaginary = token.endswith("I")
    body = token[:-1] if imaginary else token
    if imaginary and (body == "" or body[-1] in "+-"):
        body += "1"
    if not _NUMBER_CHARS.match(body):
        raise ValueError(f"malformed number {token!r}")
    if imaginary:
        body += "j"
    try:
        z = complex(body)
    except ValueError:
        raise ValueError(f"malformed number {token!r}") from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite number {token!r}")
    return z


def format_complex(z: complex) -> str:
    z = complex(z)
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}I"


def _tokens(line: str) -> list[tuple[str, int]]:
    """Whitespace-separated tokens with 1-based start columns, comments removed."""
    line = line.split("#", 1)[0]
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _int(tok: tuple[str, int], lineno: int, what: str, minimum: int = 0) -> int:
    text, col = tok
    try:
        value = int(text)
    except ValueError:
        raise ParseError(lineno, col, f"{what} must be an integer, got {text!r}") from None
    if value < minimum:
        raise ParseError(lineno, col, f"{what} must be >= {minimum}, got {value}")
    return value


def parse(text: str) -> InputDocument:
    """Parse a correspondence or graph document; errors carry line and column."""
    lines = [(n, _tokens(raw)) for n, raw in enumerate(text.splitlines(), 1)]
    lines = [(n, toks) for n, toks in lines if toks]
    if not lines:
        raise ParseError(1, 1, "empty document")
    kind = None
    algebra = module = None
    counts: dict = {}
    matrices: dict = {}
    vertices: list[str] = []
    edges: list = []
    edge_keys: set = set()
    pos = 0
    first = True

    def set_kind(k, n, col):
        nonlocal kind
        if kind is None:
            kind = k
        elif kind != k:
            raise ParseError(n, col, f"{k} directive in a {kind} document")

    while pos < len(lines):
        n, toks = lines[pos]
        pos += 1
        head, col = toks[0]
        args = toks[1:]
        if head == "format-version":
            if not first:
                raise ParseError(n, col, "format-version must be the first directive")
            if len(args) != 1 or args[0][0] != str(FORMAT_VERSION):
                raise ParseError(n, col, f"unsupported format version (expected {FORMAT_VERSION})")
        elif head == "algebra":
            set_kind(KIND_CORRESPONDENCE, n, col)
            if algebra is not None:
                raise ParseError(n, col, "duplicate algebra line")
            if not args:
                raise ParseError(n, col, "algebra needs at least one block size")
            algebra = [_int(t, n, "block size", 1) for t in args]
        elif head == "module":
            set_kind(KIND_CORRESPONDENCE, n, col)
            if algebra is None:
                raise ParseError(n, col, "module must follow algebra")
            if module is not None:
                raise ParseError(n, col, "duplicate module line")
            if len(args) != len(algebra):
                raise ParseError(n, col, f"module needs {len(algebra)} multiplicities, got {len(args)}")
            module = [_int(t, n, "multiplicity") for t in args]
        elif head in ("lambda", "lambda-matrix"):
            set_kind(KIND_CORRESPONDENCE, n, col)
            if module is None:
                raise ParseError(n, col, f"{head} must follow module")
            want = 3 if head == "lambda" else 2
            if len(args) != want:
                raise ParseError(n, col, f"{head} takes {want} arguments, got {len(args)}")
            i = _int(args[0], n, "module block", 1)
            j = _int(args[1], n, "algebra block", 1)
            if i > len(module):
                raise ParseError(n, args[0][1], f"module block {i} out of range")
            if j > len(algebra):
                raise ParseError(n, args[1][1], f"algebra block {j} out of range")
            key = (i, j)
            if head == "lambda":
                if key in counts:
                    raise ParseError(n, col, f"duplicate lambda line for ({i}, {j})")
                counts[key] = _int(args[2], n, "lambda multiplicity")
            else:
                if key in matrices:
                    raise ParseError(n, col, f"duplicate lambda-matrix for ({i}, {j})")
                rows = []
                for _ in range(module[i - 1]):
                    if pos >= len(lines):
                        raise ParseError(n, col, f"lambda-matrix ({i}, {j}) needs {module[i - 1]} rows")
                    rn, rtoks = lines[pos]
                    pos += 1
                    row = []
                    for tok, tcol in rtoks:
                        try:
                            row.append(parse_complex(tok))
                        except ValueError as exc:
                            raise ParseError(rn, tcol, str(exc)) from None
                    if rows and len(row) != len(rows[0]):
                        raise ParseError(rn, 1, "matrix rows have different lengths")
                    if len(row) % algebra[j - 1]:
                        raise ParseError(rn, 1, f"row length must be a multiple of {algebra[j - 1]}")
                    rows.append(row)
                width = len(rows[0]) if rows else 0
                matrices[key] = np.array(rows, dtype=np.complex128).reshape(module[i - 1], width)
        elif head == "vertex":
            set_kind(KIND_GRAPH, n, col)
            if len(args) != 1:
                raise ParseError(n, col, "vertex takes one label")
            label = args[0][0]
            if label in vertices:
                raise ParseError(n, args[0][1], f"duplicate vertex {label!r}")
            vertices.append(label)
        elif head == "edge":
            set_kind(KIND_GRAPH, n, col)
            if len(args) != 3:
                raise ParseError(n, col, "edge takes source, range and count")
            (src, scol), (dst, dcol), (cnt, ccol) = args
            for label, lcol in ((src, scol), (dst, dcol)):
                if label not in vertices:
                    raise ParseError(n, lcol, f"undeclared vertex {label!r}")
            if (src, dst) in edge_keys:
                raise ParseError(n, col, f"duplicate edge line {src} -> {dst}")
            edge_keys.add((src, dst))
            count = INF if cnt == "inf" else _int((cnt, ccol), n, "edge count")
            edges.append((src, dst, count))
        elif head == "topology":
            set_kind(KIND_GRAPH, n, col)
            if len(args) != 1 or args[0][0] != "discrete":
                raise ParseError(
                    n, col,
                    "only discrete graphs are supported; topological graphs "
                    "(in particular with a non-open range map) are rejected",
                )
        else:
            raise ParseError(n, col, f"unknown directive {head!r}")
        first = False

    last = lines[-1][0]
    if kind is None:
        raise ParseError(1, 1, "document declares neither an algebra nor a graph")
    if kind == KIND_GRAPH:
        return InputDocument(kind, GraphDoc(vertices, edges))
    if module is None:
        raise ParseError(last, 1, "correspondence document needs a module line")
    doc = CorrespondenceDoc(algebra, module, counts, matrices)
    _check_shapes(doc, text)
    return InputDocument(kind, doc)


def _check_shapes(doc: CorrespondenceDoc, text: str) -> None:
    """``sum_j c_ij n_j <= m_i``, with explicit intertwiners counted by width."""
    for i, m in enumerate(doc.module, 1):
        used = 0
        for j, n in enumerate(doc.algebra, 1):
            if (i, j) in doc.matrices:
                used += doc.matrices[(i, j)].shape[1]
            else:
                used += doc.counts.get((i, j), 0) * n
        if used > m:
            n_line, col = _locate(text, i)
            raise ParseError(n_line, col, f"shape mismatch: module block {i} needs {used} rows but has {m}")


def _locate(text: str, i: int) -> tuple[int, int]:
    """Last lambda line mentioning module block ``i`` (for error locations)."""
    where = (1, 1)
    for n, raw in enumerate(text.splitlines(), 1):
        toks = _tokens(raw)
        if toks and toks[0][0] in ("lambda", "lambda-matrix") and len(toks) > 1 and toks[1][0] == str(i):
            where = (n, toks[0][1])
    return where


def serialize(doc: InputDocument) -> str:
    out = [f"format-version {FORMAT_VERSION}"]
    body = doc.body
    if doc.kind == KIND_CORRESPONDENCE:
        out.append("algebra " + " ".join(map(str, body.algebra)))
        out.append("module " + " ".join(map(str, body.module)))
        for (i, j), c in sorted(body.counts.items()):
            out.append(f"lambda {i} {j} {c}")
        for (i, j), mat in sorted(body.matrices.items()):
            out.append(f"lambda-matrix {i} {j}")
            out.extend(" ".join(format_complex(z) for z in row) for row in mat)
    else:
        out.extend(f"vertex {v}" for v in body.vertices)
        out.extend(f"edge {u} {v} {k}" for u, v, k in body.edges)
    return "\n".join(out) + "\n"


def to_correspondence(doc: CorrespondenceDoc) -> Correspondence:
    """Build the correspondence; explicit matrices override the count encoding.

    Default intertwiners stack copies down the diagonal in block order, and an
    explicit matrix for ``(i, j)`` takes the place of that slot.
    """
    algebra = MultiMatrixAlgebra(tuple(doc.algebra))
    cmat = np.zeros((len(doc.module), len(doc.algebra)), dtype=int)
    for (i, j), c in doc.counts.items():
        cmat[i - 1, j - 1] = c
    for (i, j), mat in doc.matrices.items():
        cmat[i - 1, j - 1] = mat.shape[1] // doc.algebra[j - 1]
    base = Correspondence.from_multiplicities(algebra, doc.module, cmat)
    if not doc.matrices:
        return base
    rows = [
        tuple(doc.matrices.get((i + 1, j + 1), v) for j, v in enumerate(row))
        for i, row in enumerate(base.intertwiners)
    ]
    return Correspondence(HilbertModule(algebra, tuple(doc.module)), tuple(rows))


def to_graph(doc: GraphDoc) -> Multigraph:
    return Multigraph.from_edges(doc.vertices, doc.edges)


def from_correspondence(c: Correspondence) -> InputDocument:
    """Document reproducing ``c`` exactly via explicit intertwiners where needed."""
    cm = c.multiplicity_matrix()
    reference = Correspondence.from_multiplicities(c.algebra, c.module.multiplicities, cm)
    counts, matrices = {}, {}
    for i, (row, ref) in enumerate(zip(c.intertwiners, reference.intertwiners)):
        for j, (v, r) in enumerate(zip(row, ref)):
            if np.array_equal(v, r):
                if cm[i, j]:
                    counts[(i + 1, j + 1)] = int(cm[i, j])
            else:
                matrices[(i + 1, j + 1)] = v.copy()
    return InputDocument(
        KIND_CORRESPONDENCE,
        CorrespondenceDoc(list(c.algebra.block_sizes), list(c.module.multiplicities), counts, matrices),
    )


def from_graph(g: Multigraph) -> InputDocument:
    return InputDocument(
        KIND_GRAPH, GraphDoc(list(g.vertices), [(u, v, k) for (u, v), k in g.mult.items()])
    )


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


@dataclass
class Report:
    """Analysis result. Field names are part of the report format.

    ``input``        echo of the parsed document
    ``verdict``      structural or symbolic decision
    ``certificate``  numeric certificate block, or ``None``
    ``frame``        frame residuals, or ``None``
    ``warnings``     list of strings
    """

    input: dict
    verdict: dict
    certificate: dict | None = None
    frame: dict | None = None
    warnings: list[str] = field(default_factory=list)
    format_version: int = REPORT_FORMAT_VERSION

    def to_dict(self) -> dict:
        return {
            "format-version": self.format_version,
            "input": self.input,
            "verdict": self.verdict,
            "certificate": self.certificate,
            "frame": self.frame,
            "warnings": self.warnings,
        }


def serialize_report(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"


def parse_report(text: str) -> Report:
    data = json.loads(text)
    version = data.get("format-version")
    if version != REPORT_FORMAT_VERSION:
        raise ValueError(f"unsupported report format-version {version!r}")
    return Report(
        input=data["input"],
        verdict=data["verdict"],
        certificate=data["certificate"],
        frame=data["frame"],
        warnings=data["warnings"],
        format_version=version,
    )


def echo(doc: InputDocument) -> dict:
    body = doc.body
    if doc.kind == KIND_CORRESPONDENCE:
        return {
            "kind": doc.kind,
            "algebra": list(body.algebra),
            "module": list(body.module),
            "lambda": [[i, j, c] for (i, j), c in sorted(body.counts.items())],
            "lambda-matrix": [[i, j] for (i, j) in sorted(body.matrices)],
        }
    return {
        "kind": doc.kind,
        "vertices": list(body.vertices),
        "edges": [[u, v, str(k)] for u, v, k in body.edges],
    }
