"""Command-line front-end.

Exit status: 0 analyzed (either verdict), 1 parse or validation error,
2 internal cross-check failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import correspondence as corr
from . import graph as gr
from . import hilbmod
from .repcert import CertificateError, certificate
from .textformat import (
    KIND_CORRESPONDENCE,
    InputDocument,
    ParseError,
    Report,
    echo,
    parse,
    serialize_report,
    to_correspondence,
    to_graph,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CROSS_CHECK = 2

TRUNCATED_STATUS = "truncated - symbolic verdict governs"
FRAME_SAMPLES = 100
FRAME_SEED = 0


class AnalysisError(ValueError):
    """The document cannot be analysed with the given options."""


@dataclass(frozen=True)
class AnalyzeOptions:
    tol: float = 1e-10
    depth: int = 2
    shift: int = 4
    certify: bool = False
    frame: bool = False
    truncate: int | None = None


def _idx(idx) -> list[int] | None:
    return None if idx is None else [int(k) + 1 for k in idx]


def _certificate_block(c: corr.Correspondence, opts: AnalyzeOptions, structural: bool) -> dict:
    rep = certificate(c, opts.depth, opts.shift, opts.tol)
    pair = rep.worst_pair()
    block = {
        "defect": rep.defect,
        "agreement_on_S": rep.agreement_on_S,
        "depth": opts.depth,
        "shift": opts.shift,
        "tol": opts.tol,
        "verdict": rep.verdict,
        "structural_verdict": structural,
        "worst_pair": None if pair is None or rep.defect == 0 else [_idx(pair[0]), _idx(pair[1])],
        "truncated": None,
        "status": "governing",
        "cross_check": "pass" if rep.verdict == structural else "fail",
    }
    if rep.notes:
        block["notes"] = list(rep.notes)
    return block


def _frame_block(c: corr.Correspondence, opts: AnalyzeOptions) -> dict:
    basis = c.module.basis()
    if not basis:
        return {"generators": 0, "identity_residual": 0.0, "reconstruction_residual": 0.0}
    f = hilbmod.frame(basis, opts.tol, module=c.module)
    rng = np.random.default_rng(FRAME_SEED)
    samples = basis + [c.module.random_element(rng) for _ in range(FRAME_SAMPLES)]
    return {
        "generators": len(basis),
        "identity_residual": f.identity_residual(),
        "reconstruction_residual": f.reconstruction_residual(samples),
    }


def run_analyze(doc: InputDocument, opts: AnalyzeOptions = AnalyzeOptions()) -> Report:
    warnings: list[str] = []
    cert = frame_block = None
    if doc.kind == KIND_CORRESPONDENCE:
        c = to_correspondence(doc.body)
        corr.validate(c, opts.tol)
        v = corr.is_hyperrigid(c, opts.tol)
        warnings.extend(v.warnings)
        verdict = {
            "hyperrigid": v.hyperrigid,
            "method": "structural",
            "katsura_ideal": _idx(v.katsura_blocks.sorted()),
            "kernel": _idx(v.kernel_blocks.sorted()),
            "witness": None if v.hyperrigid else {
                "block": v.witness_index[0] + 1,
                "row": v.witness_index[1] + 1,
                "col": v.witness_index[2] + 1,
                "residual": v.witness_residual,
            },
        }
        if opts.certify:
            cert = _certificate_block(c, opts, v.hyperrigid)
        if opts.frame:
            frame_block = _frame_block(c, opts)
    else:
        g = to_graph(doc.body)
        gv = gr.is_hyperrigid(g)
        verdict = {
            "hyperrigid": gv.hyperrigid,
            "method": "symbolic",
            "offending_vertices": list(gv.offending),
            "e0_fin": list(gv.e0_fin),
            "katsura_support": list(gv.katsura_support),
        }
        if opts.certify or opts.frame:
            cap = None
            if not g.is_finite():
                if opts.truncate is None:
                    raise AnalysisError("graph has infinite multiplicities; pass --truncate <cap>")
                cap = opts.truncate
                g = gr.truncate(g, cap)
            c = gr.graph_correspondence(g)
            if opts.certify:
                structural = corr.is_hyperrigid(c, opts.tol).hyperrigid
                cert = _certificate_block(c, opts, structural)
                if cap is not None:
                    cert["truncated"] = cap
                    cert["status"] = TRUNCATED_STATUS
                    if cert["cross_check"] == "pass" and cert["verdict"] != gv.hyperrigid:
                        cert["cross_check"] = "limit-phenomenon"
                        warnings.append(
                            f"truncation at cap {cap} is hyperrigid but the graph has infinite "
                            "receivers; the symbolic verdict governs"
                        )
                elif cert["cross_check"] == "pass" and cert["verdict"] != gv.hyperrigid:
                    cert["cross_check"] = "fail"
            if opts.frame:
                frame_block = _frame_block(c, opts)
    return Report(input=echo(doc), verdict=verdict, certificate=cert, frame=frame_block, warnings=warnings)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def cmd_analyze(args) -> int:
    try:
        text = _read(args.file)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        doc = parse(text)
    except ParseError as exc:
        print(f"{args.file}:{exc}", file=sys.stderr)
        return EXIT_INPUT
    opts = AnalyzeOptions(
        tol=args.tol, depth=args.depth, shift=args.shift,
        certify=args.certify, frame=args.frame, truncate=args.truncate,
    )
    try:
        report = run_analyze(doc, opts)
    except (AnalysisError, corr.InvalidLeftActionError, hilbmod.GenerationError, ValueError) as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CertificateError as exc:
        print(f"{args.file}: internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_CROSS_CHECK
    out = serialize_report(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    if report.certificate is not None and report.certificate["cross_check"] == "fail":
        print("cross-check failure: structural verdict differs from the certificate", file=sys.stderr)
        return EXIT_CROSS_CHECK
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return EXIT_OK if run_selftest(n=args.n) else EXIT_CROSS_CHECK


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (status 1); status 2 is reserved for cross-checks
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hyperrigidity",
        description="Decide and certify hyperrigidity of C*-correspondences and graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("analyze", help="analyze a correspondence or graph document")
    p.add_argument("file", help="input document ('-' for stdin)")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--certify", action="store_true", help="compute the shift-dilation certificate")
    p.add_argument("--frame", action="store_true", help="report frame residuals")
    p.add_argument("--depth", type=_positive, default=2, help="Fock depth N")
    p.add_argument("--shift", type=int, default=4, help="shift dimension M (>= 2)")
    p.add_argument("--truncate", type=_positive, default=None, help="cap for infinite multiplicities")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.set_defaults(func=cmd_analyze)
    s = sub.add_parser("selftest", help="run the built-in acceptance corpus")
    s.add_argument("-n", type=int, default=60, help="number of generated correspondences")
    s.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "shift", 2) < 2:
            parser.error("--shift must be >= 2")
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
