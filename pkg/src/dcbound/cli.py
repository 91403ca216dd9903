"""Command-line interface.

Commands: analyze (bounds + complexity report), abstract (concrete program ->
difference constraint program), validate (compare bounds against exhaustive
concrete exploration), resets (optimal reset paths / DOT export).

Exit codes: 0 success or PASS; 1 usage or parse error; 2 the requested
complexity is undefined (or the analysis could not run); 3 validation did
not fully PASS (FAIL, or PASS-PARTIAL from a capped exploration).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from dcbound import __version__, expr
from dcbound.abstraction import DEFAULT_DEPTH_LIMIT, AbstractionResult, abstract_program
from dcbound.dcp import Dcp, DcpError, format_dcp, parse_dcp
from dcbound.engine import Analysis, AnalysisMode
from dcbound.localbounds import DEFAULT_CYCLE_CAP, CycleOverflow
from dcbound.oracle import DEFAULT_STEP_CAP, Verdict, check_soundness
from dcbound.program import ProgramError, parse_program
from dcbound.resetgraph import DEFAULT_RESET_PATH_CAP, build_reset_graph, \
    optimal_reset_paths, to_dot

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNDEF = 2
EXIT_VALIDATION = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to status 2; we use 1
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _build_parser() -> _Parser:
    p = _Parser(prog="dcbound", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"dcbound {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, abstraction=True, analysis=True):
        sp.add_argument("file", help="input .dcp or .prog file")
        sp.add_argument("--format", choices=["dcp", "prog"],
                        help="override input format sniffing")
        if abstraction:
            sp.add_argument("--abstraction-depth", type=int,
                            default=DEFAULT_DEPTH_LIMIT, metavar="N",
                            help="max chained norm discoveries before a chain "
                                 f"is discarded (default {DEFAULT_DEPTH_LIMIT})")
            sp.add_argument("--keep-names", action="store_true",
                            help="name abstract variables after their norms, "
                                 "e.g. (l-i)")
        if analysis:
            sp.add_argument("--max-cycles", type=int, default=DEFAULT_CYCLE_CAP,
                            metavar="N",
                            help=f"simple-cycle cap (default {DEFAULT_CYCLE_CAP})")
            sp.add_argument("--max-reset-paths", type=int, metavar="N",
                            default=DEFAULT_RESET_PATH_CAP,
                            help="optimal reset path cap per variable "
                                 f"(default {DEFAULT_RESET_PATH_CAP})")

    a = sub.add_parser("analyze", help="compute transition bounds and complexity")
    common(a)
    a.add_argument("--mode", default="ctx", choices=["free", "ctx", "opt"],
                   help="bound algorithm variant (default ctx)")
    a.add_argument("--vb", action="store_true", help="also print variable bounds")
    a.add_argument("-v", "--verbose", action="store_true",
                   help="print the abstracted program to stderr")

    b = sub.add_parser("abstract", help="abstract a .prog file into a .dcp file")
    common(b, analysis=False)
    b.add_argument("-o", "--output", metavar="OUT",
                   help="output path (stdout when omitted)")

    c = sub.add_parser("validate",
                       help="check bounds against exhaustive concrete exploration")
    common(c)
    c.add_argument("--mode", default="ctx", choices=["free", "ctx", "opt"])
    c.add_argument("--assign", action="append", default=[], metavar="N=V[,M=V]",
                   help="one valuation of the symbolic constants (repeatable)")
    c.add_argument("--sweep", metavar="LO..HI",
                   help="cartesian sweep over all constants (default 0..3 "
                        "when no --assign is given)")
    c.add_argument("--max-steps", type=int, default=DEFAULT_STEP_CAP, metavar="S",
                   help=f"state cap per valuation (default {DEFAULT_STEP_CAP})")
    c.add_argument("--override-bound", action="append", default=[],
                   metavar="TRANS=EXPR",
                   help="replace a computed transition bound before checking "
                        "(fault-injection/debugging aid)")

    d = sub.add_parser("resets", help="print optimal reset paths or emit DOT")
    common(d)
    d.add_argument("--dot", metavar="FILE", help="write the reset graph as DOT")
    d.add_argument("--var", action="append", default=[], metavar="V",
                   help="restrict to one variable (repeatable)")
    return p


# ---------------------------------------------------------------------------
# input loading
# ---------------------------------------------------------------------------

def _sniff_format(path: Path, override: str | None, text: str) -> str:
    if override:
        return override
    if path.suffix == ".dcp":
        return "dcp"
    if path.suffix == ".prog":
        return "prog"
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            if line in ("dcp", "prog"):
                return line
            break
    raise _UsageError(
        f"cannot determine format of {path}; pass --format dcp|prog")


def _load(args) -> tuple[Dcp, AbstractionResult | None]:
    path = Path(args.file)
    try:
        text = path.read_text()
    except OSError as exc:
        raise _UsageError(str(exc)) from None
    fmt = _sniff_format(path, args.format, text)
    if fmt == "dcp":
        return parse_dcp(text), None
    prog = parse_program(text)
    result = abstract_program(
        prog,
        depth_limit=getattr(args, "abstraction_depth", DEFAULT_DEPTH_LIMIT),
        keep_names=getattr(args, "keep_names", False))
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return result.dcp, result


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_analyze(args) -> int:
    dcp, abstraction = _load(args)
    if abstraction is not None and args.verbose:
        sys.stderr.write(format_dcp(dcp, abstraction.rename_comment()))
    analysis = Analysis(dcp, AnalysisMode.from_name(args.mode),
                        max_cycles=args.max_cycles,
                        max_reset_paths=args.max_reset_paths)
    report = analysis.report()
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    sys.stdout.write(report.render(include_vb=args.vb))
    return EXIT_OK if report.complexity != expr.UNDEFINED else EXIT_UNDEF


def _cmd_abstract(args) -> int:
    path = Path(args.file)
    try:
        text = path.read_text()
    except OSError as exc:
        raise _UsageError(str(exc)) from None
    fmt = _sniff_format(path, args.format, text)
    if fmt != "prog":
        raise _UsageError("abstract expects a .prog input")
    prog = parse_program(text)
    result = abstract_program(prog, depth_limit=args.abstraction_depth,
                              keep_names=args.keep_names)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    out = format_dcp(result.dcp, result.rename_comment())
    if args.output:
        Path(args.output).write_text(out)
    else:
        sys.stdout.write(out)
    return EXIT_OK


def _parse_assign(text: str) -> dict[str, int]:
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise _UsageError(f"bad assignment {part!r}; expected NAME=VALUE")
        name, _, value = part.partition("=")
        try:
            v = int(value)
        except ValueError:
            raise _UsageError(f"bad value in {part!r}") from None
        if v < 0:
            raise _UsageError(f"constants are nonnegative; got {part!r}")
        out[name.strip()] = v
    return out


def _valuations(args, dcp: Dcp) -> list[dict[str, int]]:
    consts = list(dcp.sym_consts)
    if args.assign:
        vals = []
        for raw in args.assign:
            v = _parse_assign(raw)
            missing = [c for c in consts if c not in v]
            if missing:
                raise _UsageError(
                    f"assignment {raw!r} misses constants: {', '.join(missing)}")
            vals.append(v)
        return vals
    lo, hi = 0, 3
    if args.sweep:
        text = args.sweep
        if ".." not in text:
            raise _UsageError("--sweep expects LO..HI")
        a, _, b = text.partition("..")
        try:
            lo, hi = int(a), int(b)
        except ValueError:
            raise _UsageError("--sweep expects integers LO..HI") from None
        if lo < 0 or hi < lo:
            raise _UsageError("--sweep needs 0 <= LO <= HI")
    vals = [dict()]
    for c in consts:
        vals = [dict(v, **{c: x}) for v in vals for x in range(lo, hi + 1)]
    return vals


def _cmd_validate(args) -> int:
    dcp, _ = _load(args)
    analysis = Analysis(dcp, AnalysisMode.from_name(args.mode),
                        max_cycles=args.max_cycles,
                        max_reset_paths=args.max_reset_paths)
    report = analysis.report()
    for raw in args.override_bound:
        tid, sep, text = raw.partition("=")
        tid = tid.strip()
        if not sep or tid not in report.tb:
            raise _UsageError(f"bad --override-bound {raw!r}")
        report.tb[tid] = expr.parse_expr(text)
    valuations = _valuations(args, dcp)
    result = check_soundness(dcp, report, valuations, step_cap=args.max_steps,
                             workers=min(4, len(valuations)))
    for valuation in valuations:
        key = tuple(sorted(valuation.items()))
        header = ", ".join(f"{k}={v}" for k, v in key) or "(no constants)"
        print(f"# {header}")
        for row in result.rows:
            if row.valuation != key:
                continue
            bound = "undef" if row.bound is None else str(row.bound)
            name = row.name if row.kind == "TB" else f"VB({row.name})"
            print(f"{name}  {row.observed}  {bound}  {row.status()}")
    print(result.verdict.value)
    return EXIT_OK if result.verdict is Verdict.PASS else EXIT_VALIDATION


def _cmd_resets(args) -> int:
    dcp, _ = _load(args)
    reset = build_reset_graph(dcp)
    if reset.removed_vars:
        print("removed (reset cycles): " + ", ".join(sorted(reset.removed_vars)),
              file=sys.stderr)
    if args.dot:
        Path(args.dot).write_text(to_dot(reset.graph))
        return EXIT_OK
    names = args.var or [v for v in reset.pruned.variables]
    for v in names:
        if v not in reset.pruned.variables:
            raise _UsageError(f"unknown variable {v!r}")
        paths = optimal_reset_paths(reset.pruned, reset.graph, v,
                                    args.max_reset_paths)
        print(f"R({v}):")
        for p in paths:
            print(f"  {p}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "analyze": _cmd_analyze,
            "abstract": _cmd_abstract,
            "validate": _cmd_validate,
            "resets": _cmd_resets,
        }[args.command]
        return handler(args)
    except _UsageError as exc:
        print(f"dcbound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DcpError, ProgramError) as exc:
        for d in exc.diagnostics:
            print(f"{getattr(args, 'file', '<input>')}:{d}", file=sys.stderr)
        return EXIT_USAGE
    except CycleOverflow as exc:
        print(f"dcbound: {exc}; raise --max-cycles", file=sys.stderr)
        return EXIT_UNDEF
    except expr.ExprParseError as exc:
        print(f"dcbound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
