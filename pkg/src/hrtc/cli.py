"""Command-line driver.

Exit codes: 0 success, 1 type error, 2 parse or kind error, 3 the emitted
program failed independent verification.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from hrtc.checker import Options, TypeCheckError
from hrtc.driver import DeclarationError, check_program, verify_checked, verify_source
from hrtc.parser import ParseError, parse_program
from hrtc.program import Program

OK, TYPE_ERROR, INPUT_ERROR, VERIFY_ERROR = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hrtc", description="Higher-rank, impredicative "
                                 "and second-order type checker with elaboration.")
    sub = ap.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", help="type check a program")
    c.add_argument("file", type=Path)
    c.add_argument("--emit-annotated", type=Path, metavar="PATH",
                   help="write the elaborated program")
    c.add_argument("--verify", action="store_true",
                   help="re-check the elaboration with the proof checker")
    c.add_argument("--trace", action="store_true", help="print transition events")
    c.add_argument("--max-branches", type=int, metavar="N", help="search budget per declaration")
    c.add_argument("--prelude", type=Path, action="append", default=[], metavar="FILE",
                   help="check FILE's declarations first (repeatable)")
    c.add_argument("--no-heuristic", action="store_true",
                   help="keep subgoals in emission order")
    v = sub.add_parser("verify", help="proof-check an annotated program")
    v.add_argument("file", type=Path)
    return ap


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def _fail(msg: str, code: int) -> int:
    print(msg, file=sys.stderr)
    return code


def _describe(err: DeclarationError) -> str:
    text = f"error in {err.name}: {err.cause}"
    deepest = getattr(err.cause, "deepest", None)
    if deepest is not None:
        text += f"\n  deepest failing goal: {deepest.goal}\n  reason: {deepest.reason}"
    return text


def _check(args) -> int:
    trace = args.trace or os.environ.get("HRTC_TRACE") == "1"
    opts = Options(heuristic=not args.no_heuristic, max_branches=args.max_branches,
                   on_event=(lambda ev: print(ev, file=sys.stderr)) if trace else None)
    prog, aliases = Program(), {}
    try:
        for path in [*args.prelude, args.file]:
            prog.decls.extend(parse_program(_read(path), aliases).decls)
    except (OSError, ParseError) as err:
        return _fail(f"{err}", INPUT_ERROR)
    try:
        checked = check_program(prog, opts)
    except DeclarationError as err:
        code = TYPE_ERROR if isinstance(err.cause, TypeCheckError) else INPUT_ERROR
        return _fail(_describe(err), code)
    text = checked.annotated_source()
    if args.emit_annotated:
        args.emit_annotated.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.verify:
        try:
            verify_checked(checked, prog)
        except (DeclarationError, ParseError) as err:
            return _fail(f"verification failed: {err}", VERIFY_ERROR)
    return OK


def _verify(args) -> int:
    try:
        source = _read(args.file)
        verify_source(source)
    except (OSError, ParseError) as err:
        return _fail(f"{err}", INPUT_ERROR)
    except DeclarationError as err:
        return _fail(f"verification failed: {err}", VERIFY_ERROR)
    return OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    return _check(args) if args.command == "check" else _verify(args)


if __name__ == "__main__":
    sys.exit(main())
