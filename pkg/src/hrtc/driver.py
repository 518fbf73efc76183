"""Whole-program checking: declarations in file order, then emission and verification."""

from __future__ import annotations

from dataclasses import dataclass, field

from hrtc.checker import CheckResult, Options, TypeCheckError, run_check
from hrtc.fomega import ProofError, check_proof
from hrtc.kinds import check_decl
from hrtc.parser import AnnDef, AnnProgram, parse_annotated_program
from hrtc.pretty import show_decl_annotated, show_type
from hrtc.program import DataDecl, FunDecl, Program, SigDecl, TypeAlias
from hrtc.syntax import Context, Type, alpha_eq, erase, normalize, strip_let_annotations


class DeclarationError(Exception):
    """A failure attributed to one declaration."""

    def __init__(self, name: str, cause: Exception):
        self.name, self.cause = name, cause
        super().__init__(f"{name}: {cause}")


@dataclass(frozen=True)
class Checked:
    """A signature with its elaborated definition, or ``None`` for a postulate."""

    name: str
    type: Type
    term: object | None = None
    states: int = 0


@dataclass
class CheckedProgram:
    ctx: Context
    decls: list = field(default_factory=list)

    def definitions(self) -> list[Checked]:
        return [d for d in self.decls if isinstance(d, Checked) and d.term is not None]

    def annotated_source(self) -> str:
        return "\n\n".join(show_decl(d) for d in self.decls) + ("\n" if self.decls else "")


def show_decl(d) -> str:
    match d:
        case DataDecl(name, kind, ctors):
            head = f"data {name} :: {kind} where"
            return "\n".join([head] + [f"  {c} :: {show_type(t)}" for c, t in ctors])
        case TypeAlias(name, kind, body):
            return f"type {name} :: {kind} = {show_type(body)}"
        case Checked(name, t, None):
            return f"{name} :: {show_type(t)}"
        case Checked(name, t, term):
            return show_decl_annotated(name, t, term)
    raise TypeError(d)


def check_program(prog: Program, options: Options | None = None,
                  ctx: Context | None = None) -> CheckedProgram:
    """Kind-check and type-check every declaration in order.

    A signature is entered into the context before its definition is checked,
    so definitions may recurse through their own annotation.
    """
    ctx = ctx or Context.empty()
    out = CheckedProgram(ctx)
    defined = {d.name for d in prog.decls if isinstance(d, FunDecl)}
    for d in prog.decls:
        try:
            ctx = check_decl(ctx, d)
        except Exception as err:
            raise DeclarationError(getattr(d, "name", "?"), err) from err
        match d:
            case DataDecl() | TypeAlias():
                out.decls.append(d)
            case SigDecl(name, t) if name not in defined:
                out.decls.append(Checked(name, normalize(t)))
            case FunDecl(name, _, body):
                t = normalize(ctx.terms[name])
                try:
                    r: CheckResult = run_check(ctx, body, t, options)
                except TypeCheckError as err:
                    raise DeclarationError(name, err) from err
                out.decls.append(Checked(name, t, r.term, r.states))
    out.ctx = ctx
    return out


def verify_program(prog: AnnProgram, ctx: Context | None = None) -> Context:
    """Proof-check an annotated program; raise :class:`DeclarationError` on the first failure."""
    ctx = ctx or Context.empty()
    for d in prog.decls:
        name = getattr(d, "name", "?")
        try:
            if isinstance(d, AnnDef):
                ctx = ctx.with_term(d.name, d.type)
                check_proof(ctx, d.body, d.type)
            else:
                ctx = check_decl(ctx, d)
        except Exception as err:
            raise DeclarationError(name, err) from err
    return ctx


def verify_source(source: str) -> Context:
    return verify_program(parse_annotated_program(source))


def verify_checked(checked: CheckedProgram, prog: Program) -> None:
    """Re-check every elaboration independently and confirm it erases to its source."""
    sources = {d.name: d.body for d in prog.decls if isinstance(d, FunDecl)}
    for d in checked.definitions():
        try:
            check_proof(checked.ctx, d.term, d.type)
        except ProofError as err:
            raise DeclarationError(d.name, err) from err
        if erase(d.term) != strip_let_annotations(sources[d.name]):
            raise DeclarationError(d.name, ProofError("elaboration does not erase to the source"))
    text = checked.annotated_source()
    reparsed = parse_annotated_program(text)
    verify_program(reparsed)
    for a, b in zip([x for x in reparsed.decls if isinstance(x, AnnDef)], checked.definitions()):
        if a.name != b.name or not alpha_eq(normalize(a.type), b.type):
            raise DeclarationError(b.name, ProofError("emitted signature does not re-parse"))


__all__ = [
    "DeclarationError", "Checked", "CheckedProgram", "check_program", "verify_program",
    "verify_source", "verify_checked", "show_decl",
]
