"""Parser for ``.hr`` source files and for annotated output.

Top-level declarations start in column 0; indented lines continue the
declaration above them.  ``data ... where`` constructor lists and
``case ... of`` branches are laid out by column, or written with explicit
``{ ; }``.  Type aliases are expanded as soon as they are parsed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from hrtc.program import DataDecl, FunDecl, Program, SigDecl, TypeAlias
from hrtc.syntax import (
    STAR, ABranch, ACase, ALam, ALet, App, Arrow, Case, Con, Expr, Forall,
    KArrow, Kind, Lam, Let, PCon, PVar, Pattern, TApp, TCon, TLam, TVar, TyApp,
    TyLam, Type, Var, erase, free_vars, normalize, pattern_vars,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message, self.line, self.col = message, line, col
        super().__init__(f"{line}:{col}: {message}" if line else message)


class DuplicateSignature(ParseError):
    pass


class MissingSignature(ParseError):
    pass


KEYWORDS = {"data", "type", "where", "forall", "let", "in", "case", "of"}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<conid>[A-Z][A-Za-z0-9_'#]*)
  | (?P<varid>[a-z_][A-Za-z0-9_'#]*)
  | (?P<sym>::|->|\\\\|[\\=.(){};@*,])
""", re.VERBOSE)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str          # "con", "var", "kw", "sym", "eof"
    text: str
    line: int
    col: int
    first: bool        # first token on its line

    def where(self) -> str:
        return f"{self.line}:{self.col + 1}"


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos, first = 1, 0, 0, True
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start
        pos = m.end()
        if kind == "nl":
            line, line_start, first = line + 1, pos, True
            continue
        if kind in ("ws", "comment"):
            continue
        if kind == "varid" and text in KEYWORDS:
            kind = "kw"
        tokens.append(Token({"conid": "con", "varid": "var"}.get(kind, kind), text, line, col, first))
        first = False
    tokens.append(Token("eof", "", line, 0, True))
    return tokens


def split_declarations(tokens: list[Token]) -> list[list[Token]]:
    """Group tokens into top-level declarations (a column-0 token starts one)."""
    chunks: list[list[Token]] = []
    for t in tokens:
        if t.kind == "eof":
            break
        if t.first and t.col == 0 or not chunks:
            if not (t.first and t.col == 0):
                raise ParseError("declaration must start in column 1", t.line, t.col + 1)
            chunks.append([])
        chunks[-1].append(t)
    for c in chunks:
        last = c[-1]
        c.append(Token("eof", "", last.line, 0, True))
    return chunks


class _Parser:
    def __init__(self, tokens: list[Token], aliases: dict[str, Type] | None = None):
        self.toks = tokens
        self.i = 0
        self.layout: list[int] = [-1]
        self.item_start = 0
        self.aliases = aliases if aliases is not None else {}

    # ------------------------------------------------------------ basics

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at_boundary(self) -> bool:
        t = self.tok
        return t.kind == "eof" or (
            t.first and self.i != self.item_start and t.col <= self.layout[-1])

    def error(self, msg: str, t: Token | None = None) -> ParseError:
        t = t or self.tok
        found = t.text or "end of declaration"
        return ParseError(f"{msg}, found {found!r}", t.line, t.col + 1)

    def is_sym(self, s: str) -> bool:
        return not self.at_boundary() and self.tok.kind == "sym" and self.tok.text == s

    def is_kw(self, s: str) -> bool:
        return not self.at_boundary() and self.tok.kind == "kw" and self.tok.text == s

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect_sym(self, s: str) -> Token:
        if not self.is_sym(s):
            raise self.error(f"expected {s!r}")
        return self.advance()

    def expect_kw(self, s: str) -> Token:
        if not self.is_kw(s):
            raise self.error(f"expected {s!r}")
        return self.advance()

    def expect(self, kind: str, what: str) -> Token:
        if self.at_boundary() or self.tok.kind != kind:
            raise self.error(f"expected {what}")
        return self.advance()

    def expect_end(self) -> None:
        if self.tok.kind != "eof":
            raise self.error("unexpected token")

    # ------------------------------------------------------------- kinds

    def kind(self) -> Kind:
        left = self.kind_atom()
        if self.is_sym("->"):
            self.advance()
            return KArrow(left, self.kind())
        return left

    def kind_atom(self) -> Kind:
        if self.is_sym("*"):
            self.advance()
            return STAR
        if self.is_sym("("):
            self.advance()
            k = self.kind()
            self.expect_sym(")")
            return k
        raise self.error("expected a kind")

    # ------------------------------------------------------------- types

    def type(self) -> Type:
        if self.is_kw("forall"):
            self.advance()
            names = self.binders()
            self.expect_sym(".")
            body = self.type()
            for n in reversed(names):
                body = Forall(n, body)
            return body
        if self.is_sym("\\"):
            self.advance()
            names = self.binders()
            self.expect_sym(".")
            body = self.type()
            for n in reversed(names):
                body = TLam(n, body)
            return body
        left = self.btype()
        if self.is_sym("->"):
            self.advance()
            return Arrow(left, self.type())
        return left

    def binders(self) -> list[str]:
        names = []
        while not self.at_boundary() and self.tok.kind == "var":
            names.append(self.advance().text)
        if not names:
            raise self.error("expected a binder")
        return names

    def starts_type_atom(self) -> bool:
        return not self.at_boundary() and (
            self.tok.kind in ("con", "var") or (self.tok.kind == "sym" and self.tok.text == "("))

    def btype(self) -> Type:
        t = self.type_atom()
        while self.starts_type_atom():
            t = TApp(t, self.type_atom())
        return t

    def type_atom(self) -> Type:
        t = self.tok
        if self.at_boundary():
            raise self.error("expected a type")
        if t.kind == "con":
            self.advance()
            return self.aliases.get(t.text, TCon(t.text))
        if t.kind == "var":
            self.advance()
            return TVar(t.text)
        if self.is_sym("("):
            self.advance()
            ty = self.type()
            self.expect_sym(")")
            return ty
        raise self.error("expected a type")

    # ------------------------------------------------------- expressions

    def starts_atom(self) -> bool:
        return not self.at_boundary() and (
            self.tok.kind in ("con", "var") or (self.tok.kind == "sym" and self.tok.text == "("))

    def expr(self) -> Expr:
        if self.is_sym("\\"):
            self.advance()
            names = self.binders()
            self.expect_sym("->")
            body = self.expr()
            for n in reversed(names):
                body = Lam(n, body)
            return body
        if self.is_kw("let"):
            self.advance()
            x = self.expect("var", "a let-bound name").text
            ann = None
            if self.is_sym("::"):
                self.advance()
                ann = self.closed_type()
            self.expect_sym("=")
            bound = self.expr()
            self.expect_kw("in")
            return Let(x, ann, bound, self.expr())
        if self.is_kw("case"):
            self.advance()
            scrut = self.expr()
            self.expect_kw("of")
            branches = self.branches(lambda: (self.pattern(), self.arrow_then(self.expr)))
            return Case(scrut, tuple(branches))
        e = self.atom()
        while self.starts_atom():
            e = App(e, self.atom())
        return e

    def arrow_then(self, parse):
        self.expect_sym("->")
        return parse()

    def branches(self, branch) -> list:
        out = []
        if self.is_sym("{"):
            self.advance()
            self.layout.append(-1)
            if not self.is_sym("}"):
                out.append(branch())
                while self.is_sym(";"):
                    self.advance()
                    out.append(branch())
            self.layout.pop()
            self.expect_sym("}")
            return out
        if self.at_boundary():
            raise self.error("expected a case branch")
        col = self.tok.col
        self.layout.append(col)
        try:
            self.item_start = self.i
            out.append(branch())
            while self.tok.kind != "eof" and self.tok.first and self.tok.col == col:
                self.item_start = self.i
                out.append(branch())
        finally:
            self.layout.pop()
        return out

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "var":
            self.advance()
            return Var(t.text)
        if t.kind == "con":
            self.advance()
            return Con(t.text)
        if self.is_sym("("):
            self.advance()
            self.layout.append(-1)
            e = self.expr()
            self.layout.pop()
            self.expect_sym(")")
            return e
        raise self.error("expected an expression")

    def pattern(self) -> Pattern:
        if not self.at_boundary() and self.tok.kind == "con":
            c = self.advance().text
            args = []
            while self.starts_atom():
                args.append(self.pattern_atom())
            return PCon(c, tuple(args))
        return self.pattern_atom()

    def pattern_atom(self) -> Pattern:
        t = self.tok
        if self.at_boundary():
            raise self.error("expected a pattern")
        if t.kind == "var":
            self.advance()
            return PVar(t.text)
        if t.kind == "con":
            self.advance()
            return PCon(t.text, ())
        if self.is_sym("("):
            self.advance()
            p = self.pattern()
            self.expect_sym(")")
            return p
        raise self.error("expected a pattern")

    def closed_type(self) -> Type:
        start = self.tok
        t = normalize(self.type())
        fv = free_vars(t)
        if fv:
            raise ParseError(f"unbound type variable {sorted(fv)[0]}", start.line, start.col + 1)
        return t

    # --------------------------------------------------- annotated terms

    def ann(self):
        if self.is_sym("\\"):
            self.advance()
            self.expect_sym("(")
            x = self.expect("var", "a variable").text
            self.expect_sym("::")
            t = normalize(self.type())
            self.expect_sym(")")
            self.expect_sym(".")
            return ALam(x, t, self.ann())
        if self.is_sym("\\\\"):
            self.advance()
            names = self.binders()
            self.expect_sym(".")
            body = self.ann()
            for n in reversed(names):
                body = TyLam(n, body)
            return body
        if self.is_kw("let"):
            self.advance()
            x = self.expect("var", "a let-bound name").text
            self.expect_sym("::")
            t = normalize(self.type())
            self.expect_sym("=")
            bound = self.ann()
            self.expect_kw("in")
            return ALet(x, t, bound, self.ann())
        if self.is_kw("case"):
            self.advance()
            scrut = self.ann_app({})
            self.expect_sym("::")
            st = normalize(self.type())
            self.expect_kw("of")
            branches = self.branches(self.ann_branch)
            return ACase(scrut, st, tuple(branches))
        return self.ann_app({})

    def ann_branch(self) -> ABranch:
        binders: dict[str, Type] = {}
        term = self.ann_app(binders)
        pat = _expr_to_pattern(erase(term), self.tok)
        self.expect_sym("->")
        body = self.ann()
        order = pattern_vars(pat)
        return ABranch(pat, tuple((v, binders[v]) for v in order if v in binders), term, body)

    def ann_app(self, binders: dict):
        p = self.ann_atom(binders)
        while True:
            if self.is_sym("@"):
                self.advance()
                p = TyApp(p, normalize(self.type_atom()))
            elif self.starts_atom():
                p = App(p, self.ann_atom(binders))
            else:
                return p

    def ann_atom(self, binders: dict):
        t = self.tok
        if t.kind == "var" and not self.at_boundary():
            self.advance()
            return Var(t.text)
        if t.kind == "con" and not self.at_boundary():
            self.advance()
            return Con(t.text)
        if self.is_sym("("):
            self.advance()
            self.layout.append(-1)
            if self.tok.kind == "var" and self.peek().kind == "sym" and self.peek().text == "::":
                x = self.advance().text
                self.advance()
                binders[x] = normalize(self.type())
                p = Var(x)
            elif self.tok.kind in ("var", "con") or self.is_sym("("):
                p = self.ann_app(binders)
            else:
                p = self.ann()
            self.layout.pop()
            self.expect_sym(")")
            return p
        raise self.error("expected an annotated term")


def _expr_to_pattern(e: Expr, at: Token) -> Pattern:
    match e:
        case Var(x):
            return PVar(x)
        case Con(c):
            return PCon(c, ())
        case App():
            args = []
            while isinstance(e, App):
                args.append(e.arg)
                e = e.fn
            if isinstance(e, Con):
                return PCon(e.name, tuple(_expr_to_pattern(a, at) for a in reversed(args)))
    raise ParseError("malformed pattern", at.line, at.col + 1)


# ---------------------------------------------------------- desugaring


def desugar_clauses(name: str, clauses, line: int = 0) -> Expr:
    """Turn clausal definitions into lambdas over a single ``case``."""
    arity = len(clauses[0][0])
    if any(len(ps) != arity for ps, _ in clauses):
        raise ParseError(f"clauses of {name} have different numbers of arguments", line)
    if len(clauses) == 1 and all(isinstance(p, PVar) for p in clauses[0][0]):
        pats, body = clauses[0]
        for p in reversed(pats):
            body = Lam(p.name, body)
        return body
    scrutinized = [i for i in range(arity)
                   if any(not isinstance(ps[i], PVar) for ps, _ in clauses)]
    if len(scrutinized) > 1:
        raise ParseError(f"{name} matches on more than one argument", line)
    if not scrutinized:
        raise ParseError(f"{name} has overlapping variable-only clauses", line)
    k = scrutinized[0]
    params = []
    for i in range(arity):
        if i == k:
            used = set()
            for ps, _ in clauses:
                for p in ps:
                    used.update(pattern_vars(p))
            cand, n = "arg", 0
            while cand in used:
                n += 1
                cand = f"arg{n}"
            params.append(cand)
        else:
            names = {ps[i].name for ps, _ in clauses}
            if len(names) != 1:
                raise ParseError(f"{name}: argument {i + 1} is named differently across clauses",
                                 line)
            params.append(names.pop())
    body: Expr = Case(Var(params[k]), tuple((ps[k], e) for ps, e in clauses))
    for p in reversed(params):
        body = Lam(p, body)
    return body


# ------------------------------------------------------------ programs


def _parse_decl_head(p: _Parser, allow_ann: bool):
    t = p.tok
    if t.kind == "kw" and t.text == "data":
        p.advance()
        name = p.expect("con", "a data type name").text
        p.expect_sym("::")
        kind = p.kind()
        ctors = []
        if p.is_kw("where"):
            p.advance()
            if p.tok.kind != "eof":
                def ctor():
                    c = p.expect("con", "a constructor name").text
                    p.expect_sym("::")
                    return c, p.closed_type()
                ctors = p.branches(ctor)
        p.expect_end()
        names = [c for c, _ in ctors]
        if len(set(names)) != len(names):
            raise ParseError(f"duplicate constructor in {name}", t.line)
        return DataDecl(name, kind, tuple(ctors), t.line)
    if t.kind == "kw" and t.text == "type":
        p.advance()
        name = p.expect("con", "an alias name").text
        p.expect_sym("::")
        kind = p.kind()
        p.expect_sym("=")
        body = p.closed_type()
        p.expect_end()
        return TypeAlias(name, kind, body, t.line)
    if t.kind == "var" and p.peek().kind == "sym" and p.peek().text == "::":
        name = p.advance().text
        p.advance()
        ty = p.closed_type()
        if allow_ann and p.is_sym("="):
            p.advance()
            body = p.ann()
            p.expect_end()
            return AnnDef(name, ty, body, t.line)
        p.expect_end()
        return SigDecl(name, ty, t.line)
    if t.kind == "var" and not allow_ann:
        name = p.advance().text
        pats = []
        while p.starts_atom():
            pats.append(p.pattern_atom())
        p.expect_sym("=")
        body = p.expr()
        p.expect_end()
        seen: set[str] = set()
        for q in pats:
            for v in pattern_vars(q):
                if v in seen:
                    raise ParseError(f"variable {v} bound twice in a clause of {name}", t.line)
                seen.add(v)
        return ("clause", name, tuple(pats), body, t.line)
    raise p.error("expected a declaration")


def parse_program(source: str, aliases: dict[str, Type] | None = None) -> Program:
    """Parse a source file.

    ``aliases`` carries type synonyms in from earlier files and receives the
    ones this file declares.
    """
    aliases = {} if aliases is None else aliases
    prog = Program()
    sigs: dict[str, int] = {}
    defined: set[str] = set()
    pending: list = []

    def flush():
        if not pending:
            return
        name, line = pending[0][1], pending[0][4]
        if name in defined:
            raise ParseError(f"{name} is defined twice", line)
        if name not in sigs:
            raise MissingSignature(f"{name} has no type signature", line)
        clauses = tuple((c[2], c[3]) for c in pending)
        prog.decls.append(FunDecl(name, clauses, desugar_clauses(name, clauses, line), line))
        defined.add(name)
        pending.clear()

    for chunk in split_declarations(tokenize(source)):
        p = _Parser(chunk, aliases)
        d = _parse_decl_head(p, allow_ann=False)
        if isinstance(d, tuple):
            if pending and pending[0][1] != d[1]:
                flush()
            pending.append(d)
            continue
        flush()
        match d:
            case TypeAlias(name, _, body):
                aliases[name] = body
            case SigDecl(name, _, line):
                if name in sigs:
                    raise DuplicateSignature(f"{name} has two type signatures", line)
                sigs[name] = line
        prog.decls.append(d)
    flush()
    return prog


@dataclass(frozen=True)
class AnnDef:
    name: str
    type: Type
    body: object
    line: int = 0


@dataclass
class AnnProgram:
    decls: list = field(default_factory=list)


def parse_annotated_program(source: str) -> AnnProgram:
    aliases: dict[str, Type] = {}
    prog = AnnProgram()
    for chunk in split_declarations(tokenize(source)):
        p = _Parser(chunk, aliases)
        d = _parse_decl_head(p, allow_ann=True)
        if isinstance(d, TypeAlias):
            aliases[d.name] = d.body
        prog.decls.append(d)
    return prog


def _single(source: str, parse, aliases=None):
    toks = tokenize(source)
    p = _Parser(toks, aliases)
    result = parse(p)
    p.expect_end()
    return result


def parse_type(source: str, aliases: dict[str, Type] | None = None) -> Type:
    return normalize(_single(source, _Parser.type, aliases))


def parse_expr(source: str) -> Expr:
    return _single(source, _Parser.expr)


def parse_ann(source: str, aliases: dict[str, Type] | None = None):
    return _single(source, _Parser.ann, aliases)


__all__ = [
    "ParseError", "DuplicateSignature", "MissingSignature", "Token", "tokenize",
    "parse_program", "parse_annotated_program", "parse_type", "parse_expr",
    "parse_ann", "desugar_clauses", "AnnDef", "AnnProgram",
]
