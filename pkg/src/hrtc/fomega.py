"""Proof checker for annotated System F-omega terms.

This module deliberately shares nothing with the matcher or the goal-directed
checker: it only reads the annotated term and the context, synthesizes types
syntax-directedly, and compares them by normalization and alpha-equivalence.

Variable flavors are ignored here.  A type variable is a type variable; it is
bound by a type abstraction or a quantifier, or else it is free.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from hrtc.kinds import KindError, check_kind
from hrtc.pretty import show_type
from hrtc.syntax import (
    STAR, ABranch, ACase, ALam, ALet, App, Arrow, Con, Context, Forall, PCon,
    PVar, TApp, TLam, TVar, TyApp, TyLam, Type, Var, alpha_eq, erase,
    free_vars, normalize, pattern_expr, pattern_vars, spine,
)


class ProofError(Exception):
    def __init__(self, message: str, path: tuple[str, ...] = (),
                 expected: Type | None = None, found: Type | None = None):
        self.message, self.path, self.expected, self.found = message, path, expected, found
        text = message
        if expected is not None:
            text += f"; expected {show_type(expected)}"
        if found is not None:
            text += f", found {show_type(found)}"
        if path:
            text += f" (at {'/'.join(path)})"
        super().__init__(text)


class NonExhaustiveWarning(UserWarning):
    pass


def plain(t: Type) -> Type:
    """Forget variable flavors."""
    match t:
        case TVar(name, True):
            return TVar(name)
        case Arrow(a, b):
            return Arrow(plain(a), plain(b))
        case TApp(a, b):
            return TApp(plain(a), plain(b))
        case Forall(v, b):
            return Forall(v, plain(b))
        case TLam(v, b):
            return TLam(v, plain(b))
    return t


def convertible(a: Type, b: Type) -> bool:
    return alpha_eq(normalize(plain(a)), normalize(plain(b)))


@dataclass(frozen=True)
class _Env:
    ctx: Context
    locals: tuple[tuple[str, Type], ...] = ()
    ctx_fv: frozenset = frozenset()

    @classmethod
    def of(cls, ctx: Context) -> "_Env":
        fv: set[str] = set()
        for t in ctx.terms.values():
            fv |= free_vars(plain(t))
        return cls(ctx, (), frozenset(fv))

    def lookup(self, name: str) -> Type | None:
        for x, t in reversed(self.locals):
            if x == name:
                return t
        return self.ctx.terms.get(name)

    def bind(self, name: str, t: Type) -> "_Env":
        return _Env(self.ctx, self.locals + ((name, t),), self.ctx_fv)

    def free_type_vars(self) -> set[str]:
        out = set(self.ctx_fv)
        for _, t in self.locals:
            out |= free_vars(t)
        return out


def _kind_ok(env: _Env, t: Type, path) -> None:
    try:
        check_kind(env.ctx.kinds, t, STAR, open_vars=True)
    except KindError as err:
        raise ProofError(f"ill-kinded type {show_type(t)}: {err}", path) from None


def _type_of(env: _Env, p, path: tuple[str, ...]) -> Type:
    match p:
        case Var(x) | Con(x):
            t = env.lookup(x)
            if t is None:
                raise ProofError(f"unbound name {x}", path)
            return normalize(plain(t))
        case App(f, x):
            tf = _type_of(env, f, path + ("fn",))
            if not isinstance(tf, Arrow):
                raise ProofError("applying a term whose type is not a function", path,
                                 found=tf)
            tx = _type_of(env, x, path + ("arg",))
            if not convertible(tf.dom, tx):
                raise ProofError("argument type mismatch", path + ("arg",), tf.dom, tx)
            return tf.cod
        case ALam(x, t, body):
            t = normalize(plain(t))
            _kind_ok(env, t, path)
            return Arrow(t, _type_of(env.bind(x, t), body, path + ("body",)))
        case TyLam(a, body):
            if a in env.free_type_vars():
                raise ProofError(f"type variable {a} is free in the context", path)
            return Forall(a, _type_of(env, body, path + ("body",)))
        case TyApp(f, t):
            tf = _type_of(env, f, path + ("fn",))
            if not isinstance(tf, Forall):
                raise ProofError("type application of a term that is not polymorphic", path,
                                 found=tf)
            t = normalize(plain(t))
            try:
                check_kind(env.ctx.kinds, TApp(TLam(tf.var, tf.body), t), STAR, open_vars=True)
            except KindError as err:
                raise ProofError(f"ill-kinded instantiation with {show_type(t)}: {err}",
                                 path) from None
            return normalize(TApp(TLam(tf.var, tf.body), t))
        case ALet(x, t, bound, body):
            t = normalize(plain(t))
            _kind_ok(env, t, path)
            inner = env.bind(x, t)
            tb = _type_of(inner, bound, path + ("bound",))
            if not convertible(t, tb):
                raise ProofError("let-bound term does not have its annotated type",
                                 path + ("bound",), t, tb)
            return _type_of(inner, body, path + ("body",))
        case ACase(s, st, branches):
            st = normalize(plain(st))
            _kind_ok(env, st, path)
            ts = _type_of(env, s, path + ("scrutinee",))
            if not convertible(st, ts):
                raise ProofError("scrutinee type mismatch", path + ("scrutinee",), st, ts)
            if not branches:
                raise ProofError("case without branches", path)
            result = None
            for i, b in enumerate(branches):
                tb = _branch(env, b, st, path + (f"branch{i}",))
                if result is None:
                    result = tb
                elif not convertible(result, tb):
                    raise ProofError("branch types disagree", path + (f"branch{i}",), result, tb)
            _warn_exhaustive(env.ctx, st, branches)
            return result
    raise ProofError(f"not an annotated term: {p!r}", path)


def _branch(env: _Env, b: ABranch, st: Type, path) -> Type:
    names = pattern_vars(b.pattern)
    if sorted(names) != sorted(n for n, _ in b.binders) or len(set(names)) != len(names):
        raise ProofError("pattern binders do not match the pattern", path)
    if erase(b.pattern_term) != pattern_expr(b.pattern):
        raise ProofError("pattern term does not erase to the pattern", path)
    _check_constructors(env.ctx, b.pattern, path)
    inner = env
    for n, t in b.binders:
        t = normalize(plain(t))
        _kind_ok(env, t, path)
        inner = inner.bind(n, t)
    tp = _type_of(inner, b.pattern_term, path + ("pattern",))
    if not convertible(st, tp):
        raise ProofError("pattern type mismatch", path + ("pattern",), st, tp)
    return _type_of(inner, b.body, path + ("body",))


def _check_constructors(ctx: Context, p, path) -> None:
    match p:
        case PCon(c, args):
            if c not in (ctx.constructors or {}):
                raise ProofError(f"{c} is not a data constructor", path)
            for a in args:
                _check_constructors(ctx, a, path)


def _warn_exhaustive(ctx: Context, st: Type, branches) -> None:
    if any(isinstance(b.pattern, PVar) for b in branches):
        return
    head, _ = spine(st)
    ctors = ctx.constructors or {}
    data = getattr(head, "name", None)
    expected = {c for c, d in ctors.items() if d == data}
    covered = {b.pattern.con for b in branches if isinstance(b.pattern, PCon)}
    missing = expected - covered
    if missing:
        warnings.warn(f"non-exhaustive case on {show_type(st)}: missing "
                      f"{', '.join(sorted(missing))}", NonExhaustiveWarning, stacklevel=3)


def type_of(ctx: Context, p) -> Type:
    """Synthesize the type of a fully annotated term."""
    return _type_of(_Env.of(ctx), p, ())


def proof_check(ctx: Context, p, t: Type) -> bool:
    try:
        check_proof(ctx, p, t)
    except ProofError:
        return False
    return True


def check_proof(ctx: Context, p, t: Type) -> None:
    """Like :func:`proof_check` but raises :class:`ProofError` with a path."""
    found = type_of(ctx, p)
    if not convertible(t, found):
        raise ProofError("type mismatch", (), normalize(plain(t)), found)


__all__ = [
    "ProofError", "NonExhaustiveWarning", "type_of", "proof_check", "check_proof",
    "convertible", "plain",
]
