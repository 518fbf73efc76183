"""Printing of types, source expressions and annotated terms.

Annotated terms use the output notation of the checker: ``\\ (x :: T) . e``
for term abstraction, ``\\\\ a . e`` for type abstraction and ``e @T`` for
type application.
"""

from __future__ import annotations

from hrtc.syntax import (
    ABranch, ACase, ALam, ALet, App, Arrow, Case, Con, Forall, Lam, Let,
    PCon, PVar, TApp, TCon, TLam, TVar, TyApp, TyLam, Var, spine,
)


def show_kind(k) -> str:
    return str(k)


def _atomic_type(t) -> bool:
    return isinstance(t, (TCon, TVar))


def show_type(t) -> str:
    match t:
        case TCon(name) | TVar(name, _):
            return name
        case Forall():
            names = []
            while isinstance(t, Forall):
                names.append(t.var)
                t = t.body
            return f"forall {' '.join(names)} . {show_type(t)}"
        case TLam(v, body):
            return f"\\ {v} . {show_type(body)}"
        case Arrow(a, b):
            left = f"({show_type(a)})" if isinstance(a, (Arrow, Forall, TLam)) else show_type(a)
            right = f"({show_type(b)})" if isinstance(b, (Forall, TLam)) else show_type(b)
            return f"{left} -> {right}"
        case TApp():
            head, args = spine(t)
            parts = [show_type_atom(head)] + [show_type_atom(a) for a in args]
            return " ".join(parts)
    raise TypeError(t)


def show_type_atom(t) -> str:
    s = show_type(t)
    return s if _atomic_type(t) else f"({s})"


# ---------------------------------------------------------- source terms


def show_pattern(p, top: bool = True) -> str:
    match p:
        case PVar(name):
            return name
        case PCon(c, ()):
            return c
        case PCon(c, args):
            s = " ".join([c] + [show_pattern(a, False) for a in args])
            return s if top else f"({s})"
    raise TypeError(p)


def show_expr(e) -> str:
    match e:
        case Var(name) | Con(name):
            return name
        case Lam():
            names = []
            while isinstance(e, Lam):
                names.append(e.var)
                e = e.body
            return f"\\ {' '.join(names)} -> {show_expr(e)}"
        case Let(x, None, bound, body):
            return f"let {x} = {show_expr(bound)} in {show_expr(body)}"
        case Let(x, ann, bound, body):
            return f"let {x} :: {show_type(ann)} = {show_expr(bound)} in {show_expr(body)}"
        case Case(s, branches):
            inner = " ; ".join(f"{show_pattern(p)} -> {show_expr(b)}" for p, b in branches)
            return f"case {show_expr(s)} of {{ {inner} }}"
        case App(f, x):
            left = show_expr(f) if isinstance(f, (App, Var, Con)) else f"({show_expr(f)})"
            right = show_expr(x) if isinstance(x, (Var, Con)) else f"({show_expr(x)})"
            return f"{left} {right}"
    raise TypeError(e)


# ------------------------------------------------------- annotated terms


def show_ann(p, typed_vars: dict | None = None) -> str:
    """Render an annotated term; ``typed_vars`` marks pattern binders."""
    match p:
        case Var(name):
            if typed_vars and name in typed_vars:
                return f"({name} :: {show_type(typed_vars[name])})"
            return name
        case Con(name):
            return name
        case ALam(x, t, body):
            return f"\\ ({x} :: {show_type(t)}) . {show_ann(body, typed_vars)}"
        case TyLam(a, body):
            return f"\\\\ {a} . {show_ann(body, typed_vars)}"
        case ALet(x, t, bound, body):
            return (f"let {x} :: {show_type(t)} = {show_ann(bound, typed_vars)} "
                    f"in {show_ann(body, typed_vars)}")
        case ACase(s, t, branches):
            inner = " ; ".join(_show_branch(b) for b in branches)
            return f"case {show_ann(s, typed_vars)} :: {show_type(t)} of {{ {inner} }}"
        case App(f, x):
            return f"{_show_fn(f, typed_vars)} {_show_arg(x, typed_vars)}"
        case TyApp(f, t):
            return f"{_show_fn(f, typed_vars)} @{show_type_atom(t)}"
    raise TypeError(p)


def _show_branch(b: ABranch) -> str:
    pat = show_ann(b.pattern_term, dict(b.binders))
    return f"{pat} -> {show_ann(b.body)}"


def _show_fn(f, typed_vars) -> str:
    if isinstance(f, (App, TyApp, Var, Con)):
        return show_ann(f, typed_vars)
    return f"({show_ann(f, typed_vars)})"


def _show_arg(x, typed_vars) -> str:
    if isinstance(x, (Var, Con)):
        return show_ann(x, typed_vars)
    return f"({show_ann(x, typed_vars)})"


def show_decl_annotated(name: str, sig, body) -> str:
    return f"{name} :: {show_type(sig)} =\n  {show_ann(body)}"


__all__ = [
    "show_kind", "show_type", "show_type_atom", "show_expr", "show_pattern",
    "show_ann", "show_decl_annotated",
]
