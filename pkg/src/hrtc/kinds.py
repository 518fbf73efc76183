"""Kind inference and declaration checking.

Binder kinds are not written in source, so inference works over kind
metavariables solved by first-order unification; whatever stays unsolved
defaults to ``*``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from hrtc.pretty import show_type
from hrtc.program import DataDecl, Decl, FunDecl, SigDecl, TypeAlias
from hrtc.syntax import (
    STAR, Arrow, Context, Forall, KArrow, Kind, TApp, TCon, TLam, TVar,
    Type, kind_arity, split_arrows, split_foralls, spine,
)


class KindError(Exception):
    pass


class KindMismatch(KindError):
    def __init__(self, expected, found, location: str):
        self.expected, self.found, self.location = expected, found, location
        super().__init__(f"kind mismatch in {location}: expected {expected}, found {found}")


class UnboundTypeConstant(KindError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound type constant {name}")


class UnboundTypeVariable(KindError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound type variable {name}")


class ConstructorResultMismatch(KindError):
    def __init__(self, constructor: str, data: str, found: Type):
        self.constructor, self.data, self.found = constructor, data, found
        super().__init__(f"constructor {constructor} must return {data} fully applied, "
                         f"not {show_type(found)}")


@dataclass(frozen=True, slots=True)
class KMeta:
    id: int

    def __str__(self) -> str:
        return f"?k{self.id}"


class _Solver:
    def __init__(self) -> None:
        self.solution: dict[int, object] = {}
        self.next = 0

    def fresh(self) -> KMeta:
        self.next += 1
        return KMeta(self.next)

    def resolve(self, k):
        while isinstance(k, KMeta) and k.id in self.solution:
            k = self.solution[k.id]
        return k

    def zonk(self, k, default: bool = True):
        k = self.resolve(k)
        match k:
            case KMeta():
                return STAR if default else k
            case KArrow(a, b):
                return KArrow(self.zonk(a, default), self.zonk(b, default))
        return k

    def occurs(self, m: KMeta, k) -> bool:
        k = self.resolve(k)
        match k:
            case KMeta(i):
                return i == m.id
            case KArrow(a, b):
                return self.occurs(m, a) or self.occurs(m, b)
        return False

    def unify(self, k1, k2, where: Type) -> None:
        k1, k2 = self.resolve(k1), self.resolve(k2)
        if k1 == k2:
            return
        if isinstance(k1, KMeta):
            if self.occurs(k1, k2):
                raise KindMismatch(self.zonk(k1), self.zonk(k2), show_type(where))
            self.solution[k1.id] = k2
            return
        if isinstance(k2, KMeta):
            self.unify(k2, k1, where)
            return
        if isinstance(k1, KArrow) and isinstance(k2, KArrow):
            self.unify(k1.dom, k2.dom, where)
            self.unify(k1.cod, k2.cod, where)
            return
        raise KindMismatch(self.zonk(k1), self.zonk(k2), show_type(where))


def _infer(s: _Solver, delta: Mapping[str, Kind], local: dict, t: Type, open_vars: bool):
    match t:
        case TCon(name):
            if name not in delta:
                raise UnboundTypeConstant(name)
            return delta[name]
        case TVar(name, _):
            if name in local:
                return local[name]
            if name in delta:
                return delta[name]
            if not open_vars:
                raise UnboundTypeVariable(name)
            local[name] = s.fresh()
            return local[name]
        case Arrow(a, b):
            s.unify(STAR, _infer(s, delta, local, a, open_vars), a)
            s.unify(STAR, _infer(s, delta, local, b, open_vars), b)
            return STAR
        case Forall(v, body) | TLam(v, body):
            saved = local.get(v)
            kv = local[v] = s.fresh()
            kb = _infer(s, delta, local, body, open_vars)
            if saved is None:
                del local[v]
            else:
                local[v] = saved
            if isinstance(t, Forall):
                s.unify(STAR, kb, body)
                return STAR
            return KArrow(kv, kb)
        case TApp(f, a):
            kf = _infer(s, delta, local, f, open_vars)
            ka = _infer(s, delta, local, a, open_vars)
            r = s.fresh()
            s.unify(kf, KArrow(ka, r), t)
            return r
    raise TypeError(t)


def infer_kind(delta: Mapping[str, Kind], t: Type, open_vars: bool = False) -> Kind:
    """Infer the kind of ``t``.

    With ``open_vars`` set, variables missing from ``delta`` get kinds from
    their use instead of raising, which suits types fabricated during checking.
    """
    s = _Solver()
    return s.zonk(_infer(s, delta, {}, t, open_vars))


def check_kind(delta: Mapping[str, Kind], t: Type, expected: Kind = STAR,
               open_vars: bool = False) -> None:
    s = _Solver()
    s.unify(expected, _infer(s, delta, {}, t, open_vars), t)


def infer_var_kinds(delta: Mapping[str, Kind], types: list[Type]) -> dict[str, Kind]:
    """Kinds of the variables left open in ``types``, each type being of kind ``*``."""
    s = _Solver()
    local: dict = {}
    for t in types:
        s.unify(STAR, _infer(s, delta, local, t, True), t)
    return {v: s.zonk(k) for v, k in local.items()}


def check_decl(ctx: Context, d: Decl) -> Context:
    match d:
        case DataDecl(name, kind, constructors):
            ctx = ctx.with_kind(name, kind)
            arity = kind_arity(kind)
            for cname, ctype in constructors:
                check_kind(ctx.kinds, ctype)
                _, body = split_foralls(ctype)
                _, result = split_arrows(body)
                head, args = spine(result)
                if not (isinstance(head, TCon) and head.name == name and len(args) == arity):
                    raise ConstructorResultMismatch(cname, name, result)
                ctx = ctx.with_constructor(cname, ctype, name)
            return ctx
        case TypeAlias(name, kind, body):
            check_kind(ctx.kinds, body, kind)
            return ctx
        case SigDecl(name, t):
            check_kind(ctx.kinds, t)
            return ctx.with_term(name, t)
        case FunDecl():
            return ctx
    raise TypeError(d)


__all__ = [
    "KindError", "KindMismatch", "UnboundTypeConstant", "UnboundTypeVariable",
    "ConstructorResultMismatch", "infer_kind", "check_kind", "infer_var_kinds",
    "check_decl",
]
