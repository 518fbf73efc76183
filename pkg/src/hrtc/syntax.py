"""Kinds, types, expressions and the substitution algebra over types.

Types are immutable trees.  A type variable carries its flavor: free
variables may be substituted by the matcher and checker, eigenvariables are
opaque constants.  Binders (``Forall`` and ``TLam``) bind by name regardless
of the flavor recorded on the bound occurrences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union


# ---------------------------------------------------------------- kinds


@dataclass(frozen=True, slots=True)
class Star:
    def __str__(self) -> str:
        return "*"


@dataclass(frozen=True, slots=True)
class KArrow:
    dom: "Kind"
    cod: "Kind"

    def __str__(self) -> str:
        left = f"({self.dom})" if isinstance(self.dom, KArrow) else str(self.dom)
        return f"{left} -> {self.cod}"


Kind = Union[Star, KArrow]
STAR = Star()


def kind_arity(k: Kind) -> int:
    n = 0
    while isinstance(k, KArrow):
        n += 1
        k = k.cod
    return n


# ---------------------------------------------------------------- types


@dataclass(frozen=True, slots=True)
class TCon:
    name: str


@dataclass(frozen=True, slots=True)
class TVar:
    name: str
    eigen: bool = False


@dataclass(frozen=True, slots=True)
class Forall:
    var: str
    body: "Type"


@dataclass(frozen=True, slots=True)
class Arrow:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True, slots=True)
class TApp:
    fn: "Type"
    arg: "Type"


@dataclass(frozen=True, slots=True)
class TLam:
    var: str
    body: "Type"


Type = Union[TCon, TVar, Forall, Arrow, TApp, TLam]


def eigen(name: str) -> TVar:
    return TVar(name, True)


def arrows(*ts: Type) -> Type:
    """``arrows(a, b, c)`` is ``a -> b -> c``."""
    result = ts[-1]
    for t in reversed(ts[:-1]):
        result = Arrow(t, result)
    return result


def foralls(names: Iterable[str], body: Type) -> Type:
    for name in reversed(list(names)):
        body = Forall(name, body)
    return body


def mk_app(head: Type, args: Iterable[Type]) -> Type:
    for a in args:
        head = TApp(head, a)
    return head


def spine(t: Type) -> tuple[Type, list[Type]]:
    args = []
    while isinstance(t, TApp):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def split_foralls(t: Type) -> tuple[list[str], Type]:
    names = []
    while isinstance(t, Forall):
        names.append(t.var)
        t = t.body
    return names, t


def split_arrows(t: Type, limit: int | None = None) -> tuple[list[Type], Type]:
    doms = []
    while isinstance(t, Arrow) and (limit is None or len(doms) < limit):
        doms.append(t.dom)
        t = t.cod
    return doms, t


def count_arrows(t: Type) -> int:
    match t:
        case Arrow(a, b):
            return 1 + count_arrows(a) + count_arrows(b)
        case TApp(f, x):
            return count_arrows(f) + count_arrows(x)
        case Forall(_, b) | TLam(_, b):
            return count_arrows(b)
    return 0


def type_size(t: Type) -> int:
    match t:
        case Arrow(a, b):
            return 1 + type_size(a) + type_size(b)
        case TApp(f, x):
            return type_size(f) + type_size(x)
        case Forall(_, b) | TLam(_, b):
            return 1 + type_size(b)
    return 1


# ------------------------------------------------------ variable sets


def _vars(t: Type, bound: frozenset, want_eigen: bool | None, out: set) -> None:
    match t:
        case TVar(name, eig):
            if name not in bound and (want_eigen is None or eig == want_eigen):
                out.add(name)
        case Arrow(a, b) | TApp(a, b):
            _vars(a, bound, want_eigen, out)
            _vars(b, bound, want_eigen, out)
        case Forall(v, b) | TLam(v, b):
            _vars(b, bound | {v}, want_eigen, out)


def free_vars(t: Type) -> set[str]:
    """Free-flavored type variables of ``t`` (bound names excluded)."""
    out: set[str] = set()
    _vars(t, frozenset(), False, out)
    return out


def eigen_vars(t: Type) -> set[str]:
    out: set[str] = set()
    _vars(t, frozenset(), True, out)
    return out


def type_vars(t: Type) -> set[str]:
    """All unbound variable names, either flavor."""
    out: set[str] = set()
    _vars(t, frozenset(), None, out)
    return out


def all_names(t: Type, out: set | None = None) -> set[str]:
    if out is None:
        out = set()
    match t:
        case TVar(name, _):
            out.add(name)
        case Arrow(a, b) | TApp(a, b):
            all_names(a, out)
            all_names(b, out)
        case Forall(v, b) | TLam(v, b):
            out.add(v)
            all_names(b, out)
    return out


def free_vars_all(ts: Iterable[Type]) -> set[str]:
    out: set[str] = set()
    for t in ts:
        _vars(t, frozenset(), False, out)
    return out


def eigen_vars_all(ts: Iterable[Type]) -> set[str]:
    out: set[str] = set()
    for t in ts:
        _vars(t, frozenset(), True, out)
    return out


# ------------------------------------------------------- substitution


def _prime(name: str, avoid: set[str]) -> str:
    cand = name + "'"
    while cand in avoid:
        cand += "'"
    return cand


def _subst(t: Type, m: Mapping[str, Type], any_flavor: bool) -> Type:
    match t:
        case TVar(name, eig):
            if name in m and (any_flavor or not eig):
                return m[name]
            return t
        case TCon():
            return t
        case Arrow(a, b):
            return Arrow(_subst(a, m, any_flavor), _subst(b, m, any_flavor))
        case TApp(a, b):
            return TApp(_subst(a, m, any_flavor), _subst(b, m, any_flavor))
        case Forall(v, body) | TLam(v, body):
            inner = {k: x for k, x in m.items() if k != v}
            live = type_vars(body)
            inner = {k: x for k, x in inner.items() if k in live}
            if not inner:
                return t
            incoming = set()
            for x in inner.values():
                incoming |= type_vars(x)
            if v in incoming:
                avoid = incoming | all_names(body) | set(inner)
                v2 = _prime(v, avoid)
                body = _subst(body, {v: TVar(v2)}, True)
                v = v2
            body = _subst(body, inner, any_flavor)
            return Forall(v, body) if isinstance(t, Forall) else TLam(v, body)
    raise TypeError(f"not a type: {t!r}")


def rename_bound(t: Type, name: str, replacement: Type) -> Type:
    """Replace every unbound occurrence of ``name`` (either flavor)."""
    return _subst(t, {name: replacement}, True)


def instantiate(t: Forall, replacement: Type) -> Type:
    return normalize(rename_bound(t.body, t.var, replacement))


def normalize(t: Type) -> Type:
    """Beta-normal form."""
    match t:
        case TCon() | TVar():
            return t
        case Arrow(a, b):
            return Arrow(normalize(a), normalize(b))
        case Forall(v, b):
            return Forall(v, normalize(b))
        case TLam(v, b):
            return TLam(v, normalize(b))
        case TApp(f, x):
            f = normalize(f)
            x = normalize(x)
            if isinstance(f, TLam):
                return normalize(rename_bound(f.body, f.var, x))
            return TApp(f, x)
    raise TypeError(f"not a type: {t!r}")


def alpha_eq(a: Type, b: Type) -> bool:
    return _alpha(a, b, {}, {}, 0)


def _alpha(a: Type, b: Type, ea: dict, eb: dict, depth: int) -> bool:
    match a, b:
        case TVar(n1, e1), TVar(n2, e2):
            i1, i2 = ea.get(n1), eb.get(n2)
            if i1 is not None or i2 is not None:
                return i1 == i2
            return n1 == n2 and e1 == e2
        case TCon(n1), TCon(n2):
            return n1 == n2
        case Arrow(a1, b1), Arrow(a2, b2):
            return _alpha(a1, a2, ea, eb, depth) and _alpha(b1, b2, ea, eb, depth)
        case TApp(a1, b1), TApp(a2, b2):
            return _alpha(a1, a2, ea, eb, depth) and _alpha(b1, b2, ea, eb, depth)
        case Forall(v1, b1), Forall(v2, b2):
            return _alpha(b1, b2, {**ea, v1: depth}, {**eb, v2: depth}, depth + 1)
        case TLam(v1, b1), TLam(v2, b2):
            return _alpha(b1, b2, {**ea, v1: depth}, {**eb, v2: depth}, depth + 1)
    return False


def types_equiv(a: Type, b: Type) -> bool:
    """Alpha-beta equivalence."""
    return alpha_eq(normalize(a), normalize(b))


class DisagreementError(Exception):
    """One variable received two non-equivalent bindings."""

    def __init__(self, var: str, first: Type, second: Type):
        super().__init__(f"disagreeing bindings for {var}")
        self.var = var
        self.first = first
        self.second = second


class Subst:
    """Finite map from free type variables to types."""

    __slots__ = ("bindings",)

    def __init__(self, bindings: Mapping[str, Type] | None = None):
        self.bindings: dict[str, Type] = dict(bindings or {})

    @classmethod
    def single(cls, var: str, t: Type) -> "Subst":
        return cls({var: t})

    def __contains__(self, var: str) -> bool:
        return var in self.bindings

    def __getitem__(self, var: str) -> Type:
        return self.bindings[var]

    def __len__(self) -> int:
        return len(self.bindings)

    def __iter__(self):
        return iter(self.bindings)

    def items(self):
        return self.bindings.items()

    def dom(self) -> set[str]:
        return set(self.bindings)

    def codom_free_vars(self) -> set[str]:
        return free_vars_all(self.bindings.values())

    def codom_eigen_vars(self) -> set[str]:
        return eigen_vars_all(self.bindings.values())

    def apply(self, t: Type) -> Type:
        if not self.bindings:
            return t
        return normalize(_subst(t, self.bindings, False))

    def compose(self, inner: "Subst") -> "Subst":
        """``self . inner``: apply ``inner`` first, then ``self``."""
        return compose_subst(self, inner)

    def restrict(self, names: Iterable[str]) -> "Subst":
        keep = set(names)
        return Subst({k: v for k, v in self.bindings.items() if k in keep})

    def equiv(self, other: "Subst") -> bool:
        if set(self.bindings) != set(other.bindings):
            return False
        return all(alpha_eq(normalize(v), normalize(other.bindings[k]))
                   for k, v in self.bindings.items())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Subst) and self.equiv(other)

    def __hash__(self) -> int:
        return hash(frozenset(self.bindings))

    def __repr__(self) -> str:
        from hrtc.pretty import show_type

        body = ", ".join(f"{show_type(v)}/{k}" for k, v in self.bindings.items())
        return f"[{body}]"


IDENTITY = Subst()


def compose_subst(outer: Subst, inner: Subst) -> Subst:
    result = {k: outer.apply(v) for k, v in inner.bindings.items()}
    for k, v in outer.bindings.items():
        if k in result:
            if not alpha_eq(normalize(v), result[k]):
                raise DisagreementError(k, result[k], v)
        else:
            result[k] = normalize(v)
    return Subst(result)


# ---------------------------------------------------------- expressions


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Con:
    name: str


@dataclass(frozen=True, slots=True)
class App:
    fn: "Expr"
    arg: "Expr"


@dataclass(frozen=True, slots=True)
class Lam:
    var: str
    body: "Expr"


@dataclass(frozen=True, slots=True)
class Let:
    var: str
    annotation: Type | None
    bound: "Expr"
    body: "Expr"


@dataclass(frozen=True, slots=True)
class PVar:
    name: str


@dataclass(frozen=True, slots=True)
class PCon:
    con: str
    args: tuple["Pattern", ...] = ()


Pattern = Union[PVar, PCon]


@dataclass(frozen=True, slots=True)
class Case:
    scrutinee: "Expr"
    branches: tuple[tuple[Pattern, "Expr"], ...]


Expr = Union[Var, Con, App, Lam, Let, Case]


def expr_spine(e) -> tuple[object, list]:
    args = []
    while isinstance(e, App):
        args.append(e.arg)
        e = e.fn
    args.reverse()
    return e, args


def mk_eapp(head, args):
    for a in args:
        head = App(head, a)
    return head


def pattern_vars(p: Pattern) -> list[str]:
    match p:
        case PVar(name):
            return [name]
        case PCon(_, args):
            out = []
            for a in args:
                out.extend(pattern_vars(a))
            return out
    raise TypeError(p)


def pattern_expr(p: Pattern) -> Expr:
    match p:
        case PVar(name):
            return Var(name)
        case PCon(c, args):
            return mk_eapp(Con(c), [pattern_expr(a) for a in args])
    raise TypeError(p)


# ------------------------------------------------- annotated expressions


@dataclass(frozen=True, slots=True)
class ALam:
    var: str
    annotation: Type
    body: "AnnExpr"


@dataclass(frozen=True, slots=True)
class TyLam:
    var: str
    body: "AnnExpr"


@dataclass(frozen=True, slots=True)
class TyApp:
    fn: "AnnExpr"
    arg: Type


@dataclass(frozen=True, slots=True)
class ALet:
    var: str
    annotation: Type
    bound: "AnnExpr"
    body: "AnnExpr"


@dataclass(frozen=True, slots=True)
class ABranch:
    pattern: Pattern
    binders: tuple[tuple[str, Type], ...]
    pattern_term: "AnnExpr"
    body: "AnnExpr"


@dataclass(frozen=True, slots=True)
class ACase:
    scrutinee: "AnnExpr"
    scrutinee_type: Type
    branches: tuple[ABranch, ...]


AnnExpr = Union[Var, Con, App, ALam, TyLam, TyApp, ALet, ACase]


def erase(p) -> Expr:
    match p:
        case Var() | Con():
            return p
        case App(f, x):
            return App(erase(f), erase(x))
        case ALam(x, _, body):
            return Lam(x, erase(body))
        case TyLam(_, body):
            return erase(body)
        case TyApp(f, _):
            return erase(f)
        case ALet(x, _, bound, body):
            return Let(x, None, erase(bound), erase(body))
        case ACase(s, _, branches):
            return Case(erase(s), tuple((b.pattern, erase(b.body)) for b in branches))
    raise TypeError(f"not an annotated expression: {p!r}")


def strip_let_annotations(e: Expr) -> Expr:
    """Source view used when comparing against an erased elaboration."""
    match e:
        case App(f, x):
            return App(strip_let_annotations(f), strip_let_annotations(x))
        case Lam(x, body):
            return Lam(x, strip_let_annotations(body))
        case Let(x, _, bound, body):
            return Let(x, None, strip_let_annotations(bound), strip_let_annotations(body))
        case Case(s, branches):
            return Case(strip_let_annotations(s),
                        tuple((p, strip_let_annotations(b)) for p, b in branches))
    return e


def map_ann_types(p, f):
    """Apply ``f`` to every type embedded in an annotated expression."""
    match p:
        case Var() | Con():
            return p
        case App(a, b):
            return App(map_ann_types(a, f), map_ann_types(b, f))
        case ALam(x, t, body):
            return ALam(x, f(t), map_ann_types(body, f))
        case TyLam(a, body):
            return TyLam(a, map_ann_types(body, f))
        case TyApp(a, t):
            return TyApp(map_ann_types(a, f), f(t))
        case ALet(x, t, bound, body):
            return ALet(x, f(t), map_ann_types(bound, f), map_ann_types(body, f))
        case ACase(s, t, branches):
            return ACase(
                map_ann_types(s, f),
                f(t),
                tuple(
                    ABranch(b.pattern, tuple((n, f(bt)) for n, bt in b.binders),
                            map_ann_types(b.pattern_term, f), map_ann_types(b.body, f))
                    for b in branches
                ),
            )
    raise TypeError(p)


# ---------------------------------------------------------- fresh names


def base_name(name: str) -> str:
    """``a12#`` -> ``a``; ``x'`` -> ``x``."""
    base = name.rstrip("#'")
    stripped = base.rstrip("0123456789")
    return stripped or base or "t"


def fresh(name: str, counter: int) -> tuple[str, int]:
    """Generated names are ``<base><counter>#``; returns the bumped counter."""
    return f"{base_name(name)}{counter}#", counter + 1


# -------------------------------------------------------------- contexts


@dataclass(frozen=True)
class Context:
    """Term bindings (variables, constructors) and kind bindings."""

    terms: Mapping[str, Type]
    kinds: Mapping[str, Kind]
    constructors: Mapping[str, str] = None  # constructor -> data type name

    @classmethod
    def empty(cls) -> "Context":
        return cls({}, {}, {})

    def with_term(self, name: str, t: Type) -> "Context":
        return Context({**self.terms, name: t}, self.kinds, self.constructors)

    def with_kind(self, name: str, k: Kind) -> "Context":
        return Context(self.terms, {**self.kinds, name: k}, self.constructors)

    def with_constructor(self, name: str, t: Type, data: str) -> "Context":
        return Context({**self.terms, name: t}, self.kinds,
                       {**(self.constructors or {}), name: data})
