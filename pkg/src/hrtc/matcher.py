"""Bidirectional second-order matching.

The search runs over states ``(E, V, sigma)``: pending equations, the
eigenvariables introduced so far, and the substitution built up.  Only the
first equation of ``E`` is ever rewritten.  Projection and imitation do not
substitute into ``E``, so one variable may collect several bindings; they are
reconciled at terminal states.  An optional pruning pass drops states whose
bindings can already never be reconciled; it shrinks the tree without
changing the set of successful unifiers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

from hrtc.syntax import (
    Arrow, Forall, Subst, TApp, TCon, TLam, TVar, Type, _subst, alpha_eq,
    fresh, free_vars, mk_app, normalize, rename_bound, spine,
    type_size, type_vars,
)



class MeasureError(AssertionError):
    """A transition failed to decrease the termination measure."""


@dataclass(frozen=True)
class UnifState:
    equations: tuple[tuple[Type, Type], ...]
    eigens: frozenset = frozenset()
    bindings: tuple[tuple[str, Type], ...] = ()
    counter: int = 0


@dataclass(frozen=True)
class Terminal:
    state: UnifState
    rules: tuple[str, ...]


# ------------------------------------------------------------ templates


def projection(n: int, i: int) -> Type:
    """``\\a1 ... an . ai`` (``i`` counts from 1)."""
    if not 1 <= i <= n:
        raise ValueError(f"projection index {i} out of range 1..{n}")
    names = [f"a{k}" for k in range(1, n + 1)]
    body: Type = TVar(names[i - 1])
    for name in reversed(names):
        body = TLam(name, body)
    return body


def _binder_names(n: int, avoid: set[str]) -> list[str]:
    names = []
    k = 1
    while len(names) < n:
        cand = f"a{k}"
        if cand not in avoid:
            names.append(cand)
        k += 1
    return names


def theta(n: int, m: int, head: Type, counter: int = 0) -> tuple[Type, list[str], int]:
    """Imitation template ``\\a1..an . head (b1 a1..an) .. (bm a1..an)``.

    ``head`` is a constant, a rigid variable, or ``None``-like arrow marker
    (pass ``ARROW_HEAD`` and ``m == 2``).  Returns the template, the fresh
    ``b`` names and the bumped counter.
    """
    bs = []
    for _ in range(m):
        b, counter = fresh("b", counter)
        bs.append(b)
    avoid = set(bs) | (type_vars(head) if head is not ARROW_HEAD else set())
    params = _binder_names(n, avoid)
    args = [mk_app(TVar(b), [TVar(p) for p in params]) for b in bs]
    if head is ARROW_HEAD:
        body: Type = Arrow(args[0], args[1])
    else:
        body = mk_app(head, args)
    for p in reversed(params):
        body = TLam(p, body)
    return body, bs, counter


class _ArrowHead:
    def __repr__(self) -> str:
        return "->"


ARROW_HEAD = _ArrowHead()


# ------------------------------------------------------- classification


def is_free_var(t: Type) -> bool:
    return isinstance(t, TVar) and not t.eigen


def is_flex(t: Type) -> bool:
    head, _ = spine(t)
    return isinstance(head, TVar) and not head.eigen


def rigid_view(t: Type):
    """``(key, args)`` for constant-, eigenvariable- or arrow-headed types."""
    if isinstance(t, Arrow):
        return ("->", [t.dom, t.cod])
    head, args = spine(t)
    if isinstance(head, TCon):
        return (("C", head.name), args)
    if isinstance(head, TVar) and head.eigen:
        return (("E", head.name), args)
    return None


def _imitation_head(t: Type):
    if isinstance(t, Arrow):
        return ARROW_HEAD, [t.dom, t.cod]
    head, args = spine(t)
    if isinstance(head, TCon) or (isinstance(head, TVar) and head.eigen):
        return head, args
    return None, None


# ---------------------------------------------------------------- steps


def _compose(bindings, var: str, t: Type):
    one = {var: t}
    updated = tuple((b, normalize(_subst(s, one, False))) for b, s in bindings)
    return updated + ((var, t),)


def step(s: UnifState) -> list[tuple[str, UnifState]]:
    """All single-step successors of the first equation."""
    if not s.equations:
        return []
    (lhs, rhs), rest = s.equations[0], s.equations[1:]

    if alpha_eq(lhs, rhs):
        return [("delete", UnifState(rest, s.eigens, s.bindings, s.counter))]

    if is_free_var(lhs):
        if lhs.name in free_vars(rhs):
            return []
        one = {lhs.name: rhs}
        eqs = tuple((normalize(_subst(a, one, False)), normalize(_subst(b, one, False)))
                    for a, b in rest)
        return [("bind", UnifState(eqs, s.eigens, _compose(s.bindings, lhs.name, rhs),
                                   s.counter))]

    if is_free_var(rhs):
        return [("orient", UnifState(((rhs, lhs),) + rest, s.eigens, s.bindings, s.counter))]

    if (isinstance(lhs, Forall) and isinstance(rhs, Forall)) or (
            isinstance(lhs, TLam) and isinstance(rhs, TLam)):
        name, counter = fresh(lhs.var, s.counter)
        ev = TVar(name, True)
        eq = (normalize(rename_bound(lhs.body, lhs.var, ev)),
              normalize(rename_bound(rhs.body, rhs.var, ev)))
        return [("forall", UnifState((eq,) + rest, s.eigens | {name}, s.bindings, counter))]

    lflex, rflex = is_flex(lhs), is_flex(rhs)
    if not lflex and not rflex:
        lv, rv = rigid_view(lhs), rigid_view(rhs)
        if lv is None or rv is None or lv[0] != rv[0] or len(lv[1]) != len(rv[1]):
            return []
        eqs = tuple(zip(lv[1], rv[1])) + rest
        return [("decompose", UnifState(eqs, s.eigens, s.bindings, s.counter))]

    if lflex and rflex:
        return []

    if rflex:
        return [("exchange", UnifState(((rhs, lhs),) + rest, s.eigens, s.bindings, s.counter))]

    head, args = spine(lhs)
    n = len(args)
    out = []
    for i in range(1, n + 1):
        eq = (args[i - 1], rhs)
        out.append((f"proj{i}", UnifState((eq,) + rest, s.eigens,
                                          _compose(s.bindings, head.name, projection(n, i)),
                                          s.counter)))
    c, cargs = _imitation_head(rhs)
    if c is not None:
        template, bs, counter = theta(n, len(cargs), c, s.counter)
        new = tuple((normalize(mk_app(TVar(b), args)), ta) for b, ta in zip(bs, cargs))
        out.append(("imi", UnifState(new + rest, s.eigens,
                                     _compose(s.bindings, head.name, template), counter)))
    return out


# -------------------------------------------------------------- pruning


def _rigid_clash(a: Type, b: Type, env_a: dict, env_b: dict) -> bool:
    """True when ``a`` and ``b`` differ in a position no substitution can reach.

    Free-variable-headed subterms may still change, so they never clash.
    """
    if isinstance(a, (Forall, TLam, Arrow)) or isinstance(b, (Forall, TLam, Arrow)):
        if type(a) is not type(b):
            return _is_rigid(a, env_a) and _is_rigid(b, env_b)
        if isinstance(a, Arrow):
            return (_rigid_clash(a.dom, b.dom, env_a, env_b)
                    or _rigid_clash(a.cod, b.cod, env_a, env_b))
        depth = len(env_a)
        return _rigid_clash(a.body, b.body, {**env_a, a.var: depth}, {**env_b, b.var: depth})
    ha, xs = spine(a)
    hb, ys = spine(b)
    key_a, key_b = _rigid_key(ha, env_a), _rigid_key(hb, env_b)
    if key_a is None or key_b is None:
        return False
    if key_a != key_b or len(xs) != len(ys):
        return True
    return any(_rigid_clash(x, y, env_a, env_b) for x, y in zip(xs, ys))


def _rigid_key(head: Type, env: dict):
    match head:
        case TCon(name):
            return ("C", name)
        case TVar(name, eig):
            if name in env:
                return ("B", env[name])
            return ("E", name) if eig else None
    return None


def _is_rigid(t: Type, env: dict) -> bool:
    if isinstance(t, (Forall, TLam, Arrow)):
        return True
    return _rigid_key(spine(t)[0], env) is not None


def _rigid_eigens(t: Type, bound: frozenset = frozenset()) -> set[str]:
    """Eigenvariables occurring outside the arguments of free-variable heads."""
    match t:
        case TVar(name, True):
            return set() if name in bound else {name}
        case Arrow(a, b):
            return _rigid_eigens(a, bound) | _rigid_eigens(b, bound)
        case Forall(v, body) | TLam(v, body):
            return _rigid_eigens(body, bound | {v})
        case TApp():
            head, args = spine(t)
            if isinstance(head, TVar) and not head.eigen and head.name not in bound:
                return set()
            out = _rigid_eigens(head, bound)
            for x in args:
                out |= _rigid_eigens(x, bound)
            return out
    return set()


def viable(s: UnifState) -> bool:
    """False when the success conditions are bound to fail in every descendant."""
    seen: dict[str, list[Type]] = {}
    for var, t in s.bindings:
        if s.eigens & _rigid_eigens(t):
            return False
        for other in seen.get(var, ()):
            if _rigid_clash(normalize(other), normalize(t), {}, {}):
                return False
        seen.setdefault(var, []).append(t)
    return True


# -------------------------------------------------------------- measure


@dataclass(frozen=True, order=True)
class Measure:
    """Lexicographic termination measure over the pending equations.

    ``n_rcomp`` weighs each rigid-flexible equation by the size of its rigid
    side times one plus the largest argument of its flexible side, and each
    rigid-rigid equation by the product of its side sizes.
    """

    n_fvar: int
    n_rcomp: int
    n_svar: int
    n_rr: int
    n_forall: int
    n_eq: int


def _occurrences(t: Type, bound: frozenset, bare: set, counts: list) -> None:
    match t:
        case TVar(name, eig):
            if not eig and name not in bound:
                bare.add(name)
        case TApp():
            head, args = spine(t)
            if isinstance(head, TVar) and not head.eigen and head.name not in bound:
                counts[0] += 1
            else:
                _occurrences(head, bound, bare, counts)
            for a in args:
                _occurrences(a, bound, bare, counts)
        case Arrow(a, b):
            _occurrences(a, bound, bare, counts)
            _occurrences(b, bound, bare, counts)
        case Forall(v, b) | TLam(v, b):
            _occurrences(b, bound | {v}, bare, counts)


def _max_arg(t: Type) -> int:
    _, args = spine(t)
    return max((type_size(a) for a in args), default=0)


def measure(s: UnifState) -> Measure:
    bare: set[str] = set()
    counts = [0]
    rcomp = rr = nforall = neq = 0
    for lhs, rhs in s.equations:
        _occurrences(lhs, frozenset(), bare, counts)
        _occurrences(rhs, frozenset(), bare, counts)
        lf, rf = is_flex(lhs), is_flex(rhs)
        if lf and not rf:
            rcomp += type_size(rhs) * (1 + _max_arg(lhs))
        elif rf and not lf:
            rcomp += type_size(lhs) * (1 + _max_arg(rhs))
        elif not lf and not rf:
            rcomp += type_size(lhs) * type_size(rhs)
            rr += type_size(lhs) + type_size(rhs)
            if (isinstance(lhs, Forall) and isinstance(rhs, Forall)) or (
                    isinstance(lhs, TLam) and isinstance(rhs, TLam)):
                nforall += 1
        if is_free_var(rhs) or (rf and not lf):
            neq += 1
    return Measure(len(bare), rcomp, counts[0], rr, nforall, neq)


# --------------------------------------------------------------- search


TraceHook = Callable[[str, UnifState], None]


def search(lhs: Type, rhs: Type, counter: int = 0, check_measure: bool = False,
           trace: TraceHook | None = None, prune: bool = True) -> Iterator[Terminal]:
    """Depth-first enumeration of terminal states ``(empty, V, sigma)``.

    With ``prune`` off, the complete tree of the transition system is walked.
    """
    start = UnifState(((normalize(lhs), normalize(rhs)),), frozenset(), (), counter)
    stack: list[tuple[UnifState, tuple[str, ...]]] = [(start, ())]
    while stack:
        state, rules = stack.pop()
        if not state.equations:
            yield Terminal(state, rules)
            continue
        succ = step(state)
        if prune:
            succ = [(rule, nxt) for rule, nxt in succ if viable(nxt)]
        if check_measure and succ:
            before = measure(state)
            for rule, nxt in succ:
                after = measure(nxt)
                if not after < before:
                    raise MeasureError(f"{rule}: {before} -> {after}")
        for rule, nxt in reversed(succ):
            if trace is not None:
                trace(rule, nxt)
            stack.append((nxt, rules + (rule,)))


def terminal_subst(t: Terminal) -> Subst | None:
    """The substitution of a terminal state if it passes the success conditions."""
    collapsed: dict[str, Type] = {}
    for var, ty in t.state.bindings:
        ty = normalize(ty)
        if var in collapsed:
            if not alpha_eq(collapsed[var], ty):
                return None
        else:
            collapsed[var] = ty
    sigma = Subst(collapsed)
    if sigma.dom() & sigma.codom_free_vars():
        return None
    if t.state.eigens & sigma.codom_eigen_vars():
        return None
    return sigma


def unify(lhs: Type, rhs: Type, counter: int = 0, check_measure: bool = False,
          trace: TraceHook | None = None, prune: bool = True) -> list[tuple[Subst, int]]:
    """Successful unifiers restricted to the problem's variables, with counters."""
    lhs, rhs = normalize(lhs), normalize(rhs)
    original = free_vars(lhs) | free_vars(rhs)
    results: list[tuple[Subst, int]] = []
    for term in search(lhs, rhs, counter, check_measure, trace, prune):
        sigma = terminal_subst(term)
        if sigma is None:
            continue
        sigma = sigma.restrict(original)
        if any(sigma.equiv(prev) for prev, _ in results):
            continue
        results.append((sigma, term.state.counter))
    return results


def match_types(lhs: Type, rhs: Type, counter: int = 0, check_measure: bool = False,
                prune: bool = True) -> list[Subst]:
    return [s for s, _ in unify(lhs, rhs, counter, check_measure, prune=prune)]


__all__ = [
    "UnifState", "Terminal", "Measure", "MeasureError", "projection", "theta",
    "step", "viable", "measure", "search", "terminal_subst", "unify", "match_types",
]
