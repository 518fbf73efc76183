"""Reference implementations used only by the test suite.

They work on a nameless encoding so that they share no code with the
named-variable algorithms under test.
"""

from __future__ import annotations

from hrtc.syntax import Arrow, Forall, TApp, TCon, TLam, TVar, Type

# Nameless types are nested tuples:
#   ("con", name) ("fv", name) ("ev", name) ("bv", index)
#   ("all", body) ("lam", body) ("arr", a, b) ("app", f, x)


def nameless(t: Type, env: tuple[str, ...] = ()) -> tuple:
    match t:
        case TCon(name):
            return ("con", name)
        case TVar(name, eig):
            if name in env:
                return ("bv", env.index(name))
            return ("ev" if eig else "fv", name)
        case Forall(v, b):
            return ("all", nameless(b, (v,) + env))
        case TLam(v, b):
            return ("lam", nameless(b, (v,) + env))
        case Arrow(a, b):
            return ("arr", nameless(a, env), nameless(b, env))
        case TApp(f, x):
            return ("app", nameless(f, env), nameless(x, env))
    raise TypeError(t)


def _shift(t: tuple, d: int, cutoff: int = 0) -> tuple:
    match t:
        case ("bv", i):
            return ("bv", i + d) if i >= cutoff else t
        case ("all", b) | ("lam", b):
            return (t[0], _shift(b, d, cutoff + 1))
        case ("arr", a, b) | ("app", a, b):
            return (t[0], _shift(a, d, cutoff), _shift(b, d, cutoff))
    return t


def _subst_top(body: tuple, arg: tuple, depth: int = 0) -> tuple:
    match body:
        case ("bv", i):
            if i == depth:
                return _shift(arg, depth)
            return ("bv", i - 1) if i > depth else body
        case ("all", b) | ("lam", b):
            return (body[0], _subst_top(b, arg, depth + 1))
        case ("arr", a, b) | ("app", a, b):
            return (body[0], _subst_top(a, arg, depth), _subst_top(b, arg, depth))
    return body


def reduce_once(t: tuple) -> tuple | None:
    """One leftmost-outermost beta step, or ``None`` at a normal form."""
    match t:
        case ("app", ("lam", body), arg):
            return _subst_top(body, arg)
        case ("all", b) | ("lam", b):
            r = reduce_once(b)
            return None if r is None else (t[0], r)
        case ("arr", a, b) | ("app", a, b):
            r = reduce_once(a)
            if r is not None:
                return (t[0], r, b)
            r = reduce_once(b)
            return None if r is None else (t[0], a, r)
    return None


def small_step_normalize(t: tuple, limit: int = 10_000) -> tuple:
    for _ in range(limit):
        r = reduce_once(t)
        if r is None:
            return t
        t = r
    raise RuntimeError("no normal form within the step limit")


def canonical(t: tuple, names: dict | None = None) -> tuple:
    """Rename free variables by order of first occurrence."""
    names = {} if names is None else names
    match t:
        case ("fv", n):
            return ("fv", names.setdefault(n, len(names)))
        case ("all", b) | ("lam", b):
            return (t[0], canonical(b, names))
        case ("arr", a, b) | ("app", a, b):
            return (t[0], canonical(a, names), canonical(b, names))
    return t


# ----------------------------------------------------- first-order unification


def _walk(t: tuple, s: dict) -> tuple:
    while t[0] == "fv" and t[1] in s:
        t = s[t[1]]
    return t


def _occurs(v: str, t: tuple, s: dict) -> bool:
    t = _walk(t, s)
    match t:
        case ("fv", n):
            return n == v
        case ("all", b) | ("lam", b):
            return _occurs(v, b, s)
        case ("arr", a, b) | ("app", a, b):
            return _occurs(v, a, s) or _occurs(v, b, s)
    return False


def _has_loose(t: tuple, depth: int = 0) -> bool:
    match t:
        case ("bv", i):
            return i >= depth
        case ("all", b) | ("lam", b):
            return _has_loose(b, depth + 1)
        case ("arr", a, b) | ("app", a, b):
            return _has_loose(a, depth) or _has_loose(b, depth)
    return False


def fo_unify(a: tuple, b: tuple) -> dict | None:
    """Robinson unification over nameless types.

    Free variables are unknowns, everything else is rigid.  A variable may not
    capture a quantifier-bound variable, which is how eigenvariable escape
    shows up in this encoding.
    """
    s: dict = {}
    work = [(a, b)]
    while work:
        x, y = work.pop()
        x, y = _walk(x, s), _walk(y, s)
        if x == y:
            continue
        if x[0] == "fv" or y[0] == "fv":
            v, t = (x, y) if x[0] == "fv" else (y, x)
            if _has_loose(t) or _occurs(v[1], t, s):
                return None
            s[v[1]] = t
            continue
        if x[0] != y[0]:
            return None
        match x:
            case ("all", bx) | ("lam", bx):
                work.append((bx, y[1]))
            case ("arr", x1, x2) | ("app", x1, x2):
                work.append((x2, y[2]))
                work.append((x1, y[1]))
            case _:
                return None
    return s


def resolve(t: tuple, s: dict) -> tuple:
    t = _walk(t, s)
    match t:
        case ("all", b) | ("lam", b):
            return (t[0], resolve(b, s))
        case ("arr", a, b) | ("app", a, b):
            return (t[0], resolve(a, s), resolve(b, s))
    return t
