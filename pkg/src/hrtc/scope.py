"""Scope-value environments.

A scope environment records, for every type variable in play, the moment it
entered scope.  A free variable may only be bound to a type whose
eigenvariables are strictly older than itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from hrtc.syntax import Subst, eigen_vars, free_vars


@dataclass(frozen=True, slots=True)
class ScopeEntry:
    var: str
    eigen: bool
    value: int


@dataclass(frozen=True)
class ScopeEnv:
    entries: tuple[ScopeEntry, ...] = ()

    def lookup(self, var: str) -> float:
        """Scope value of ``var``; absent variables are infinitely young."""
        best = math.inf
        for e in self.entries:
            if e.var == var and e.value < best:
                best = e.value
        return best

    def __contains__(self, var: str) -> bool:
        return any(e.var == var for e in self.entries)

    def vars(self) -> set[str]:
        return {e.var for e in self.entries}

    def max_scope(self) -> int:
        return max((e.value for e in self.entries), default=0)

    def eigen_part(self) -> tuple[ScopeEntry, ...]:
        return tuple(e for e in self.entries if e.eigen)

    def as_pairs(self) -> list[tuple[str, int]]:
        return [(e.var, e.value) for e in self.entries]

    def __str__(self) -> str:
        return "[" + ", ".join(f"({e.var}, {e.value})" for e in self.entries) + "]"


EMPTY_SCOPE = ScopeEnv()


def scope_env(pairs: Iterable[tuple[str, bool, int]]) -> ScopeEnv:
    return ScopeEnv(tuple(ScopeEntry(v, e, n) for v, e, n in pairs))


def scope_check(env: ScopeEnv, s: Subst) -> bool:
    for a, t in s.items():
        n = env.lookup(a)
        if n == math.inf:
            continue
        for b in eigen_vars(t):
            if env.lookup(b) >= n:
                return False
    return True


def collapse(entries: Iterable[ScopeEntry]) -> tuple[ScopeEntry, ...]:
    """Keep one entry per variable, carrying its minimal value, in first-seen order."""
    order: list[str] = []
    best: dict[str, ScopeEntry] = {}
    for e in entries:
        if e.var not in best:
            order.append(e.var)
            best[e.var] = e
        elif e.value < best[e.var].value:
            best[e.var] = e
    return tuple(best[v] for v in order)


def update_scope(s: Subst, env: ScopeEnv) -> ScopeEnv:
    """Push scope values of substituted variables onto the variables replacing them.

    Free variables outside ``dom(s)`` are treated as bound to themselves, so
    they keep their entry.  Eigenvariable entries are copied unchanged.
    """
    moved: list[ScopeEntry] = []
    for e in env.entries:
        if e.eigen:
            continue
        if e.var in s:
            fvs = free_vars(s[e.var])
            m = min([e.value] + [env.lookup(b) for b in fvs])
            moved.extend(ScopeEntry(b, False, m) for b in sorted(fvs))
        else:
            moved.append(e)
    return ScopeEnv(collapse(moved) + env.eigen_part())


def extend_scope(env: ScopeEnv, new_vars: Iterable[tuple[str, bool]],
                 value: int | None = None) -> ScopeEnv:
    """Append ``new_vars`` all at ``value`` (default ``max(env) + 1``)."""
    if value is None:
        value = env.max_scope() + 1
    return ScopeEnv(env.entries + tuple(ScopeEntry(v, e, value) for v, e in new_vars))


def extend_scope_increasing(env: ScopeEnv, eigens: Iterable[str]) -> ScopeEnv:
    """Append eigenvariables at ``max(env) + 1, max(env) + 2, ...``."""
    n = env.max_scope()
    extra = tuple(ScopeEntry(v, True, n + i + 1) for i, v in enumerate(eigens))
    return ScopeEnv(env.entries + extra)
