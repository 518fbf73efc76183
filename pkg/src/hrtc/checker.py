"""Goal-directed type checking with scope management and elaboration.

A search state holds the pending goals ``(L, Gamma, e, T)``, the finished
ones, the global substitution and a fresh-name counter.  The first pending
goal is always the one rewritten.  Search is depth first; the first state
with no pending goals wins and its derivation is rebuilt into an annotated
term.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

from hrtc.kinds import KindError, check_kind
from hrtc.matcher import is_flex, unify
from hrtc.pretty import show_expr, show_type
from hrtc.scope import (
    EMPTY_SCOPE, ScopeEnv, extend_scope, extend_scope_increasing, scope_check,
    update_scope,
)
from hrtc.syntax import (
    IDENTITY, ABranch, ACase, ALam, ALet, App, Arrow, Case, Con, Context,
    Expr, Forall, Lam, Let, PCon, PVar, Subst, TVar, TyApp, TyLam, Type, Var,
    compose_subst, count_arrows, expr_spine, free_vars, map_ann_types,
    normalize, pattern_expr, pattern_vars, rename_bound, split_arrows,
    split_foralls, fresh,
)



class TypeCheckError(Exception):
    """No derivation exists; carries the failure of the deepest branch."""

    def __init__(self, message: str, deepest: "Failure | None" = None):
        self.deepest = deepest
        super().__init__(message)


class BetaRedexError(TypeCheckError):
    pass


class NonConstructorPattern(TypeCheckError):
    pass


class PatternArityError(TypeCheckError):
    pass


class SearchBudgetExceeded(TypeCheckError):
    pass


class InvariantViolation(AssertionError):
    pass


# --------------------------------------------------------------- states


Locals = tuple[tuple[str, Type], ...]


@dataclass(frozen=True)
class Goal:
    id: int
    scope: ScopeEnv
    locals: Locals
    expr: Expr
    type: Type

    def __str__(self) -> str:
        return f"({self.scope}, {show_expr(self.expr)} : {show_type(self.type)})"


@dataclass(frozen=True)
class Done:
    scope: ScopeEnv
    locals: Locals


@dataclass(frozen=True)
class HeadNode:
    head: Expr
    instances: tuple[Type, ...]
    args: tuple[int, ...]


@dataclass(frozen=True)
class IntroNode:
    eigens: tuple[str, ...]
    params: tuple[tuple[str, Type], ...]
    body: int


@dataclass(frozen=True)
class LetNode:
    var: str
    type: Type
    bound: int
    body: int


@dataclass(frozen=True)
class CaseNode:
    scrutinee: int
    type: Type
    branches: tuple[tuple[object, tuple[tuple[str, Type], ...], int, int], ...]


Record = HeadNode | IntroNode | LetNode | CaseNode


@dataclass(frozen=True)
class CheckState:
    goals: tuple[Goal, ...]
    done: tuple[Done, ...]
    subst: Subst
    counter: int
    next_id: int
    records: tuple | None = None        # (goal id, record, parent) chain
    depth: int = 0

    def record(self, gid: int, rec: Record):
        return (gid, rec, self.records)

    def record_map(self) -> dict[int, Record]:
        out = {}
        node = self.records
        while node is not None:
            gid, rec, node = node
            out[gid] = rec
        return out


@dataclass(frozen=True)
class TraceEvent:
    kind: str               # "step", "reject" (one unifier refused), "fail" or "postpone"
    rule: str
    goal: Goal
    unifier: Subst | None = None
    reason: str = ""

    def __str__(self) -> str:
        text = f"{self.kind} ->{self.rule} {self.goal}"
        if self.unifier is not None:
            text += f" with {self.unifier!r}"
        if self.reason:
            text += f": {self.reason}"
        return text


@dataclass(frozen=True)
class Failure:
    depth: int
    goal: Goal
    reason: str


@dataclass
class Options:
    heuristic: bool = True
    abstraction_first: bool = False
    max_branches: int | None = None
    debug: bool = False
    on_event: Callable[[TraceEvent], None] | None = None


@dataclass
class CheckResult:
    term: object
    subst: Subst
    states: int
    counter: int


# ------------------------------------------------------------- helpers


class _Search:
    def __init__(self, ctx: Context, opts: Options):
        self.ctx = ctx
        self.opts = opts
        self.deepest: Failure | None = None
        self.expanded = 0

    def emit(self, kind: str, rule: str, goal: Goal, unifier=None, reason: str = "") -> None:
        if self.opts.on_event is not None:
            self.opts.on_event(TraceEvent(kind, rule, goal, unifier, reason))

    def fail(self, state: CheckState, goal: Goal, rule: str, reason: str) -> None:
        self.emit("fail", rule, goal, reason=reason)
        if self.deepest is None or state.depth > self.deepest.depth:
            self.deepest = Failure(state.depth, goal, f"->{rule}: {reason}")

    def lookup(self, goal: Goal, name: str) -> Type | None:
        for x, t in reversed(goal.locals):
            if x == name:
                return t
        return self.ctx.terms.get(name)

    # ---------------------------------------------------- substitution

    def apply_to_rest(self, sigma: Subst, state: CheckState):
        """``sigma`` applied to every remaining tuple, or ``None`` on a scope failure."""
        goals = []
        for g in state.goals[1:]:
            if not scope_check(g.scope, sigma):
                return None
            goals.append(Goal(g.id, update_scope(sigma, g.scope), _apply_locals(sigma, g.locals),
                              g.expr, sigma.apply(g.type)))
        done = []
        for d in state.done:
            if not scope_check(d.scope, sigma):
                return None
            done.append(Done(update_scope(sigma, d.scope), _apply_locals(sigma, d.locals)))
        return goals, done

    # ------------------------------------------------------ transitions

    def successors(self, state: CheckState) -> Iterator[CheckState]:
        goal = state.goals[0]
        e = goal.expr
        match e:
            case Lam():
                yield from self.step_i(state, goal)
            case Let(_, None, _, _):
                yield from self.step_let(state, goal)
            case Let():
                yield from self.step_let_ann(state, goal)
            case Case():
                yield from self.step_case(state, goal)
            case _:
                head, _ = expr_spine(e)
                if isinstance(head, Lam):
                    raise BetaRedexError(f"cannot check the beta-redex {show_expr(e)}")
                if not isinstance(head, (Var, Con)):
                    self.fail(state, goal, "a", f"unsupported application head {show_expr(head)}")
                    return
                branches = [self.step_app]
                if isinstance(goal.type, Forall):
                    branches.append(self.step_i)
                    if self.opts.abstraction_first:
                        branches.reverse()
                for rule in branches:
                    yield from rule(state, goal)

    def step_i(self, state: CheckState, goal: Goal) -> Iterator[CheckState]:
        names, body_type = split_foralls(goal.type)
        counter = state.counter
        eigens = []
        for a in names:
            name, counter = fresh(a, counter)
            eigens.append(name)
            body_type = rename_bound(body_type, a, TVar(name, True))
        body_type = normalize(body_type)
        lam_vars = []
        e = goal.expr
        while isinstance(e, Lam):
            lam_vars.append(e.var)
            e = e.body
        doms, rest = split_arrows(body_type, len(lam_vars))
        if not eigens and not doms:
            self.fail(state, goal, "i", "no quantifier or arrow to introduce")
            return
        params = tuple(zip(lam_vars, doms))
        body = goal.expr
        for _ in params:
            body = body.body
        scope = extend_scope_increasing(goal.scope, eigens)
        new = Goal(state.next_id, scope, goal.locals + params, body, rest)
        self.emit("step", "i", goal)
        yield CheckState((new,) + state.goals[1:], state.done, state.subst, counter,
                         state.next_id + 1,
                         state.record(goal.id, IntroNode(tuple(eigens), params, new.id)),
                         state.depth + 1)

    def step_app(self, state: CheckState, goal: Goal) -> Iterator[CheckState]:
        head, args = expr_spine(goal.expr)
        sig = self.lookup(goal, head.name)
        rule = "s" if not args else "a"
        if sig is None:
            self.fail(state, goal, rule, f"{head.name} is not in scope")
            return
        sig = normalize(sig)
        quantifiers, _ = split_foralls(sig)
        if not args:
            ks = range(len(quantifiers) + 1)
        else:
            ks = [len(quantifiers)]
        any_success = False
        scope_rejected = False
        for k in ks:
            inst, body, counter = _instantiate(sig, k, state.counter)
            doms, result = split_arrows(body)
            n, l = len(args), len(doms)
            if n == 0:
                rule, lhs, rhs, bs = "s", body, goal.type, []
                arg_types: list[Type] = []
            elif n >= l:
                rule = "a"
                bs = []
                for _ in range(n - l):
                    b, counter = fresh("b", counter)
                    bs.append(b)
                lhs, rhs = result, _arrows([TVar(b) for b in bs], goal.type)
                arg_types = doms + [TVar(b) for b in bs]
            else:
                rule = "b"
                bs = []
                lhs, rhs = _arrows(doms[n:], result), goal.type
                arg_types = doms[:n]
            for sigma, counter2 in unify(lhs, rhs, counter):
                if not scope_check(goal.scope, sigma):
                    scope_rejected = True
                    self.emit("reject", rule, goal, sigma, "scope")
                    continue
                nxt = self._commit(state, goal, rule, sigma, counter2, inst, bs, args,
                                   arg_types, head)
                if nxt is None:
                    scope_rejected = True
                    self.emit("reject", rule, goal, sigma, "scope of remaining goals")
                    continue
                any_success = True
                self.emit("step", rule, goal, sigma)
                yield nxt
        if not any_success:
            reason = "scope" if scope_rejected else "no unifier"
            self.fail(state, goal, rule, reason)

    def _commit(self, state, goal, rule, sigma, counter, inst, bs, args, arg_types, head):
        rest = self.apply_to_rest(sigma, state)
        if rest is None:
            return None
        goals_rest, done = rest
        extended = extend_scope(goal.scope, [(a, False) for a in inst] + [(b, False) for b in bs])
        scope = update_scope(sigma, extended)
        locals_ = _apply_locals(sigma, goal.locals)
        new_goals = []
        next_id = state.next_id
        for e, t in zip(args, arg_types):
            new_goals.append(Goal(next_id, scope, locals_, e, sigma.apply(t)))
            next_id += 1
        ids = tuple(g.id for g in new_goals)
        if self.opts.heuristic:
            new_goals.sort(key=lambda g: -count_arrows(g.type))
        if rule == "s":
            done = done + [Done(scope, locals_)]
        record = HeadNode(head, tuple(TVar(a) for a in inst), ids)
        return CheckState(tuple(new_goals) + tuple(goals_rest), tuple(done),
                          compose_subst(sigma, state.subst), counter, next_id,
                          state.record(goal.id, record), state.depth + 1)

    def step_let(self, state: CheckState, goal: Goal) -> Iterator[CheckState]:
        e = goal.expr
        b, counter = fresh("b", state.counter)
        scope = extend_scope(goal.scope, [(b, False)])
        locals_ = goal.locals + ((e.var, TVar(b)),)
        g1 = Goal(state.next_id, scope, locals_, e.bound, TVar(b))
        g2 = Goal(state.next_id + 1, scope, locals_, e.body, goal.type)
        self.emit("step", "let", goal)
        yield CheckState((g1, g2) + state.goals[1:], state.done, state.subst, counter,
                         state.next_id + 2,
                         state.record(goal.id, LetNode(e.var, TVar(b), g1.id, g2.id)),
                         state.depth + 1)

    def step_let_ann(self, state: CheckState, goal: Goal) -> Iterator[CheckState]:
        e = goal.expr
        t = normalize(e.annotation)
        locals_ = goal.locals + ((e.var, t),)
        g1 = Goal(state.next_id, goal.scope, locals_, e.bound, t)
        g2 = Goal(state.next_id + 1, goal.scope, locals_, e.body, goal.type)
        self.emit("step", "let'", goal)
        yield CheckState((g1, g2) + state.goals[1:], state.done, state.subst, state.counter,
                         state.next_id + 2,
                         state.record(goal.id, LetNode(e.var, t, g1.id, g2.id)),
                         state.depth + 1)

    def step_case(self, state: CheckState, goal: Goal) -> Iterator[CheckState]:
        e = goal.expr
        b, counter = fresh("b", state.counter)
        n = goal.scope.max_scope() + 1
        base_scope = extend_scope(goal.scope, [(b, False)], n)
        next_id = state.next_id
        scrut = Goal(next_id, base_scope, goal.locals, e.scrutinee, TVar(b))
        next_id += 1
        new = [scrut]
        branches = []
        for pat, body in e.branches:
            self._check_pattern(pat)
            phi = []
            for x in pattern_vars(pat):
                a, counter = fresh("a", counter)
                phi.append((x, TVar(a)))
            scope = extend_scope(base_scope, [(a.name, False) for _, a in phi], n)
            locals_ = goal.locals + tuple(phi)
            pg = Goal(next_id, scope, locals_, pattern_expr(pat), TVar(b))
            bg = Goal(next_id + 1, scope, locals_, body, goal.type)
            next_id += 2
            new += [pg, bg]
            branches.append((pat, tuple(phi), pg.id, bg.id))
        self.emit("step", "case", goal)
        yield CheckState(tuple(new) + state.goals[1:], state.done, state.subst, counter, next_id,
                         state.record(goal.id, CaseNode(scrut.id, TVar(b), tuple(branches))),
                         state.depth + 1)

    def _check_pattern(self, pat) -> None:
        match pat:
            case PVar():
                return
            case PCon(c, args):
                ctors = self.ctx.constructors or {}
                if c not in ctors:
                    raise NonConstructorPattern(f"{c} is not a data constructor")
                _, body = split_foralls(normalize(self.ctx.terms[c]))
                arity = len(split_arrows(body)[0])
                if len(args) != arity:
                    raise PatternArityError(
                        f"constructor {c} takes {arity} arguments, pattern gives {len(args)}")
                for a in args:
                    self._check_pattern(a)

    # ----------------------------------------------------------- search

    def run(self, start: CheckState) -> CheckState:
        stack = [start]
        while stack:
            state = stack.pop()
            if not state.goals:
                if state.done:
                    return state
                continue
            self.expanded += 1
            if self.opts.max_branches is not None and self.expanded > self.opts.max_branches:
                raise SearchBudgetExceeded(
                    f"search budget of {self.opts.max_branches} states exhausted", self.deepest)
            if self.opts.debug:
                self.check_invariants(state)
            succ = list(self.successors(state))
            if not succ:
                succ = self.postpone(state)
            stack.extend(reversed(succ))
        raise TypeCheckError("no derivation found", self.deepest)

    def postpone(self, state: CheckState) -> list[CheckState]:
        """Move a stuck goal with a flexible type behind the other goals.

        Solving the others may instantiate its type.  Only done while some
        rigid goal remains, so rotation cannot go on forever.
        """
        goal, rest = state.goals[0], state.goals[1:]
        if not is_flex(goal.type) or all(is_flex(g.type) for g in rest):
            return []
        self.emit("postpone", "defer", goal)
        return [replace(state, goals=rest + (goal,))]

    def check_invariants(self, state: CheckState) -> None:
        for g in state.goals:
            fv = set(free_vars(g.type))
            for _, t in g.locals:
                fv |= free_vars(t)
            missing = fv - g.scope.vars()
            if missing:
                raise InvariantViolation(
                    f"free variables {sorted(missing)} of goal {g} missing from its scope")
            try:
                check_kind(self.ctx.kinds, g.type, open_vars=True)
                for _, t in g.locals:
                    check_kind(self.ctx.kinds, t, open_vars=True)
            except KindError as err:
                raise InvariantViolation(f"ill-kinded goal {g}: {err}") from None


def _apply_locals(sigma: Subst, locals_: Locals) -> Locals:
    if not len(sigma):
        return locals_
    return tuple((x, sigma.apply(t)) for x, t in locals_)


def _arrows(doms: list[Type], result: Type) -> Type:
    for d in reversed(doms):
        result = Arrow(d, result)
    return result


def _instantiate(t: Type, k: int, counter: int) -> tuple[list[str], Type, int]:
    names = []
    for _ in range(k):
        name, counter = fresh(t.var, counter)
        names.append(name)
        t = rename_bound(t.body, t.var, TVar(name))
    return names, normalize(t), counter


def find_beta_redex(e: Expr) -> Expr | None:
    match e:
        case App(f, x):
            head, _ = expr_spine(e)
            if isinstance(head, Lam):
                return e
            return find_beta_redex(f) or find_beta_redex(x)
        case Lam(_, body):
            return find_beta_redex(body)
        case Let(_, _, bound, body):
            return find_beta_redex(bound) or find_beta_redex(body)
        case Case(s, branches):
            found = find_beta_redex(s)
            for _, b in branches:
                found = found or find_beta_redex(b)
            return found
    return None


# ---------------------------------------------------------- elaboration


def elaborate(records: dict[int, Record], root: int, sigma: Subst):
    """Rebuild the annotated term of goal ``root`` and apply ``sigma`` to it."""
    def build(gid: int):
        rec = records[gid]
        match rec:
            case HeadNode(head, instances, args):
                p = head
                for t in instances:
                    p = TyApp(p, t)
                for a in args:
                    p = App(p, build(a))
                return p
            case IntroNode(eigens, params, body):
                p = build(body)
                for x, t in reversed(params):
                    p = ALam(x, t, p)
                for a in reversed(eigens):
                    p = TyLam(a, p)
                return p
            case LetNode(x, t, bound, body):
                return ALet(x, t, build(bound), build(body))
            case CaseNode(scrut, t, branches):
                return ACase(build(scrut), t, tuple(
                    ABranch(pat, phi, build(pg), build(bg)) for pat, phi, pg, bg in branches))
        raise InvariantViolation(f"no record for goal {gid}")

    return map_ann_types(build(root), sigma.apply)


def run_check(ctx: Context, e: Expr, t: Type, options: Options | None = None) -> CheckResult:
    """Check ``e`` against the closed type ``t``; return the elaborated term."""
    opts = options or Options()
    redex = find_beta_redex(e)
    if redex is not None:
        raise BetaRedexError(f"cannot check the beta-redex {show_expr(redex)}")
    t = normalize(t)
    search = _Search(ctx, opts)
    start = CheckState((Goal(0, EMPTY_SCOPE, (), e, t),), (), IDENTITY, 0, 1)
    final = search.run(start)
    term = elaborate(final.record_map(), 0, final.subst)
    return CheckResult(term, final.subst, search.expanded, final.counter)


__all__ = [
    "TypeCheckError", "BetaRedexError", "NonConstructorPattern", "PatternArityError",
    "SearchBudgetExceeded", "InvariantViolation", "Goal", "Done", "CheckState",
    "TraceEvent", "Failure", "Options", "CheckResult", "run_check", "elaborate",
    "find_beta_redex",
]
