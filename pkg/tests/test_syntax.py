import random

import pytest
from hypothesis import given, strategies as st

from hrtc.syntax import (
    STAR, Arrow, ALam, App, DisagreementError, Forall, IDENTITY, Lam, Subst, TApp, TCon,
    TLam, TVar, TyApp, TyLam, Var, alpha_eq, compose_subst, eigen, eigen_vars, erase,
    free_vars, fresh, normalize, type_size,
)

from gen import gen_subst, gen_type
from oracles import nameless, small_step_normalize

NAT, BOT, TOP = TCon("Nat"), TCon("Bot"), TCon("Top")
a, b, c = TVar("a"), TVar("b"), TVar("c")
seeds = st.integers(0, 2**32 - 1)


# ---------------------------------------------------------------- normalize


def test_normalize_identity_redex():
    assert normalize(TApp(TLam("a", a), NAT)) == NAT


def test_normalize_constant_function():
    assert normalize(TApp(TLam("a", TOP), BOT)) == TOP


def test_normalize_two_argument_redex_matches_small_step_oracle():
    x = TCon("X")
    t = TApp(TApp(TLam("a", TLam("b", TApp(b, a))), x), TLam("c", c))
    assert normalize(t) == x
    assert small_step_normalize(nameless(t)) == nameless(x)


def test_normalize_under_binders():
    t = Forall("d", Arrow(TApp(TLam("a", a), TVar("d")), TVar("d")))
    assert alpha_eq(normalize(t), Forall("e", Arrow(TVar("e"), TVar("e"))))


def test_normalize_avoids_capture():
    # (\a. forall b . a -> b) b  must not capture the free b
    t = TApp(TLam("a", Forall("b", Arrow(a, b))), b)
    n = normalize(t)
    assert isinstance(n, Forall) and n.var != "b"
    assert n.body.dom == b


@given(seeds)
def test_normalize_agrees_with_small_step_reducer(seed):
    t = gen_type(random.Random(seed), 6, redex=True)
    assert nameless(normalize(t)) == small_step_normalize(nameless(t))


@given(seeds)
def test_normalize_is_idempotent(seed):
    t = normalize(gen_type(random.Random(seed), 6, redex=True))
    assert alpha_eq(normalize(t), t)


# ------------------------------------------------------------------ alphaEq


def test_alpha_eq_renaming():
    assert alpha_eq(Forall("a", Arrow(a, a)), Forall("b", Arrow(b, b)))
    assert alpha_eq(TLam("a", a), TLam("b", b))


def test_alpha_eq_rejects_escaping_variable():
    assert not alpha_eq(Forall("a", Arrow(a, a)), Forall("a", Arrow(TVar("q"), a)))


def test_alpha_eq_distinguishes_flavor():
    assert not alpha_eq(TVar("y"), eigen("y"))
    assert not alpha_eq(TVar("x"), TVar("y"))


def test_alpha_eq_binder_order_matters():
    assert not alpha_eq(Forall("a", Forall("b", Arrow(a, b))),
                        Forall("a", Forall("b", Arrow(b, a))))


# --------------------------------------------------------------- substitution


def test_apply_first_order():
    x = TVar("x")
    t = Arrow(Arrow(x, x), Arrow(x, x))
    expect = Arrow(Arrow(NAT, NAT), Arrow(NAT, NAT))
    assert Subst({"x": NAT}).apply(t) == expect


def test_apply_second_order_renormalizes():
    s = Subst({"p": TLam("x", TVar("x"))})
    assert s.apply(TApp(TVar("p"), BOT)) == BOT


def test_apply_identity():
    t = Forall("a", Arrow(a, TVar("q")))
    assert IDENTITY.apply(t) is t


def test_apply_leaves_eigenvariables_alone():
    assert Subst({"y": NAT}).apply(Arrow(eigen("y"), TVar("y"))) == Arrow(eigen("y"), NAT)


def test_apply_is_capture_avoiding():
    s = Subst({"q": TVar("a")})
    r = s.apply(Forall("a", Arrow(TVar("q"), a)))
    assert isinstance(r, Forall) and r.var != "a"
    assert r.body == Arrow(TVar("a"), TVar(r.var))


def test_compose_disagreement():
    with pytest.raises(DisagreementError) as info:
        compose_subst(Subst({"p": TLam("x", TOP)}), Subst({"p": TLam("x", BOT)}))
    assert info.value.var == "p"


def test_compose_agreeing_duplicates_collapse():
    s = Subst({"p": TLam("x", TVar("x"))})
    r = compose_subst(s, Subst({"p": TLam("y", TVar("y"))}))
    assert r == s and len(r) == 1


def test_compose_identity():
    s = Subst({"x": NAT, "p": TLam("a", a)})
    assert compose_subst(s, IDENTITY) == s
    assert compose_subst(IDENTITY, s) == s


def test_compose_applies_outer_to_inner_codomain():
    r = compose_subst(Subst({"y": NAT}), Subst({"x": Arrow(TVar("y"), TVar("y"))}))
    assert r["x"] == Arrow(NAT, NAT) and r["y"] == NAT


@given(seeds)
def test_apply_commutes_with_normalize(seed):
    rng = random.Random(seed)
    t = gen_type(rng, 5, redex=True)
    s = gen_subst(rng, free_vars(t))
    assert alpha_eq(normalize(s.apply(t)), s.apply(normalize(t)))


@given(seeds)
def test_compose_is_sequential_application(seed):
    rng = random.Random(seed)
    t = gen_type(rng, 5)
    sa = gen_subst(rng, {"x", "p"})
    sb = gen_subst(rng, {"y", "r"})
    sc = gen_subst(rng, {"z"})
    composed = compose_subst(sa, compose_subst(sb, sc))
    assert alpha_eq(composed.apply(t), sa.apply(sb.apply(sc.apply(t))))
    left = compose_subst(compose_subst(sa, sb), sc)
    assert alpha_eq(left.apply(t), composed.apply(t))


# ------------------------------------------------------------- variables


def test_free_and_eigen_vars():
    t = Arrow(TVar("q"), eigen("y0"))
    assert free_vars(t) == {"q"}
    assert eigen_vars(t) == {"y0"}


def test_closed_type_has_no_variables():
    t = Forall("a", Arrow(a, a))
    assert free_vars(t) == set() and eigen_vars(t) == set()


def test_eigen_vars_of_codomain():
    assert eigen_vars(Subst({"q": eigen("a1")})["q"]) == {"a1"}


def test_fresh_names_are_marked_and_counted():
    assert fresh("a", 3) == ("a3#", 4)
    assert fresh("y12#", 7) == ("y7#", 8)


def test_type_size_counts_nodes():
    assert type_size(NAT) == 1
    assert type_size(Arrow(NAT, NAT)) == 3


# ----------------------------------------------------------------- erasure


def test_erase_type_abstraction():
    p = TyLam("a0#", ALam("x", TVar("a0#"), Var("x")))
    assert erase(p) == Lam("x", Var("x"))


def test_erase_type_application():
    bot = Forall("a", a)
    p = ALam("x", bot, App(TyApp(Var("x"), Arrow(bot, bot)), Var("x")))
    assert erase(p) == Lam("x", App(Var("x"), Var("x")))


def test_erase_variable():
    assert erase(Var("y")) == Var("y")


