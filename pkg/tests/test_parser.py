import random

import pytest
from hypothesis import given, settings, strategies as st

from hrtc.checker import run_check
from hrtc.fomega import plain
from hrtc.parser import (
    DuplicateSignature, MissingSignature, ParseError, parse_ann, parse_annotated_program,
    parse_expr, parse_program, parse_type,
)
from hrtc.pretty import show_ann, show_expr, show_type
from hrtc.program import FunDecl, SigDecl
from hrtc.syntax import (
    ALam, App, Arrow, Case, Con, Forall, Lam, PCon, PVar, TApp, TCon, TVar, TyApp,
    TyLam, Var, alpha_eq, map_ann_types,
)

from progs import gen_program, prelude_context

seeds = st.integers(0, 2**32 - 1)


def _fun(src, name):
    return next(d for d in parse_program(src).decls
                if isinstance(d, FunDecl) and d.name == name)


def test_poly_clause_desugars_to_lambda():
    src = ("poly :: (forall v . v -> v) -> Pair Nat Bool\n"
           "poly f = Pair (f Z) (f True)\n")
    expect = Lam("f", App(App(Con("Pair"), App(Var("f"), Con("Z"))),
                          App(Var("f"), Con("True"))))
    assert _fun(src, "poly").body == expect


def test_multi_clause_desugars_to_case_in_source_order():
    src = ("length1 :: forall a . Nested a -> Nat\n"
           "length1 NN = Z\n"
           "length1 (NCons x xs) = add one (length1 xs)\n")
    body = _fun(src, "length1").body
    assert isinstance(body, Lam)
    case = body.body
    assert isinstance(case, Case) and case.scrutinee == Var(body.var)
    pats = [p for p, _ in case.branches]
    assert pats == [PCon("NN", ()), PCon("NCons", (PVar("x"), PVar("xs")))]
    assert case.branches[0][1] == Con("Z")


def test_simple_clause():
    assert _fun("id :: forall a . a -> a\nid x = x\n", "id").body == Lam("x", Var("x"))


def test_multi_binder_lambda():
    assert parse_expr("\\ x y -> x") == Lam("x", Lam("y", Var("x")))


def test_comments_and_continuation_lines():
    prog = parse_program("-- header\nid :: forall a .\n  a -> a -- trailing\nid x = x\n")
    sig = next(d for d in prog.decls if isinstance(d, SigDecl))
    assert alpha_eq(sig.type, Forall("a", Arrow(TVar("a"), TVar("a"))))


def test_type_alias_expanded():
    prog = parse_program("type Id :: * -> * = \\ a . a\nf :: Id Nat -> Nat\nf x = x\n")
    sig = next(d for d in prog.decls if isinstance(d, SigDecl))
    assert sig.type == Arrow(TCon("Nat"), TCon("Nat"))


def test_parse_error_has_position():
    with pytest.raises(ParseError) as info:
        parse_program("id :: forall a . a -> a\nid x = (x\n")
    assert info.value.line == 2 and info.value.col > 0


def test_duplicate_signature():
    with pytest.raises(DuplicateSignature):
        parse_program("f :: Nat\nf :: Nat\nf = Z\n")


def test_missing_signature():
    with pytest.raises(MissingSignature):
        parse_program("f x = x\n")


def test_clauses_must_agree_in_arity():
    with pytest.raises(ParseError):
        parse_program("f :: Nat -> Nat\nf Z = Z\nf = \\ n -> n\n")


def test_type_precedence():
    assert parse_type("List Nat -> Nat") == Arrow(TApp(TCon("List"), TCon("Nat")), TCon("Nat"))
    t = parse_type("forall a . a -> a")
    assert isinstance(t, Forall) and isinstance(t.body, Arrow)


# ------------------------------------------------------------ printing


def test_print_elaborated_id():
    p = TyLam("a0#", ALam("x", TVar("a0#", True), Var("x")))
    assert show_ann(p) == "\\\\ a0# . \\ (x :: a0#) . x"


def test_print_elaborated_f():
    bot = Forall("a", TVar("a"))
    p = ALam("x", bot, App(TyApp(Var("x"), Arrow(bot, bot)), Var("x")))
    assert show_ann(p) == "\\ (x :: forall a . a) . x @((forall a . a) -> (forall a . a)) x"


def test_print_constant():
    assert show_ann(Con("c")) == "c"


def test_print_type_application_of_atom():
    assert show_ann(TyApp(Var("ids"), TCon("Nat"))) == "ids @Nat"


def test_parse_printed_f():
    text = "\\ (x :: forall a . a) . x @((forall a . a) -> (forall a . a)) x"
    assert show_ann(parse_ann(text)) == text


def test_annotated_program_with_signature():
    prog = parse_annotated_program("id :: forall a . a -> a =\n  \\\\ a0# . \\ (x :: a0#) . x\n")
    (d,) = prog.decls
    assert d.name == "id" and isinstance(d.body, TyLam)


@settings(max_examples=60)
@given(seeds)
def test_annotated_round_trip(seed):
    ctx = prelude_context()
    prog = gen_program(random.Random(seed), ctx)
    term = run_check(ctx, prog.expr, prog.type).term
    again = parse_ann(show_ann(term))
    assert map_ann_types(again, plain) == map_ann_types(term, plain)


@settings(max_examples=100)
@given(seeds)
def test_source_round_trip(seed):
    prog = gen_program(random.Random(seed), prelude_context())
    assert parse_expr(show_expr(prog.expr)) == prog.expr
    assert alpha_eq(parse_type(show_type(prog.type)), prog.type)
