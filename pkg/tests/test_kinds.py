import pytest

from hrtc.kinds import (
    ConstructorResultMismatch, KindMismatch, UnboundTypeConstant, check_decl, check_kind,
    infer_kind, infer_var_kinds,
)
from hrtc.parser import parse_program, parse_type
from hrtc.program import DataDecl, TypeAlias
from hrtc.syntax import STAR, Context, KArrow, TApp, TCon, TVar

K1 = KArrow(STAR, STAR)
K2 = KArrow(STAR, K1)
DELTA = {"Nat": STAR, "Bot": STAR, "List": K1, "Pair": K2}


def test_list_application():
    assert infer_kind(DELTA, TApp(TCon("List"), TCon("Nat"))) == STAR


def test_church_list_alias_body():
    body = parse_type("\\ a . forall x . (a -> x -> x) -> x -> x")
    assert infer_kind(DELTA, body) == K1


def test_second_order_variable_application():
    assert infer_kind({**DELTA, "p": K1}, TApp(TVar("p"), TCon("Bot"))) == STAR


def test_forall_binder_promoted_by_use():
    t = parse_type("forall f . f Nat -> f Nat")
    assert infer_kind(DELTA, t) == STAR
    assert infer_var_kinds(DELTA, [parse_type("f Nat -> g Nat Nat")]) == {"f": K1, "g": K2}


def test_unused_binder_defaults_to_star():
    assert infer_kind(DELTA, parse_type("\\ a . Nat")) == K1


def test_mismatch_is_reported():
    with pytest.raises(KindMismatch):
        infer_kind(DELTA, TApp(TCon("Nat"), TCon("Nat")))
    with pytest.raises(KindMismatch):
        check_kind(DELTA, TCon("List"))


def test_unbound_constant():
    with pytest.raises(UnboundTypeConstant):
        infer_kind(DELTA, TCon("Missing"))


def _decls(src):
    return parse_program(src).decls


def test_pair_declaration_accepted():
    ctx = Context.empty()
    for d in _decls("data Pair :: * -> * -> * where\n  Pair :: forall a b . a -> b -> Pair a b\n"):
        ctx = check_decl(ctx, d)
    assert ctx.kinds["Pair"] == K2
    assert ctx.constructors["Pair"] == "Pair"
    assert "Pair" in ctx.terms


def test_empty_data_type_accepted():
    (d,) = _decls("data Bot :: * where\n")
    ctx = check_decl(Context.empty(), d)
    assert ctx.kinds["Bot"] == STAR and not ctx.terms


def test_constructor_with_wrong_result():
    d = DataDecl("T", STAR, (("MkT", TCon("Nat")),))
    with pytest.raises(ConstructorResultMismatch):
        check_decl(Context.empty().with_kind("Nat", STAR), d)


def test_constructor_result_must_be_saturated():
    d = DataDecl("P", K1, (("MkP", parse_type("forall a . a -> P")),))
    with pytest.raises(KindMismatch):
        check_decl(Context.empty(), d)


def test_alias_body_has_declared_kind():
    ctx = Context.empty()
    prog = _decls("type Nat :: * = forall x . (x -> x) -> x -> x\n"
                  "type List :: * -> * = \\ a . forall x . (a -> x -> x) -> x -> x\n")
    for d in prog:
        assert isinstance(d, TypeAlias)
        assert infer_kind(ctx.kinds, d.body) == d.kind
        ctx = check_decl(ctx, d)


def test_alias_with_wrong_kind_rejected():
    (d,) = _decls("type Bad :: * = \\ a . a\n")
    with pytest.raises(KindMismatch):
        check_decl(Context.empty(), d)
