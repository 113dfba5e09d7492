import pytest

from kit import FIRST_ORDER, SINGLETON_ELIM, prelude, term
from pcuic.erasure import (
    BOX,
    EApp,
    EConst,
    EConstantBody,
    EConstruct,
    EInductiveShape,
    ELam,
    ERel,
    VBox,
    VCtor,
    emit,
    erase_env,
    erase_term,
    eval_erased,
    is_box_free,
    observe_eq,
    optimize_boxes,
    prune_env,
)
from pcuic.reduction import cbv_eval
from pcuic.meta import typed_samples
from pcuic.shipped import corpus_paths, load_checked
from pcuic.term import Const, IndRef, Lambda, Rel, Sort
from pcuic.universes import TYPE0

NAT = IndRef("nat")


def test_erase_polymorphic_identity():
    E = prelude()
    t = Lambda("A", Sort(TYPE0), Lambda("x", Rel(0), Rel(0)))
    assert erase_term(E, [], t) == ELam(ELam(ERel(0)))


def test_erase_type_argument_to_box():
    E = prelude()
    assert erase_term(E, [], term(E, "nil nat")) == EApp(EConstruct(IndRef("list"), 0), BOX)


def test_erase_constructor():
    E = prelude()
    assert erase_term(E, [], E.env.global_ref("O")) == EConstruct(NAT, 0)


def test_erase_proof_component():
    E = load_checked("sigma")
    t = term(E, "exist nat (fun (n : nat) => le O n) O (le_n O)")
    sig = EConstruct(IndRef("sig"), 0)
    assert erase_term(E, [], t) == EApp(EApp(EApp(EApp(sig, BOX), BOX), EConstruct(NAT, 0)), BOX)


def test_erase_prelude():
    ee = erase_env(prelude())
    assert isinstance(ee.lookup("plus"), EConstantBody)
    assert isinstance(ee.lookup("app"), EConstantBody)
    eq = ee.lookup("eq")
    assert isinstance(eq, EInductiveShape) and eq.arities == ((0,),)
    assert ee.lookup("plus_0_l").body == BOX


def test_eval_erased_plus():
    E = prelude()
    ee = erase_env(E)
    v = eval_erased(ee, erase_term(E, [], term(E, "plus (S (S O)) (S (S (S O)))")))
    depth = 0
    while v.args:
        assert (v.ind, v.idx) == (NAT, 1)
        v, depth = v.args[0], depth + 1
    assert depth == 5


def test_observe_eq_rejects_mismatch():
    E = prelude()
    ee = erase_env(E)
    v = cbv_eval(E.env, Const("three"))
    assert observe_eq(E, v, eval_erased(ee, EConst("three")))
    assert not observe_eq(E, v, eval_erased(ee, EConst("six")))
    assert not observe_eq(E, v, VBox())


def test_prune_keeps_dependencies():
    ee = prune_env(erase_env(prelude()), "six")
    assert set(ee.names()) >= {"six", "mult", "plus", "three"}
    assert "unused" not in ee.names() and "app" not in ee.names()


def test_emit_is_s_expression():
    E = prelude()
    s = emit(erase_term(E, [], term(E, "fun (n : nat) => S n")))
    assert s.startswith("(") and s.count("(") == s.count(")")


@pytest.mark.parametrize("file,name", FIRST_ORDER, ids=lambda x: x)
def test_first_order_program_agrees(file, name):
    E = load_checked(file)
    v = cbv_eval(E.env, Const(name))
    ee = erase_env(E)
    assert observe_eq(E, v, eval_erased(ee, EConst(name)))
    small = optimize_boxes(prune_env(ee, name))
    assert observe_eq(E, v, eval_erased(small, EConst(name)))


@pytest.mark.parametrize("file,name", SINGLETON_ELIM, ids=lambda x: x)
def test_singleton_elimination_is_box_free(file, name):
    E = load_checked(file)
    v = eval_erased(optimize_boxes(prune_env(erase_env(E), name)), EConst(name))
    assert isinstance(v, VCtor) and is_box_free(v)
    assert observe_eq(E, cbv_eval(E.env, Const(name)), v)


@pytest.mark.parametrize("path", corpus_paths(), ids=lambda p: p.stem)
def test_erasure_is_total_on_corpus(path):
    E = load_checked(path.stem)
    ee = erase_env(E)
    assert ee.names() == E.env.names()
    for ctx, t, _ in typed_samples(E, max_size=60):
        erase_term(E, ctx, t)


@pytest.mark.parametrize("file,name", FIRST_ORDER[:6], ids=lambda x: x)
def test_optimizations_individually(file, name):
    E = load_checked(file)
    v = cbv_eval(E.env, Const(name))
    ee = erase_env(E)
    for env in (prune_env(ee, name), optimize_boxes(ee)):
        r = eval_erased(env, EConst(name))
        assert observe_eq(E, v, r) and is_box_free(r)
