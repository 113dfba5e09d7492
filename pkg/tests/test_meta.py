import random

from hypothesis import given, settings
from hypothesis import strategies as st

import pcuic.meta as meta
from kit import num, prelude, term
from strategies import terms
from pcuic.meta import (
    NatTerms,
    ParReducer,
    diamond_check,
    inline_globals,
    join,
    joinability_check,
    kids,
    multi_reducts,
    par_reducts,
    rebuild,
    rho,
    triangle_check,
)
from pcuic.reduction import reducts
from pcuic.term import App, Const, Lambda, Prod, Rel, Sort, children, node_count, strip_names, subst1
from pcuic.universes import PROP, TYPE0


def test_rho_examples():
    E = prelude()
    u = term(E, "(fun (n : nat) => n) O")
    redex = App(Lambda("A", Sort(TYPE0), Rel(0)), u)
    assert rho(E.env, redex) == rho(E.env, u) == E.env.global_ref("O")
    normal = term(E, "fun (n : nat) => S n")
    assert rho(E.env, normal) == normal


def test_rho_leaves_created_redexes():
    E = prelude()
    b = term(E, "(fun (n : nat) => n) O")
    ident = Lambda("B", Sort(TYPE0), Rel(0))
    t = App(Lambda("A", Sort(TYPE0), App(Rel(0), b)), ident)
    assert rho(E.env, t) == App(ident, rho(E.env, b))


def test_par_reducts_of_normal_forms():
    E = prelude()
    assert par_reducts(E.env, Sort(TYPE0)) == {Sort(TYPE0)}
    assert par_reducts(E.env, num(E, 3)) == {num(E, 3)}


def test_par_reducts_of_beta_redex():
    E = prelude()
    u = term(E, "(fun (m : nat) => m) O")
    t = App(Lambda("n", E.env.global_ref("nat"), App(E.env.global_ref("S"), Rel(0))), u)
    ps = par_reducts(E.env, t)
    assert t in ps
    assert subst1(u, App(E.env.global_ref("S"), Rel(0))) in ps
    assert term(E, "S O") in ps
    assert len(ps) == 4


def naive_par(t):
    """Parallel reducts of a pure beta term, by the textbook rules."""
    match t:
        case Lambda(na, a, b):
            return {Lambda(na, a2, b2) for a2 in naive_par(a) for b2 in naive_par(b)}
        case Prod(na, a, b):
            return {Prod(na, a2, b2) for a2 in naive_par(a) for b2 in naive_par(b)}
        case App(f, u):
            us = naive_par(u)
            out = {App(f2, u2) for f2 in naive_par(f) for u2 in us}
            if isinstance(f, Lambda):
                out |= {subst1(u2, b2) for b2 in naive_par(f.body) for u2 in us}
            return out
    return {t}


beta_terms = st.recursive(
    st.one_of(st.builds(Rel, st.integers(0, 2)), st.just(Sort(PROP)), st.just(Const("c"))),
    lambda sub: st.one_of(
        st.builds(Lambda, st.just("x"), st.just(Sort(PROP)), sub),
        st.builds(Prod, st.just("x"), sub, sub),
        st.builds(App, sub, sub),
    ),
    max_leaves=8,
)


@settings(max_examples=300, deadline=None)
@given(beta_terms)
def test_par_reducts_matches_naive_enumerator(t):
    assert par_reducts(prelude().env, t) == naive_par(t)


@settings(max_examples=200, deadline=None)
@given(terms)
def test_kids_follow_children(t):
    assert [x for x, _ in kids((), t)] == [x for x, _ in children(t)]
    assert rebuild(t, [x for x, _ in kids((), t)]) == t


def test_reduction_inclusions():
    E = prelude()
    for src in ["plus (S O) (S O)", "let x : nat := S O in plus x x", "(fun (n : nat) => S n) ((fun (m : nat) => m) O)"]:
        t = inline_globals(E.env, term(E, src))
        ps = par_reducts(E.env, t)
        assert {t, *reducts(E.env, (), t)} <= ps
        assert ps <= multi_reducts(E.env, t, 12)
        assert rho(E.env, t) in ps


def test_par_closed_under_alpha():
    E = prelude()
    t = term(E, "(fun (n : nat) => S n) ((fun (m : nat) => m) O)")
    renamed = term(E, "(fun (k : nat) => S k) ((fun (q : nat) => q) O)")
    assert par_reducts(E.env, t) == par_reducts(E.env, renamed)
    assert {strip_names(x) for x in par_reducts(E.env, t)} == {strip_names(x) for x in par_reducts(E.env, renamed)}


def test_nat_terms_sizes():
    gen = NatTerms(prelude())
    for n in range(1, 16):
        ts = gen.terms(n)
        assert all(node_count(t) == n for t in ts)
        assert len(set(ts)) == len(ts)


def test_triangle_and_diamond_on_plus():
    E = prelude()
    t = term(E, "plus (S O) (S O)")
    assert triangle_check(E.env, inline_globals(E.env, t)) is None
    assert triangle_check(E.env, t) is None
    assert triangle_check(E.env, num(E, 2)) is None
    assert diamond_check(E.env, term(E, "let x : nat := (fun (m : nat) => m) O in S x")) is None


def test_broken_rho_is_detected(monkeypatch):
    E = prelude()
    monkeypatch.setattr(meta, "rho", lambda env, t, ctx=(): t)
    t = term(E, "(fun (n : nat) => S n) O")
    assert triangle_check(E.env, t) is not None


def test_join_finds_common_reduct():
    E = prelude()
    a, b = term(E, "plus (S O) O"), term(E, "S (plus O O)")
    assert join(E.env, a, b) is not None
    assert join(E.env, num(E, 1), num(E, 2)) is None


def test_joinability_trivial():
    E = prelude()
    rng = random.Random(0)
    assert joinability_check(E.env, term(E, "three"), 0, 0, rng) is None
    assert joinability_check(E.env, term(E, "plus (S O) (S O)"), 4, 10, rng) is None


def test_par_reducer_memoizes():
    E = prelude()
    par = ParReducer(E.env)
    t = term(E, "plus (S O) (S O)")
    assert par.reducts((), t) is par.reducts((), t)
