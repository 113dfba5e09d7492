from hypothesis import given
from hypothesis import strategies as st

from strategies import terms
from pcuic.term import (
    ID_INST,
    ID_REN,
    App,
    Assum,
    Branch,
    Case,
    CaseInfo,
    IndRef,
    Instantiation,
    Lambda,
    LetIn,
    Predicate,
    Rel,
    Renaming,
    Sort,
    alpha_eq,
    closed_under,
    inst,
    lift,
    node_count,
    rename,
    shift_above,
    shift_ren,
    strip_names,
    subst,
    subst1,
)
from pcuic.universes import TYPE0

T0 = Sort(TYPE0)
U = App(Rel(7), Rel(3))

renamings = st.builds(
    Renaming, st.lists(st.integers(0, 6), max_size=4).map(tuple), st.integers(0, 3)
)
insts = st.builds(Instantiation, st.lists(terms, max_size=3).map(tuple), st.integers(0, 3))


def test_rename_examples():
    t = Lambda("x", T0, App(Rel(0), Rel(2)))
    assert rename(ID_REN, t) == t
    assert rename(shift_ren(2), Rel(1)) == Rel(3)
    assert rename(shift_ren(2), Lambda("x", T0, Rel(0))) == Lambda("x", T0, Rel(0))


def test_inst_examples():
    t = App(Rel(0), Rel(1))
    assert inst(ID_INST, t) == t
    assert inst(Instantiation((U,), -1), t) == App(U, Rel(0))
    ident = Lambda("y", T0, Rel(0))
    sigma = Instantiation((ident,), -1)
    got = inst(sigma, Lambda("a", Rel(0), Rel(1)))
    assert got == Lambda("a", ident, Lambda("y", T0, Rel(0)))


def test_lift_examples():
    assert lift(1, 0, Rel(0)) == Rel(1)
    t = Lambda("x", T0, App(Rel(0), Rel(1)))
    # under the binder #1 is the outer #0, below the cutoff 1
    assert lift(3, 1, t) == t
    assert lift(3, 0, t) == Lambda("x", T0, App(Rel(0), Rel(4)))
    assert lift(0, 5, t) == t


def test_subst_examples():
    assert subst([U], 0, Rel(0)) == U
    assert subst([U], 0, Rel(1)) == Rel(0)
    assert subst([U], 0, Lambda("x", T0, Rel(1))) == Lambda("x", T0, lift(1, 0, U))


def test_alpha_eq_examples():
    assert alpha_eq(Lambda("x", T0, Rel(0)), Lambda("y", T0, Rel(0)))
    assert not alpha_eq(Rel(0), Rel(1))
    nat = IndRef("nat")

    def case(name):
        br = Branch((Assum(name, T0),), Rel(0))
        return Case(CaseInfo(nat, 0), Predicate((), (Assum("z", T0),), T0), Rel(0), (br,))

    assert alpha_eq(case("p"), case("q"))
    assert hash(case("p")) == hash(case("q"))


def test_closed_under_examples():
    assert closed_under(0, Lambda("x", T0, Rel(0)))
    assert not closed_under(0, Rel(0))
    assert closed_under(1, LetIn("x", Rel(0), T0, Rel(1)))
    assert not closed_under(1, LetIn("x", Rel(0), Rel(1), Rel(1)))


@given(terms, renamings, renamings)
def test_rename_composition(t, r1, r2):
    assert rename(r2, rename(r1, t)) == rename(r1.then(r2), t)


@given(terms, insts, renamings)
def test_inst_after_rename(t, sigma, r):
    assert inst(sigma, rename(r, t)) == inst(sigma.after(r), t)


@given(terms, st.integers(0, 8), st.integers(0, 8))
def test_lift_is_shift_above(t, n, k):
    assert lift(n, k, t) == rename(shift_above(k, n), t)


@given(terms, terms)
def test_subst_cancels_lift(t, u):
    assert subst1(u, lift(1, 0, t)) == t


@given(terms, terms, st.integers(0, 3))
def test_subst_agrees_with_inst(t, u, k):
    sigma = Instantiation(tuple(Rel(i) for i in range(k)) + (lift(k, 0, u),), -1)
    assert subst([u], k, t) == inst(sigma, t)


@given(terms, renamings)
def test_alpha_eq_ignores_names(t, r):
    s = strip_names(t)
    assert alpha_eq(s, t) and alpha_eq(t, s)
    assert rename(r, s) == rename(r, t)
    assert node_count(s) == node_count(t)
