import pytest

from kit import NAT_SRC, env_of, term
from pcuic.checker import check_env, infer_sort
from pcuic.env import (
    ConstantBody,
    GlobalEnv,
    MutualInductiveBody,
    lookup_constant,
    lookup_constructor,
    positivity_check,
    type_of_constructor,
)
from pcuic.errors import DuplicateName, NoSuchConstructor, PositivityError, UndeclaredConstant
from pcuic.resolve import load
from pcuic.shipped import corpus_paths, load_checked
from pcuic.term import Ind, IndRef, Prod, Sort, closed_under
from pcuic.universes import TYPE0

NAT = IndRef("nat")


def test_lookup_after_insert():
    body = ConstantBody(Sort(TYPE0), None)
    env = GlobalEnv().extend("A", body)
    assert lookup_constant(env, "A") is body
    assert env.lookup("B") is None


def test_lookup_missing_constant():
    with pytest.raises(UndeclaredConstant):
        lookup_constant(GlobalEnv(), "nope")


def test_duplicate_name():
    env = GlobalEnv().extend("A", ConstantBody(Sort(TYPE0), None))
    with pytest.raises(DuplicateName):
        env.extend("A", ConstantBody(Sort(TYPE0), None))


def test_constructor_types():
    E = env_of(NAT_SRC + "inductive list (A : Type0) : Type0 := nil : list A | cons : A -> list A -> list A.")
    assert type_of_constructor(E.env, NAT, 0) == Ind(NAT)
    assert type_of_constructor(E.env, NAT, 1) == Prod("_", Ind(NAT), Ind(NAT))
    assert type_of_constructor(E.env, IndRef("list"), 0) == term(E, "forall (A : Type0), list A")


def test_missing_constructor():
    E = env_of(NAT_SRC)
    with pytest.raises(NoSuchConstructor):
        lookup_constructor(E.env, NAT, 2)


def test_negative_occurrence_rejected():
    prog = load(NAT_SRC)
    env = prog.env
    bad = load("inductive bad : Type0 := mk : (bad -> nat) -> bad.", env).env
    with pytest.raises(PositivityError):
        positivity_check(bad, bad.lookup("bad"))


def test_nested_occurrence_rejected():
    base = load("inductive list (A : Type0) : Type0 := nil : list A | cons : A -> list A -> list A.").env
    env = load("inductive rose : Type0 := node : list rose -> rose.", base).env
    with pytest.raises(PositivityError):
        positivity_check(env, env.lookup("rose"))


def test_strictly_positive_accepted():
    env = load(NAT_SRC + "inductive tree : Type0 := leaf : tree | node : (nat -> tree) -> tree.").env
    positivity_check(env, env.lookup("tree"))


def test_checking_never_looks_ahead(monkeypatch):
    original = GlobalEnv.lookup
    for path in corpus_paths():
        raw = load(path.read_text()).env
        order = {name: i for i, name in enumerate(raw.names())}
        calls = []

        def spy(self, name):
            calls.append((len(self.decls), name))
            return original(self, name)

        monkeypatch.setattr(GlobalEnv, "lookup", spy)
        check_env(raw)
        monkeypatch.setattr(GlobalEnv, "lookup", original)
        assert calls
        for size, name in calls:
            assert name not in order or order[name] < size, (path.name, name)


@pytest.mark.parametrize("path", corpus_paths(), ids=lambda p: p.stem)
def test_constructor_types_are_closed_and_typed(path):
    E = load_checked(path.stem)
    for name, decl in E.env.decls:
        if not isinstance(decl, MutualInductiveBody):
            continue
        for i, oib in enumerate(decl.bodies):
            for k in range(len(oib.ctors)):
                ty = type_of_constructor(E.env, IndRef(name, i), k)
                assert closed_under(0, ty)
                infer_sort(E, [], ty)
