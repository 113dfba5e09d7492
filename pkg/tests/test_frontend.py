import pytest

from kit import NAT_SRC, prelude, term
from pcuic.checker import check_env
from pcuic.errors import DuplicateName, ParseError, UnboundName
from pcuic.meta import NatTerms
from pcuic.printer import print_env, print_term
from pcuic.resolve import load, read_term
from pcuic.shipped import corpus_paths
from pcuic.syntax import DDef, DInductive, parse
from pcuic.term import App, Const, Lambda, Rel, Sort
from pcuic.universes import TYPE0


def test_parse_declarations():
    [d] = parse(NAT_SRC)
    assert isinstance(d, DInductive)
    [d] = parse("def id : forall (A : Type0), A -> A := fun (A : Type0) (x : A) => x.")
    assert isinstance(d, DDef)


def test_comments_are_skipped():
    assert len(parse("(* a (* nested *) comment *)\n" + NAT_SRC)) == 1


def test_unbalanced_parens():
    with pytest.raises(ParseError) as ei:
        parse(NAT_SRC + "def bad : nat := (S (S O).")
    assert ei.value.span.line == 2
    assert ei.value.exit_code == 2


def test_resolve_binders():
    E = prelude()
    t = term(E, "fun (A : Type0) (x : A) => x")
    assert t == Lambda("A", Sort(TYPE0), Lambda("x", Rel(0), Rel(0)))


def test_application_is_left_nested():
    E = prelude()
    assert term(E, "plus O O") == App(App(Const("plus"), E.env.global_ref("O")), E.env.global_ref("O"))


def test_forward_reference():
    with pytest.raises(UnboundName):
        load(NAT_SRC + "def early : nat := later.\ndef later : nat := O.")


def test_duplicate_declaration():
    with pytest.raises(DuplicateName):
        load(NAT_SRC + "def O : nat := O.")


def test_print_identity():
    assert print_term(Lambda("x", Sort(TYPE0), Rel(0))) == "fun (x : Type0) => x"


def test_print_freshens_shadowed_names():
    E = prelude()
    t = Lambda("x", E.env.global_ref("nat"), Lambda("x", E.env.global_ref("nat"), Rel(1)))
    s = print_term(t, E.env)
    assert s == "fun (x : nat) (x0 : nat) => x"
    assert read_term(s, E.env) == t


def test_generated_terms_round_trip():
    E = prelude()
    for t in NatTerms(E).upto(13):
        assert read_term(print_term(t, E.env), E.env) == t


@pytest.mark.parametrize("path", corpus_paths(), ids=lambda p: p.stem)
def test_corpus_round_trip(path):
    env = load(path.read_text()).env
    again = load(print_env(env)).env
    assert again.decls == env.decls
    check_env(again)
