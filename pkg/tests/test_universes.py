import random

import pytest

from universe_oracle import brute_entails, models, random_problem
from pcuic.errors import UndeclaredLevel
from pcuic.universes import (
    PROP,
    TYPE0,
    Constraint,
    LVar,
    LZero,
    Type,
    UnivExpr,
    Universe,
    build_graph,
    check_consistency,
    entails,
    leq_universe,
    lt,
    satisfies,
    sort_of_product,
    sup,
    type_of_sort,
)

i, j = LVar("i"), LVar("j")


def e(level, k=0):
    return UnivExpr(level, k)


def test_build_graph_examples():
    g = build_graph([], [])
    assert g.nodes == {LZero} and g.edges == ()
    g = build_graph([i], [lt(e(i), e(i))])
    assert (i, 1, i) in g.edges
    g = build_graph([i, j], [Constraint(e(i), e(j)), lt(e(j), e(i))])
    assert (i, 0, j) in g.edges and (j, 1, i) in g.edges
    with pytest.raises(UndeclaredLevel):
        build_graph([i], [Constraint(e(i), e(j))])


def test_consistency_examples():
    assert check_consistency(build_graph([], [])) == {LZero: 0}
    v = check_consistency(build_graph([i, j], [lt(e(i), e(j))]))
    assert v[i] == 0 and v[j] == 1
    assert check_consistency(build_graph([i, j], [lt(e(i), e(j)), lt(e(j), e(i))])) is None


def test_entails_examples():
    g = build_graph([i, j], [lt(e(i), e(j))])
    assert entails(g, e(i), e(i))
    assert entails(g, e(i), e(j))
    assert not entails(g, e(j), e(i))
    assert not entails(build_graph([i, j], []), e(i), e(j))


def test_leq_universe_examples():
    g = build_graph([i, j], [])
    u = Universe.of(e(i), e(j))
    assert leq_universe(g, u, u)
    assert leq_universe(g, Universe.level(LZero), Universe.level(LZero, 1))
    assert not leq_universe(g, u, Universe.level(i))


def test_sup_examples():
    u = Universe.level(i)
    assert sup(u, u) == u
    assert sup(Universe.level(LZero), u).exprs == {e(LZero), e(i)}
    assert sup(u, Universe.level(i, 2)) == Universe.level(i, 2)


def test_sort_of_product_examples():
    ti = Type(Universe.level(i))
    assert sort_of_product(ti, PROP) == PROP
    assert sort_of_product(PROP, ti) == Type(sup(TYPE0.u, ti.u))
    assert sort_of_product(TYPE0, TYPE0) == TYPE0
    for s in (PROP, TYPE0, ti, type_of_sort(ti)):
        assert sort_of_product(s, PROP) == PROP


def test_oracle_agreement_sample():
    rng = random.Random(7)
    for _ in range(500):
        levels, cs, x, y = random_problem(rng)
        g = build_graph(levels, cs)
        ms = list(models(levels, cs))
        v = check_consistency(g)
        assert (v is not None) == bool(ms)
        if v is None:
            continue
        assert all(satisfies(v, c) for c in cs)
        assert all(v[l] <= m[l] for m in ms for l in levels)
        assert entails(g, x, y) == brute_entails(ms, x, y)


def test_leq_universe_sound_and_preorder():
    rng = random.Random(11)
    for _ in range(300):
        levels, cs, x, y = random_problem(rng)
        g = build_graph(levels, cs)
        ms = list(models(levels, cs))
        if not ms:
            continue
        every = [LZero] + levels
        us = [Universe.of(*{UnivExpr(rng.choice(every), rng.randint(0, 2)) for _ in range(rng.randint(1, 2))}) for _ in range(3)]
        a, b, c = us
        assert leq_universe(g, a, a)
        if leq_universe(g, a, b) and leq_universe(g, b, c):
            assert leq_universe(g, a, c)
        if leq_universe(g, a, b):
            for m in ms:
                assert max(m[x.level] + x.plus for x in a.exprs) <= max(m[x.level] + x.plus for x in b.exprs)
