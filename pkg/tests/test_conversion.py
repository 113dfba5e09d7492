import random
from collections import defaultdict
from functools import lru_cache

from kit import NAT_SRC, env_of, num, prelude, term
from pcuic.checker import infer
from pcuic.conversion import CONV, CUMUL, compare_alpha, isconv
from pcuic.meta import corpus_closed_terms
from pcuic.reduction import reducts
from pcuic.term import App, Assum, Lambda, LetIn, Prod, Rel, Sort, lift
from pcuic.universes import PROP, TYPE0, LVar, LZero, Type, Universe, build_graph

I = LVar("i")


def type_i():
    return Sort(Type(Universe.level(I)))


def test_compare_alpha_cumulativity():
    g = build_graph([I], [])
    assert compare_alpha(g, CUMUL, Sort(TYPE0), type_i())
    assert not compare_alpha(g, CUMUL, type_i(), Sort(TYPE0))
    assert not compare_alpha(g, CONV, Sort(TYPE0), type_i())


def test_compare_alpha_reflexive_and_names():
    g = build_graph([], [])
    t = Lambda("x", Sort(TYPE0), Rel(0))
    assert compare_alpha(g, CONV, t, t)
    assert compare_alpha(g, CONV, t, Lambda("y", Sort(TYPE0), Rel(0)))


def test_product_domains_are_invariant():
    g = build_graph([], [])
    type1 = Sort(Type(Universe.level(LZero, 1)))
    assert not compare_alpha(g, CUMUL, Prod("A", type1, Rel(0)), Prod("A", Sort(TYPE0), Rel(0)))
    big = Prod("A", Sort(TYPE0), type1)
    assert compare_alpha(g, CUMUL, Prod("A", Sort(TYPE0), Sort(TYPE0)), big)


def test_isconv_computes():
    E = prelude()
    assert isconv(E.graph, E.env, [], CONV, term(E, "plus (S O) (S O)"), num(E, 2))
    assert not isconv(E.graph, E.env, [], CONV, term(E, "plus (S O) (S O)"), num(E, 3))


def test_distinct_inductives_do_not_convert():
    E = prelude()
    res = isconv(E.graph, E.env, [], CUMUL, E.env.global_ref("nat"), E.env.global_ref("bool"))
    assert not res and not res.out_of_fuel


def test_arguments_compared_before_unfolding():
    E = env_of(
        NAT_SRC
        + "def plus : nat -> nat -> nat := fix plus (n : nat) (m : nat) {struct n} : nat :="
        " match n in nat return nat with | O => m | S p => S (plus p m) end.\n"
        "axiom g : nat -> nat.\n"
        "def f : nat -> nat := fun (n : nat) => g n.\n"
    )
    trace = []
    res = isconv(E.graph, E.env, [], CONV, term(E, "f (S (S O))"), term(E, "f (plus (S O) (S O))"), trace=trace)
    assert res
    assert ("args-first", "f") in trace
    assert ("unfold", "f") not in trace


def test_isconv_out_of_fuel_is_reported():
    E = prelude()
    res = isconv(E.graph, E.env, [], CONV, term(E, "six"), num(E, 6), fuel=5)
    assert not res and res.out_of_fuel


# -- properties over corpus terms -------------------------------------------------


def closure(env, t, depth=6, cap=400):
    """Reducts of ``t`` within ``depth`` steps, and whether the set is complete."""
    seen, frontier = {t}, [t]
    for _ in range(depth):
        nxt = []
        for x in frontier:
            for y in reducts(env, (), x):
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
        if len(seen) > cap:
            return seen, False
        if not frontier:
            return seen, True
    return seen, not frontier


@lru_cache(maxsize=None)
def same_type_pairs():
    groups = defaultdict(list)
    for E, t in corpus_closed_terms(50):
        groups[(id(E), infer(E, (), t))].append((E, t))
    out = []
    for g in groups.values():
        out += [(g[i][0], g[i][1], g[j][1]) for i in range(len(g)) for j in range(i + 1, len(g))]
    return out


def test_isconv_agrees_with_search_oracle():
    pairs = same_type_pairs()
    assert len(pairs) > 300
    for E, a, b in pairs:
        ok = bool(isconv(E.graph, E.env, (), CONV, a, b))
        A, done_a = closure(E.env, a)
        B, done_b = closure(E.env, b)
        found = bool(A & B)
        if not found and len(A) * len(B) <= 20_000:
            found = any(compare_alpha(E.graph, CONV, x, y) for x in A for y in B)
        if found:
            assert ok, (a, b)
        elif done_a and done_b:
            assert not ok, (a, b)


def corpus_types():
    out = []
    for E, t in corpus_closed_terms(30):
        ty = infer(E, (), t)
        if ty not in [x for e, x in out if e is E]:
            out.append((E, ty))
    return out


def test_cumul_reflexive_and_transitive():
    by_env = defaultdict(list)
    for E, ty in corpus_types():
        by_env[id(E)].append((E, ty))
    rng = random.Random(3)
    triples = 0
    for group in by_env.values():
        E = group[0][0]
        tys = [ty for _, ty in group]
        for ty in tys:
            assert isconv(E.graph, E.env, (), CUMUL, ty, ty)
        for _ in range(100):
            a, b, c = (rng.choice(tys) for _ in range(3))
            if isconv(E.graph, E.env, (), CUMUL, a, b) and isconv(E.graph, E.env, (), CUMUL, b, c):
                triples += 1
                assert isconv(E.graph, E.env, (), CUMUL, a, c)
    assert triples > 0


def test_product_injectivity():
    seen = 0
    by_env = defaultdict(list)
    for E, ty in corpus_types():
        if isinstance(ty, Prod):
            by_env[id(E)].append((E, ty))
    for group in by_env.values():
        for E, p in group:
            for _, q in group:
                if isconv(E.graph, E.env, (), CUMUL, p, q):
                    seen += 1
                    assert isconv(E.graph, E.env, (), CONV, p.dom, q.dom)
                    assert isconv(E.graph, E.env, [Assum(p.name, p.dom)], CUMUL, p.cod, q.cod)
    assert seen > 0


HOLES = [
    lambda t: Lambda("x", Sort(PROP), lift(1, 0, t)),
    lambda t: App(t, Sort(PROP)),
    lambda t: App(Lambda("y", Sort(PROP), Rel(0)), t),
    lambda t: LetIn("x", t, Sort(PROP), Rel(0)),
    lambda t: Prod("x", Sort(PROP), lift(1, 0, t)),
    lambda t: App(App(Lambda("y", Sort(PROP), Lambda("z", Sort(PROP), Rel(1))), Sort(PROP)), t),
]


def test_congruence():
    checked = 0
    for E, a, b in same_type_pairs()[:300]:
        if not isconv(E.graph, E.env, (), CONV, a, b):
            continue
        for hole in HOLES:
            checked += 1
            assert isconv(E.graph, E.env, (), CONV, hole(a), hole(b))
    assert checked > 0
