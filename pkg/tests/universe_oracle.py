"""Brute-force valuation search used as the oracle for the constraint graph."""

import itertools
import random

from pcuic.universes import Constraint, LVar, LZero, UnivExpr, satisfies

RANGE = 6


def models(levels, cs, top=RANGE):
    for vals in itertools.product(range(top + 1), repeat=len(levels)):
        v = dict(zip(levels, vals))
        v[LZero] = 0
        if all(satisfies(v, c) for c in cs):
            yield v


def brute_entails(ms, e, e2):
    return all(v[e.level] + e.plus <= v[e2.level] + e2.plus for v in ms)


def random_problem(rng: random.Random, max_vars=3, max_cs=6, max_k=2):
    levels = [LVar(n) for n in "ijk"[: rng.randint(0, max_vars)]]
    every = [LZero] + levels

    def expr():
        return UnivExpr(rng.choice(every), rng.randint(0, max_k))

    cs = [Constraint(expr(), expr()) for _ in range(rng.randint(0, max_cs))]
    return levels, cs, expr(), expr()
