"""Executable confluence and typing metatheory: rho, parallel reducts, generators, property suites.

All reduction here is on closed terms.  Local contexts only arise from the
binders crossed while descending into a term.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterator, Sequence

from .checker import CheckedEnv, branch_context, check, infer, infer_sort, predicate_context
from .conversion import ConvMode, isconv
from .env import ConstantBody, MutualInductiveBody, lookup_inductive
from .errors import OutOfFuel, PcuicError, SizeExceeded
from .printer import print_term
from .reduction import DEFAULT_FUEL, fix_context, iota_branch, is_constructor_app, reducts, root_reducts
from .resolve import read_term
from .shipped import corpus_names, load_checked
from .term import (
    App,
    Assum,
    Branch,
    Case,
    CaseInfo,
    Const,
    Construct,
    Fix,
    FixDef,
    Ind,
    Lambda,
    LetIn,
    LocalDef,
    Predicate,
    Prod,
    Rel,
    Sort,
    Term,
    closed_under,
    decompose_app,
    lift,
    map_subterms,
    mk_apps,
    node_count,
    occurs,
    subst,
    subst1,
    unfold_fix,
)
from .universes import PROP, type_of_sort

log = logging.getLogger(__name__)

PAR_BOUND = 60
PAR_LIMIT = 20_000


# -- immediate subterms with their local contexts ---------------------------------


def _decl_kids(ctx: tuple, decls: tuple) -> list[tuple[Term, tuple]]:
    out = []
    for i, d in enumerate(decls):
        inner = ctx + decls[:i]
        if isinstance(d, LocalDef):
            out.append((d.body, inner))
        out.append((d.ty, inner))
    return out


def kids(ctx: tuple, t: Term) -> list[tuple[Term, tuple]]:
    """Immediate subterms in the order ``map_subterms`` visits them, each with its context."""
    match t:
        case Prod(na, a, b) | Lambda(na, a, b):
            return [(a, ctx), (b, ctx + (Assum(na, a),))]
        case LetIn(na, v, ty, b):
            return [(v, ctx), (ty, ctx), (b, ctx + (LocalDef(na, v, ty),))]
        case App(f, a):
            return [(f, ctx), (a, ctx)]
        case Case(_, p, scrut, brs):
            out = [(x, ctx) for x in p.params]
            out += _decl_kids(ctx, p.pcontext)
            out.append((p.preturn, ctx + p.pcontext))
            for br in brs:
                out += _decl_kids(ctx, br.bcontext)
                out.append((br.body, ctx + br.bcontext))
            out.append((scrut, ctx))
            return out
        case Fix(defs, _):
            inner = ctx + fix_context(defs)
            out = []
            for d in defs:
                out += [(d.ty, ctx), (d.body, inner)]
            return out
    return []


def rebuild(t: Term, new: Sequence[Term]) -> Term:
    """``t`` with its immediate subterms replaced, in ``kids`` order."""
    it = iter(new)
    return map_subterms(lambda _s, _k: next(it), t, 0)


def contextual_subterms(t: Term, ctx: tuple = ()) -> Iterator[tuple[tuple, Term]]:
    yield ctx, t
    for sub, c in kids(ctx, t):
        yield from contextual_subterms(sub, c)


# -- rho ------------------------------------------------------------------------


def _fix_redex(t: Term) -> tuple[Fix, list[Term]] | None:
    head, args = decompose_app(t)
    if isinstance(head, Fix) and len(args) == head.defs[head.idx].rarg + 1:
        return head, args
    return None


def rho(env, t: Term, ctx: tuple = ()) -> Term:
    """Contract every visible beta, zeta, iota and fix redex in one bottom-up pass.

    Let-bound variables are replaced by their (already contracted) values, so a
    fixpoint whose structural argument is such a variable can fire.
    """
    match t:
        case Rel(n) if n < len(ctx) and isinstance(ctx[-1 - n], LocalDef):
            return lift(n + 1, 0, ctx[-1 - n].body)
        case App(Lambda(na, a, b), u):
            return subst1(rho(env, u, ctx), rho(env, b, ctx + (Assum(na, a),)))
        case LetIn(na, v, ty, b):
            v2 = rho(env, v, ctx)
            return subst1(v2, rho(env, b, ctx + (LocalDef(na, v2, ty),)))
        case Case(ci, _, scrut, brs):
            head, args = decompose_app(scrut)
            if isinstance(head, Construct):
                brs2 = [Branch(br.bcontext, rho(env, br.body, ctx + br.bcontext)) for br in brs]
                r = iota_branch(env, ci, head, [rho(env, a, ctx) for a in args], brs2)
                if r is not None:
                    return r
        case App():
            redex = _fix_redex(t)
            if redex is not None:
                fix, args = redex
                args = [rho(env, a, ctx) for a in args]
                if is_constructor_app(args[fix.defs[fix.idx].rarg]):
                    fix = rho(env, fix, ctx)
                    return mk_apps(unfold_fix(fix.defs, fix.idx), args)
    return rebuild(t, [rho(env, x, c) for x, c in kids(ctx, t)])


# -- parallel reducts -------------------------------------------------------------


class ParReducer:
    """Enumerates one-step parallel reducts with memoization on (context, term)."""

    def __init__(self, env, bound: int = PAR_BOUND, limit: int = PAR_LIMIT):
        self.env = env
        self.bound = bound
        self.limit = limit
        self.memo: dict = {}

    def _check(self, n: int) -> None:
        if n > self.limit:
            raise SizeExceeded(f"more than {self.limit} parallel reducts")

    def combos(self, parts: list[tuple[Term, tuple]]) -> Iterator[tuple[Term, ...]]:
        sets = [self.reducts(c, x) for x, c in parts]
        n = 1
        for s in sets:
            n *= len(s)
        self._check(n)
        return product(*sets)

    def reducts(self, ctx: tuple, t: Term) -> frozenset:
        key = (ctx, t)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if node_count(t) > self.bound:
            raise SizeExceeded(f"term has more than {self.bound} nodes")
        if isinstance(t, LetIn):
            out = set(self.let(ctx, t))
        else:
            out = {rebuild(t, c) for c in self.combos(kids(ctx, t))}
            out.update(self.root(ctx, t))
        self._check(len(out))
        res = frozenset(out)
        self.memo[key] = res
        return res

    def let(self, ctx: tuple, t: LetIn) -> Iterator[Term]:
        """Congruence and zeta; the body is reduced in a context holding the reduced value."""
        vs, tys = self.reducts(ctx, t.val), self.reducts(ctx, t.ty)
        for v2 in vs:
            bs = self.reducts(ctx + (LocalDef(t.name, v2, t.ty),), t.body)
            self._check(len(tys) * len(bs))
            for b2 in bs:
                yield subst1(v2, b2)
                for ty2 in tys:
                    yield LetIn(t.name, v2, ty2, b2)

    def root(self, ctx: tuple, t: Term) -> Iterator[Term]:
        match t:
            case Rel(n) if n < len(ctx) and isinstance(ctx[-1 - n], LocalDef):
                yield lift(n + 1, 0, ctx[-1 - n].body)
            case App(Lambda(na, a, b), u):
                for b2, u2 in self.combos([(b, ctx + (Assum(na, a),)), (u, ctx)]):
                    yield subst1(u2, b2)
            case Case(ci, _, scrut, brs):
                head, args = decompose_app(scrut)
                if isinstance(head, Construct) and head.ind == ci.ind and head.idx < len(brs):
                    br = brs[head.idx]
                    if len(args) == ci.npars + len(br.bcontext):
                        parts = [(a, ctx) for a in args] + [(br.body, ctx + br.bcontext)]
                        for c in self.combos(parts):
                            real = list(c[ci.npars:-1])
                            yield subst(real[::-1], 0, c[-1])
        if isinstance(t, App):
            redex = _fix_redex(t)
            if redex is not None:
                fix, args = redex
                rarg = fix.defs[fix.idx].rarg
                for c in self.combos([(fix, ctx)] + [(a, ctx) for a in args]):
                    if is_constructor_app(c[1 + rarg]):
                        yield mk_apps(unfold_fix(c[0].defs, c[0].idx), list(c[1:]))


def par_reducts(env, t: Term, bound: int = PAR_BOUND, limit: int = PAR_LIMIT) -> frozenset:
    return ParReducer(env, bound, limit).reducts((), t)


def multi_reducts(env, t: Term, depth: int, limit: int = 50_000) -> set:
    """Everything reachable in at most ``depth`` one-step reductions."""
    seen, frontier = {t}, [t]
    for _ in range(depth):
        nxt = []
        for x in frontier:
            for y in reducts(env, (), x):
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        if len(seen) > limit:
            raise SizeExceeded(f"more than {limit} multi-step reducts")
        frontier = nxt
    return seen


# -- confluence checks -----------------------------------------------------------


def triangle_check(env, t: Term, par: ParReducer | None = None) -> Term | None:
    """Return a parallel reduct ``u`` of ``t`` with ``rho(t)`` not a parallel reduct of ``u``."""
    par = par or ParReducer(env)
    r = rho(env, t)
    us = par.reducts((), t)
    if r not in us:
        return t
    for u in us:
        if r not in par.reducts((), u):
            return u
    return None


def diamond_check(env, t: Term, par: ParReducer | None = None) -> tuple[Term, Term] | None:
    """Return two parallel reducts of ``t`` with no common parallel reduct."""
    par = par or ParReducer(env)
    r = rho(env, t)
    us = sorted(par.reducts((), t), key=node_count)
    sets = {u: par.reducts((), u) for u in us}
    slow = [u for u in us if r not in sets[u]]
    for u1 in slow:
        for u2 in us:
            if sets[u1].isdisjoint(sets[u2]):
                return u1, u2
    return None


def random_walk(env, t: Term, steps: int, rng: random.Random, max_nodes: int = 400) -> Term:
    for _ in range(steps):
        rs = [u for u in reducts(env, (), t) if node_count(u) <= max_nodes]
        if not rs:
            break
        t = rng.choice(rs)
    return t


def replace_all(t: Term, old: Term, new: Term) -> Term:
    def go(s: Term, k: int) -> Term:
        return new if s == old else map_subterms(go, s, k)

    return go(t, 0)


def shared_reducts(env, t: Term) -> list[Term]:
    """One-step reducts, plus the results of contracting every copy of one redex at once.

    A redex other than a let-bound variable contracts the same way wherever it
    occurs, so contracting all of its copies is a single parallel step.
    """
    out = dict.fromkeys(reducts(env, (), t))
    redexes = {}
    for ctx, sub in contextual_subterms(t):
        if not isinstance(sub, Rel) and sub not in redexes:
            redexes[sub] = list(root_reducts(env, ctx, sub))
    for r, rs in redexes.items():
        for r2 in rs:
            out.setdefault(replace_all(t, r, r2))
    return list(out)


def _shape(t: Term) -> frozenset:
    """The set of subterms of ``t`` (names ignored)."""
    return frozenset(sub for _, sub in contextual_subterms(t))


def join(env, a: Term, b: Term, depth: int = 10, cap: int = 400, max_nodes: int = 400) -> Term | None:
    """Search for a common reduct of ``a`` and ``b`` within ``depth`` steps on each side.

    A step is a one-step reduction or the contraction of all copies of one redex
    (see ``shared_reducts``).  Both sides grow breadth-first.  Each layer keeps the ``cap`` new terms whose
    subterm sets are closest to the other side's start, plus the leftmost-outermost
    successor of the previous layer's chain.
    """
    if a == b:
        return a
    sides = [{"seen": {x}, "frontier": [x], "chain": x, "goal": _shape(y)} for x, y in ((a, b), (b, a))]
    for _ in range(depth):
        for me, other in ((sides[0], sides[1]), (sides[1], sides[0])):
            new = []
            for x in me["frontier"]:
                for y in shared_reducts(env, x):
                    if y not in me["seen"] and node_count(y) <= max_nodes:
                        me["seen"].add(y)
                        new.append(y)
                        if y in other["seen"]:
                            return y
            rs = reducts(env, (), me["chain"])
            if rs:
                me["chain"] = rs[0]
                if me["chain"] in other["seen"]:
                    return me["chain"]
            goal = me["goal"]
            new.sort(key=lambda y: (len(_shape(y) ^ goal), node_count(y)))
            frontier = new[:cap]
            if rs and me["chain"] not in frontier:
                me["seen"].add(me["chain"])
                frontier.append(me["chain"])
            me["frontier"] = frontier
    return None


def joinability_check(env, t: Term, steps: int, trials: int, rng: random.Random, depth: int = 10):
    """Walk twice from ``t`` at random and join the endpoints; return an unjoined pair."""
    for _ in range(trials):
        a = random_walk(env, t, rng.randint(1, steps), rng)
        b = random_walk(env, t, rng.randint(1, steps), rng)
        if join(env, a, b, depth) is None:
            return a, b
    return None


# -- generators ---------------------------------------------------------------------


NAT_FIX = (
    "fix f (n : nat) {struct n} : nat := "
    "match n in nat return nat with | O => O | S p => S (S (f p)) end"
)


class NatTerms:
    """Exhaustive enumeration of closed ``nat`` terms over a small signature.

    Atoms are ``O``, the innermost variable and ``S`` applied to an atom.  A term
    is an atom, ``S`` of a term, a beta redex or let with an atomic argument and a
    term body (outside any binder only), a match on a term with atomic branches,
    or a fixed structural fixpoint applied to a term.
    """

    def __init__(self, E: CheckedEnv, max_depth: int = 1):
        self.E = E
        nat = E.env.global_ref("nat")
        self.nat = nat
        self.O = Construct(nat.ind, 0)
        self.S = Construct(nat.ind, 1)
        mib, oib = lookup_inductive(E.env, nat.ind)
        self.pctx = predicate_context(nat.ind, mib, oib, ())
        self.bctx = branch_context(mib, oib.ctors[1], ())
        self.fix = read_term(NAT_FIX, E.env)
        self.max_depth = max_depth
        self._atoms: dict = {}
        self._terms: dict = {}

    def atoms(self, n: int, d: int) -> list[Term]:
        key = (n, d)
        if key not in self._atoms:
            out = []
            if n == 1:
                out.append(self.O)
                if d:
                    out.append(Rel(0))
            elif n > 2:
                out = [App(self.S, a) for a in self.atoms(n - 2, d)]
            self._atoms[key] = out
        return self._atoms[key]

    def terms(self, n: int, d: int = 0) -> list[Term]:
        key = (n, min(d, self.max_depth + 1))
        if key in self._terms:
            return self._terms[key]
        out = list(self.atoms(n, d))
        if n > 2:
            small = set(self.atoms(n - 2, d))
            out += [App(self.S, t) for t in self.terms(n - 2, d) if t not in small]
        if d < self.max_depth:
            for k in range(1, n):
                for b in self.terms(k, d + 1):
                    out += [App(Lambda("x", self.nat, b), a) for a in self.atoms(n - 3 - k, d)]
                    out += [LetIn("x", a, self.nat, b) for a in self.atoms(n - 2 - k, d)]
        for s in range(1, n):
            for b0 in range(1, n):
                b1 = n - 4 - s - b0
                if b1 < 1:
                    continue
                for scrut in self.terms(s, d):
                    for x in self.atoms(b0, d):
                        for y in self.atoms(b1, d + 1):
                            out.append(self.match(scrut, x, y))
        k = n - node_count(self.fix) - 1
        if k >= 1:
            out += [App(self.fix, t) for t in self.terms(k, d)]
        self._terms[key] = out
        return out

    def match(self, scrut: Term, zero: Term, succ: Term) -> Case:
        pred = Predicate((), self.pctx, self.nat)
        return Case(CaseInfo(self.nat.ind, 0), pred, scrut, (Branch((), zero), Branch(self.bctx, succ)))

    def upto(self, max_size: int) -> Iterator[Term]:
        for n in range(1, max_size + 1):
            yield from self.terms(n)


def corpus_envs() -> dict[str, CheckedEnv]:
    return {name: load_checked(name) for name in corpus_names()}


def closed_subterms(E: CheckedEnv, max_size: int) -> list[Term]:
    """Closed, checker-accepted subterms of the declarations of ``E`` with at most ``max_size`` nodes."""
    seen = {}
    for _, decl in E.env.decls:
        if not isinstance(decl, ConstantBody):
            continue
        for root in (decl.ty, decl.body):
            if root is None:
                continue
            for _, sub in contextual_subterms(root):
                if node_count(sub) <= max_size and closed_under(0, sub) and sub not in seen:
                    seen[sub] = accepts(E, (), sub)
    return [t for t, ok in seen.items() if ok]


def accepts(E: CheckedEnv, ctx: tuple, t: Term, fuel: int = DEFAULT_FUEL) -> bool:
    try:
        infer(E, ctx, t, fuel)
    except PcuicError:
        return False
    return True


def typed_samples(E: CheckedEnv, max_size: int = 200) -> list[tuple[tuple, Term, Term]]:
    """``(ctx, t, T)`` for every typable subterm of a declaration body or type, with its inferred type."""
    out, seen = [], set()
    for _, decl in E.env.decls:
        if not isinstance(decl, ConstantBody):
            continue
        for root in (decl.ty, decl.body):
            if root is None:
                continue
            for ctx, sub in contextual_subterms(root):
                if node_count(sub) > max_size or (ctx, sub) in seen:
                    continue
                seen.add((ctx, sub))
                try:
                    infer_sort(E, (), _ctx_prod(ctx))
                    ty = infer(E, ctx, sub)
                except PcuicError:
                    continue
                out.append((ctx, sub, ty))
    return out


def _ctx_prod(ctx: tuple) -> Term:
    """A closed type whose well-formedness implies that of ``ctx``."""
    t: Term = Sort(PROP)
    for d in reversed(ctx):
        t = LetIn(d.name, d.body, d.ty, t) if isinstance(d, LocalDef) else Prod(d.name, d.ty, t)
    return t


# -- reports ------------------------------------------------------------------------


@dataclass
class Report:
    checked: int = 0
    skipped: int = 0
    counterexamples: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def _show(E: CheckedEnv, t: Term, ctx: tuple = ()) -> str:
    names = [d.name or "x" for d in ctx]
    return print_term(t, E.env, names)


def _pair(E: CheckedEnv, a: Term, b: Term, ctx: tuple = ()) -> str:
    return f"{_show(E, a, ctx)}  |  {_show(E, b, ctx)}"


# -- corpus pools ---------------------------------------------------------------------


def inline_globals(env, t: Term) -> Term:
    """Replace every defined constant by its (recursively inlined) body."""

    def go(t: Term, k: int) -> Term:
        if isinstance(t, Const):
            decl = env.lookup(t.name)
            if isinstance(decl, ConstantBody) and decl.body is not None:
                return inline_globals(env, decl.body)
            return t
        return map_subterms(go, t, k)

    return go(t, 0)


def corpus_closed_terms(max_size: int, inline: bool = False) -> list[tuple[CheckedEnv, Term]]:
    """Closed checker-accepted corpus subterms, optionally also with globals inlined."""
    out = []
    for E in corpus_envs().values():
        terms = closed_subterms(E, max_size)
        seen = set(terms)
        if inline:
            for t in list(terms):
                u = inline_globals(E.env, t)
                if u not in seen and node_count(u) <= max_size:
                    seen.add(u)
                    terms.append(u)
        out += [(E, t) for t in terms]
    return out


def corpus_definitions() -> list[tuple[CheckedEnv, str, ConstantBody]]:
    out = []
    for E in corpus_envs().values():
        for name, decl in E.env.decls:
            if isinstance(decl, ConstantBody):
                out.append((E, name, decl))
    return out


def corpus_typed_samples() -> list[tuple[CheckedEnv, tuple, Term, Term]]:
    return [(E, ctx, t, ty) for E in corpus_envs().values() for ctx, t, ty in typed_samples(E)]


# -- confluence suites ------------------------------------------------------------------


def triangle_suite(max_size: int = 25, fuel: int = DEFAULT_FUEL, reset: int = 5000) -> Report:
    """Exhaustive triangle check over the nat signature and closed corpus subterms."""
    rep = Report()
    E = load_checked("nat")
    jobs = [(E, t) for t in NatTerms(E).upto(max_size) if accepts(E, (), t, fuel)]
    jobs += corpus_closed_terms(max_size)
    par, last = None, None
    for i, (E, t) in enumerate(jobs):
        if par is None or E is not last or i % reset == 0:
            par, last = ParReducer(E.env), E
        try:
            u = triangle_check(E.env, t, par)
        except SizeExceeded:
            rep.skipped += 1
            continue
        rep.checked += 1
        if u is not None:
            rep.counterexamples.append(_pair(E, t, u))
    return rep


def diamond_suite(seed: int = 0, trials: int = 200, max_size: int = 40) -> Report:
    rep = Report()
    rng = random.Random(seed)
    pool = [(E, t) for E, t in corpus_closed_terms(max_size, inline=True) if rho(E.env, t) != t]
    for E, t in _draw(rng, pool, 4 * trials):
        if rep.checked >= trials:
            break
        try:
            bad = diamond_check(E.env, t)
        except SizeExceeded:
            rep.skipped += 1
            continue
        rep.checked += 1
        if bad is not None:
            rep.counterexamples.append(f"{_show(E, t)}  =>  {_pair(E, *bad)}")
    return rep


def join_suite(seed: int = 0, trials: int = 1000, steps: int = 8, depth: int = 10) -> Report:
    rep = Report()
    rng = random.Random(seed)
    starts = [(E, d.body) for E, _, d in corpus_definitions() if d.body is not None and reducts(E.env, (), d.body)]
    for E, t in _draw(rng, starts, trials):
        bad = joinability_check(E.env, t, steps, 1, rng, depth)
        rep.checked += 1
        if bad is not None:
            rep.counterexamples.append(_pair(E, *bad))
    return rep


def _draw(rng: random.Random, pool: list, n: int) -> list:
    """``n`` items: every item once per round, in a seeded order."""
    out = []
    while pool and len(out) < n:
        out += rng.sample(pool, min(len(pool), n - len(out)))
    return out


# -- typing suites ----------------------------------------------------------------------


def sr_suite(cap: int = 10_000, fuel: int = DEFAULT_FUEL, max_size: int = 200) -> Report:
    """Every one-step reduct of every corpus term checks against the term's inferred type."""
    rep = Report()
    terms = []
    for E, _, d in corpus_definitions():
        terms.append((E, d.ty))
        if d.body is not None:
            terms.append((E, d.body))
    terms += corpus_closed_terms(max_size)
    seen = set()
    for E, t in terms:
        if (id(E), t) in seen:
            continue
        seen.add((id(E), t))
        ty = infer(E, (), t, fuel)
        for r in reducts(E.env, (), t):
            if rep.checked + rep.skipped >= cap:
                return rep
            try:
                check(E, (), r, ty, fuel)
                rep.checked += 1
            except OutOfFuel:
                rep.skipped += 1
            except PcuicError as e:
                rep.checked += 1
                rep.counterexamples.append(f"{_pair(E, t, r)}  ({e.code}: {e.message})")
    return rep


def _bumps(t: Term) -> Iterator[Term]:
    """Raise the sort at the covariant end of a product/let spine."""
    match t:
        case Sort(s):
            yield Sort(type_of_sort(s))
            yield Sort(type_of_sort(type_of_sort(s)))
        case Prod(na, a, b):
            yield from (Prod(na, a, x) for x in _bumps(b))
        case LetIn(na, v, ty, b):
            yield from (LetIn(na, v, ty, x) for x in _bumps(b))


def supertypes(E: CheckedEnv, ctx: tuple, ty: Term) -> list[Term]:
    """Candidate supertypes of ``ty`` built by construction (not yet checked well-formed)."""
    base = [ty] + reducts(E.env, ctx, ty)[:4]
    out = []
    for b in base:
        out.append(b)
        out += list(_bumps(b))
    prop, kind = Sort(PROP), Sort(type_of_sort(PROP))
    for b in list(out):
        out.append(LetIn("w", prop, kind, lift(1, 0, b)))
        out.append(App(Lambda("w", kind, lift(1, 0, b)), prop))
    return list(dict.fromkeys(out))


def principality_suite(seed: int = 0, trials: int = 200, fuel: int = DEFAULT_FUEL) -> Report:
    rep = Report()
    rng = random.Random(seed)
    for E, ctx, t, ty in _draw(rng, corpus_typed_samples(), trials):
        rep.checked += 1
        for s in supertypes(E, ctx, ty):
            try:
                infer_sort(E, ctx, s, fuel)
            except PcuicError:
                rep.skipped += 1
                continue
            if not isconv(E.graph, E.env, ctx, ConvMode.CUMUL, ty, s, fuel):
                rep.counterexamples.append(f"{_show(E, t, ctx)} : {_show(E, ty, ctx)} not below {_show(E, s, ctx)}")
    return rep


# -- structural suites -------------------------------------------------------------------


def lift_context(ctx: tuple, n: int, k: int) -> tuple:
    return tuple(_map_decl(lambda x, j=j: lift(n, k + j, x), d) for j, d in enumerate(ctx))


def subst_context(ctx: tuple, s: list[Term], k: int) -> tuple:
    return tuple(_map_decl(lambda x, j=j: subst(s, k + j, x), d) for j, d in enumerate(ctx))


def _map_decl(f: Callable[[Term], Term], d):
    if isinstance(d, LocalDef):
        return LocalDef(d.name, f(d.body), f(d.ty))
    return Assum(d.name, f(d.ty))


def _types_in(E: CheckedEnv, ctx: tuple) -> list[Term]:
    out = [Sort(PROP), Sort(type_of_sort(PROP))]
    for name, decl in E.env.decls:
        if isinstance(decl, MutualInductiveBody):
            out += [Ind(ref.ind) for ref in [E.env.global_ref(b.name) for b in decl.bodies] if isinstance(ref, Ind)]
    out += [Rel(i) for i in range(len(ctx))]
    return out


def _agrees(E: CheckedEnv, ctx: tuple, t: Term, ty: Term, fuel: int, mode: ConvMode = ConvMode.CONV) -> str | None:
    """None when ``t`` infers a type convertible with (or, under CUMUL, below) ``ty``; otherwise why not."""
    try:
        got = infer(E, ctx, t, fuel)
    except PcuicError as e:
        return f"{e.code}: {e.message}"
    if got == ty or isconv(E.graph, E.env, ctx, mode, got, ty, fuel):
        return None
    return f"inferred {_show(E, got, ctx)}, expected {_show(E, ty, ctx)}"


def weakening_suite(seed: int = 0, trials: int = 500, fuel: int = DEFAULT_FUEL) -> Report:
    rep = Report()
    rng = random.Random(seed)
    for E, ctx, t, ty in _draw(rng, corpus_typed_samples(), trials):
        k = rng.randint(0, len(ctx))
        outer, inner = ctx[:k], ctx[k:]
        cands = [a for a in _types_in(E, outer) if _is_type(E, outer, a, fuel)]
        a = rng.choice(cands)
        ctx2 = outer + (Assum("w", a),) + lift_context(inner, 1, 0)
        n = len(inner)
        why = _agrees(E, ctx2, lift(1, n, t), lift(1, n, ty), fuel)
        rep.checked += 1
        if why:
            rep.counterexamples.append(f"weakening at {k}: {_show(E, t, ctx)} ({why})")
    return rep


def _is_type(E: CheckedEnv, ctx: tuple, a: Term, fuel: int) -> bool:
    try:
        infer_sort(E, ctx, a, fuel)
    except PcuicError:
        return False
    return True


def _witnesses(E: CheckedEnv, ctx: tuple, ty: Term, rng: random.Random, fuel: int, tries: int = 40) -> Term | None:
    """Some term of type ``ty`` in ``ctx`` drawn from variables, globals and closed corpus subterms."""
    pool = [Rel(i) for i in range(len(ctx))]
    pool += [ref for name in E.env.names() if (ref := E.env.global_ref(name)) is not None]
    pool += _small_closed(E)
    pool += [Sort(PROP), Sort(type_of_sort(PROP))]
    rng.shuffle(pool)
    for u in pool[:tries] + [u for u in pool[tries:] if isinstance(u, Rel)]:
        try:
            check(E, ctx, u, ty, fuel)
            return u
        except PcuicError:
            continue
    return None


_SMALL: dict = {}


def _small_closed(E: CheckedEnv) -> list[Term]:
    key = id(E)
    if key not in _SMALL:
        _SMALL[key] = closed_subterms(E, 12)
    return _SMALL[key]


def substitution_suite(seed: int = 0, trials: int = 500, fuel: int = DEFAULT_FUEL) -> Report:
    rep = Report()
    rng = random.Random(seed)
    pool = [s for s in corpus_typed_samples() if any(isinstance(d, Assum) for d in s[1])]
    attempts = 0
    while rep.checked < trials and attempts < 20 * trials:
        attempts += 1
        E, ctx, t, ty = rng.choice(pool)
        i = rng.choice([i for i, d in enumerate(ctx) if isinstance(d, Assum)])
        outer, inner = ctx[:i], ctx[i + 1:]
        u = _witnesses(E, outer, ctx[i].ty, rng, fuel)
        if u is None:
            rep.skipped += 1
            continue
        n = len(inner)
        ctx2 = outer + subst_context(inner, [u], 0)
        why = _agrees(E, ctx2, subst([u], n, t), subst([u], n, ty), fuel, ConvMode.CUMUL)
        rep.checked += 1
        if why:
            rep.counterexamples.append(f"substituting {_show(E, u, outer)} in {_show(E, t, ctx)} ({why})")
    return rep


def rename_binders(t: Term, fresh: Callable[[], str]) -> Term:
    """The same term (up to alpha) with every binder renamed by ``fresh``."""

    def ctx(decls):
        return tuple(_rename_decl(d, fresh()) for d in decls)

    def go(t: Term, k: int) -> Term:
        t = map_subterms(go, t, k)
        match t:
            case Prod(_, a, b):
                return Prod(fresh(), a, b)
            case Lambda(_, a, b):
                return Lambda(fresh(), a, b)
            case LetIn(_, v, ty, b):
                return LetIn(fresh(), v, ty, b)
            case Case(ci, p, scrut, brs):
                pred = Predicate(p.params, ctx(p.pcontext), p.preturn)
                return Case(ci, pred, scrut, tuple(Branch(ctx(b.bcontext), b.body) for b in brs))
            case Fix(defs, idx):
                return Fix(tuple(FixDef(fresh(), d.ty, d.body, d.rarg) for d in defs), idx)
        return t

    return go(t, 0)


def _rename_decl(d, name: str):
    if isinstance(d, LocalDef):
        return LocalDef(name, d.body, d.ty)
    return Assum(name, d.ty)


def alpha_suite(seed: int = 0, trials: int = 500, fuel: int = DEFAULT_FUEL) -> Report:
    """Renaming binders changes neither the term, its inferred type, nor its printed-and-reread form."""
    rep = Report()
    rng = random.Random(seed)
    for E, ctx, t, ty in _draw(rng, corpus_typed_samples(), trials):
        counter = iter(range(10**9))
        stem = rng.choice(["a", "v", "x_", "q", "h"])

        def fresh():
            return f"{stem}{next(counter)}"

        ctx2 = tuple(_rename_decl(_map_decl(lambda x: rename_binders(x, fresh), d), fresh()) for d in ctx)
        t2 = rename_binders(t, fresh)
        rep.checked += 1
        problems = []
        if t2 != t or ctx2 != ctx:
            problems.append("renaming changed the term")
        why = _agrees(E, ctx2, t2, ty, fuel)
        if why:
            problems.append(why)
        names = [d.name for d in ctx2]
        try:
            back = read_term(print_term(t2, E.env, names), E.env, names)
            if back != t:
                problems.append("print/parse round trip is not alpha-equal")
        except PcuicError as e:
            problems.append(f"reparse failed: {e.message}")
        if problems:
            rep.counterexamples.append(f"{_show(E, t, ctx)} ({'; '.join(problems)})")
    return rep


def _unused_positions(ctx: tuple, t: Term, ty: Term) -> list[int]:
    out = []
    for i, d in enumerate(ctx):
        if not isinstance(d, Assum):
            continue
        inner = ctx[i + 1:]
        n = len(inner)
        if occurs(n, t) or occurs(n, ty):
            continue
        if any(_decl_occurs(j, e) for j, e in enumerate(inner)):
            continue
        out.append(i)
    return out


def _decl_occurs(j: int, d) -> bool:
    return occurs(j, d.ty) or (isinstance(d, LocalDef) and occurs(j, d.body))


def strengthening_suite(seed: int = 0, trials: int = 500, fuel: int = DEFAULT_FUEL) -> Report:
    """Dropping a variable that occurs in neither the term nor later binders preserves typing.

    Samples without such a variable get one inserted first.
    """
    rep = Report()
    rng = random.Random(seed)
    dummy = Sort(PROP)
    for E, ctx, t, ty in _draw(rng, corpus_typed_samples(), trials):
        free = _unused_positions(ctx, t, ty)
        if not free:
            k = rng.randint(0, len(ctx))
            inner = ctx[k:]
            ctx = ctx[:k] + (Assum("w", Sort(PROP)),) + lift_context(inner, 1, 0)
            t, ty = lift(1, len(inner), t), lift(1, len(inner), ty)
            free = [k]
        i = rng.choice(free)
        outer, inner = ctx[:i], ctx[i + 1:]
        n = len(inner)
        ctx2 = outer + subst_context(inner, [dummy], 0)
        why = _agrees(E, ctx2, subst([dummy], n, t), subst([dummy], n, ty), fuel)
        rep.checked += 1
        if why:
            rep.counterexamples.append(f"dropping {ctx[i].name} from {_show(E, t, ctx)} ({why})")
    return rep


# -- driver -----------------------------------------------------------------------------

SUITES = ["triangle", "diamond", "join", "sr", "principality", "weakening", "substitution", "alpha", "strengthening"]


def run_suite(name: str, max_size: int | None = None, seed: int = 0, trials: int | None = None,
              fuel: int = DEFAULT_FUEL) -> Report:
    """Run one property suite; unset sizes and counts take the suite's own defaults."""

    def n(default: int) -> int:
        return default if trials is None else trials

    def size(default: int) -> int:
        return default if max_size is None else max_size

    match name:
        case "triangle":
            return triangle_suite(size(25), fuel)
        case "diamond":
            return diamond_suite(seed, n(200), size(40))
        case "join":
            return join_suite(seed, n(1000))
        case "sr":
            return sr_suite(n(10_000), fuel)
        case "principality":
            return principality_suite(seed, n(200), fuel)
        case "weakening":
            return weakening_suite(seed, n(500), fuel)
        case "substitution":
            return substitution_suite(seed, n(500), fuel)
        case "alpha":
            return alpha_suite(seed, n(500), fuel)
        case "strengthening":
            return strengthening_suite(seed, n(500), fuel)
    raise ValueError(f"unknown suite {name}")
