"""Bidirectional type inference and checking, and whole-environment checking."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .conversion import CONV, CUMUL, ConvMode, Converter
from .env import (
    ConstantBody,
    GlobalEnv,
    MutualInductiveBody,
    OneInductiveBody,
    ConstructorBody,
    lookup_constant,
    lookup_inductive,
    positivity_check,
    type_of_constructor,
    type_of_inductive,
)
from .errors import (
    CumulFailure,
    GuardError,
    IllFormedCase,
    IllFormedInductive,
    NotAnInductive,
    NotAProduct,
    NotASort,
    TypeCheckError,
    UnboundRel,
    UniverseInconsistency,
)
from .reduction import ALL, Fuel, as_fuel, fix_context, whnf
from .term import (
    App,
    Assum,
    Case,
    Const,
    Construct,
    Fix,
    FixDef,
    Ind,
    IndRef,
    Lambda,
    LetIn,
    LocalDef,
    Predicate,
    Prod,
    Rel,
    Sort,
    Term,
    children,
    ctx_rels,
    decl_type,
    decompose_app,
    lift,
    mk_apps,
    subst,
    subst1,
)
from .universes import Prop, SortValue, Type, UGraph, build_graph, leq_universe, sort_of_product, type_of_sort

GuardOracle = Callable[[Sequence[FixDef], int], None]


@dataclass(frozen=True)
class CheckedEnv:
    """A global environment together with its (consistent) universe graph."""

    env: GlobalEnv
    graph: UGraph
    guard: GuardOracle | None = field(default=None, compare=False)
    _elim: dict = field(default_factory=dict, compare=False, repr=False)

    def extend(self, name: str, decl) -> CheckedEnv:
        return CheckedEnv(self.env.extend(name, decl), self.graph, self.guard, self._elim)

    @property
    def guard_oracle(self) -> GuardOracle:
        return guard_default if self.guard is None else self.guard


def checked(env: GlobalEnv, guard: GuardOracle | None = None) -> CheckedEnv:
    """Wrap an environment whose declarations are trusted; only universes are checked."""
    g = build_graph(env.levels, env.constraints)
    if not g.consistent:
        raise UniverseInconsistency("universe constraints are inconsistent")
    return CheckedEnv(env, g, guard)


def no_guard(defs, idx) -> None:
    """Accept every fixpoint (the unsafe escape hatch)."""


# -- the checker ---------------------------------------------------------------


class Checker:
    def __init__(self, E: CheckedEnv, fuel: Fuel):
        self.E = E
        self.env = E.env
        self.fuel = fuel
        self.conv = Converter(E.graph, E.env, fuel)

    # -- helpers --------------------------------------------------------------

    def whnf(self, ctx, t: Term) -> Term:
        return whnf(ALL, self.env, ctx, t, self.fuel)

    def convertible(self, ctx, mode: ConvMode, t: Term, u: Term):
        return self.conv.conv(tuple(ctx), mode, t, u)

    def check_sort(self, s: SortValue) -> None:
        if isinstance(s, Type):
            for lvl in s.u.levels():
                self.E.graph.require(lvl)

    def infer_sort(self, ctx, t: Term) -> SortValue:
        ty = self.whnf(ctx, self.infer(ctx, t))
        if not isinstance(ty, Sort):
            raise NotASort("expected a type", t)
        return ty.s

    def infer_product(self, ctx, ty: Term, t: Term) -> Prod:
        w = self.whnf(ctx, ty)
        if not isinstance(w, Prod):
            raise NotAProduct("applied term is not a function", t)
        return w

    def infer_ind(self, ctx, ty: Term, t: Term) -> tuple[IndRef, list[Term]]:
        head, args = decompose_app(self.whnf(ctx, ty))
        if not isinstance(head, Ind):
            raise NotAnInductive("expected a term of an inductive type", t)
        return head.ind, args

    # -- inference ------------------------------------------------------------

    def infer(self, ctx: tuple, t: Term) -> Term:
        self.fuel.tick()
        match t:
            case Rel(n):
                if n >= len(ctx):
                    raise UnboundRel(f"unbound variable #{n}", t)
                return decl_type(ctx, n)
            case Sort(s):
                self.check_sort(s)
                return Sort(type_of_sort(s))
            case Prod(na, a, b):
                s1 = self.infer_sort(ctx, a)
                s2 = self.infer_sort(ctx + (Assum(na, a),), b)
                return Sort(sort_of_product(s1, s2))
            case Lambda(na, a, b):
                self.infer_sort(ctx, a)
                return Prod(na, a, self.infer(ctx + (Assum(na, a),), b))
            case LetIn(na, v, ty, b):
                self.infer_sort(ctx, ty)
                self.check(ctx, v, ty)
                return LetIn(na, v, ty, self.infer(ctx + (LocalDef(na, v, ty),), b))
            case App(f, a):
                prod = self.infer_product(ctx, self.infer(ctx, f), f)
                self.check(ctx, a, prod.dom)
                return subst1(a, prod.cod)
            case Const(c):
                return lookup_constant(self.env, c).ty
            case Ind(ind):
                return type_of_inductive(self.env, ind)
            case Construct(ind, k):
                return type_of_constructor(self.env, ind, k)
            case Case():
                return self.check_case(ctx, t)
            case Fix():
                return self.check_fix(ctx, t)
        raise TypeError(f"not a term: {t!r}")

    def check(self, ctx: tuple, t: Term, ty: Term) -> None:
        inferred = self.infer(ctx, t)
        err = self.convertible(ctx, CUMUL, inferred, ty)
        if err is not None:
            raise CumulFailure(
                f"type mismatch ({err.reason})", t, inferred=inferred, expected=ty, reason=err
            )

    def check_args(self, ctx, args: Sequence[Term], tele: Sequence) -> None:
        """Check ``args`` against a telescope whose types mention only earlier
        telescope entries and ``ctx``."""
        for i, (a, d) in enumerate(zip(args, tele)):
            ty = subst(list(reversed(args[:i])), 0, d.ty)
            self.check(ctx, a, ty)

    def check_context(self, ctx, decls, err: Callable[[str], TypeCheckError]) -> None:
        ctx = tuple(ctx)
        for d in decls:
            if isinstance(d, LocalDef):
                raise err("let-binding")
            self.infer_sort(ctx, d.ty)
            ctx = ctx + (d,)

    # -- match ----------------------------------------------------------------

    def check_case(self, ctx: tuple, t: Case) -> Term:
        ci, p, scrut, brs = t.ci, t.pred, t.scrut, t.branches
        mib, oib = lookup_inductive(self.env, ci.ind)
        if ci.npars != mib.npars:
            raise IllFormedCase("npars", t)
        ind, args = self.infer_ind(ctx, self.infer(ctx, scrut), scrut)
        if ind != ci.ind:
            raise IllFormedCase("inductive", t)
        params, indices = args[: mib.npars], args[mib.npars :]
        if len(p.params) != mib.npars:
            raise IllFormedCase("params", t)
        self.check_args(ctx, p.params, mib.params)
        for stored, actual in zip(p.params, params):
            if self.convertible(ctx, CONV, stored, actual) is not None:
                raise IllFormedCase("params", t)

        expected = predicate_context(ci.ind, mib, oib, p.params)
        if len(p.pcontext) != len(expected):
            raise IllFormedCase("pcontext", t)
        self._check_binders(ctx, p.pcontext, expected, "pcontext", t)
        ps = self.infer_sort(ctx + p.pcontext, p.preturn)
        if isinstance(oib.sort, Prop) and not isinstance(ps, Prop) and not self.large_elim(ci.ind):
            raise IllFormedCase("elimination", t)

        if len(brs) != len(oib.ctors):
            raise IllFormedCase("arity", t)
        for k, (cb, br) in enumerate(zip(oib.ctors, brs)):
            if len(br.bcontext) != cb.arity:
                raise IllFormedCase("branch-arity", t)
            self._check_binders(ctx, br.bcontext, branch_context(mib, cb, p.params), "bcontext", t)
            self.check(ctx + br.bcontext, br.body, branch_type(ci.ind, mib, k, cb, p))
        return subst([scrut] + list(reversed(indices)), 0, p.preturn)

    def _check_binders(self, ctx, stored, expected, detail: str, t: Term) -> None:
        inner = tuple(ctx)
        for d, e in zip(stored, expected):
            if isinstance(d, LocalDef):
                raise IllFormedCase(detail, t)
            self.infer_sort(inner, d.ty)
            if self.convertible(inner, CONV, d.ty, e.ty) is not None:
                raise IllFormedCase(detail, t)
            inner = inner + (d,)

    def large_elim(self, ind: IndRef) -> bool:
        """May a Prop inductive be eliminated into Type? (singleton elimination)"""
        key = (ind.mind, ind.idx)
        if key not in self.E._elim:
            mib, oib = lookup_inductive(self.env, ind)
            self.E._elim[key] = self._singleton(mib, oib)
        return self.E._elim[key]

    def _singleton(self, mib: MutualInductiveBody, oib: OneInductiveBody) -> bool:
        if not isinstance(oib.sort, Prop):
            return True
        if len(oib.ctors) == 0:
            return True
        if len(oib.ctors) > 1:
            return False
        ctx = tuple(mib.params)
        for d in oib.ctors[0].args:
            if not isinstance(self.infer_sort(ctx, d.ty), Prop):
                return False
            ctx = ctx + (d,)
        return True

    # -- fixpoints ------------------------------------------------------------

    def check_fix(self, ctx: tuple, t: Fix) -> Term:
        defs = t.defs
        for d in defs:
            self.infer_sort(ctx, d.ty)
        fctx = ctx + fix_context(defs)
        n = len(defs)
        for d in defs:
            self._check_rarg(ctx, d, t)
            self.check(fctx, d.body, lift(n, 0, d.ty))
        self.E.guard_oracle(defs, t.idx)
        return defs[t.idx].ty

    def _check_rarg(self, ctx, d: FixDef, t: Term) -> None:
        ty, inner = d.ty, tuple(ctx)
        for j in range(d.rarg + 1):
            w = self.whnf(inner, ty)
            if not isinstance(w, Prod):
                raise GuardError(f"{d.name}: not enough arguments for the structural argument", t)
            if j == d.rarg:
                head, _ = decompose_app(self.whnf(inner, w.dom))
                if not isinstance(head, Ind):
                    raise GuardError(f"{d.name}: structural argument is not of an inductive type", t)
            inner = inner + (Assum(w.name, w.dom),)
            ty = w.cod


# -- match typing helpers ------------------------------------------------------


def predicate_context(ind: IndRef, mib: MutualInductiveBody, oib: OneInductiveBody, params) -> tuple:
    """Index binders instantiated with ``params``, followed by the matched term."""
    rev = list(reversed(params))
    decls = tuple(Assum(d.name, subst(rev, j, d.ty)) for j, d in enumerate(oib.indices))
    m = len(decls)
    self_ty = mk_apps(Ind(ind), [lift(m, 0, x) for x in params] + ctx_rels(m))
    return decls + (Assum("self", self_ty),)


def branch_context(mib: MutualInductiveBody, cb: ConstructorBody, params) -> tuple:
    rev = list(reversed(params))
    return tuple(Assum(d.name, subst(rev, i, d.ty)) for i, d in enumerate(cb.args))


def branch_type(ind: IndRef, mib: MutualInductiveBody, k: int, cb: ConstructorBody, p: Predicate) -> Term:
    """Return type of branch ``k`` under its constructor arguments."""
    nargs = cb.arity
    m = len(p.pcontext) - 1
    rev = list(reversed(p.params))
    indices = [subst(rev, nargs, it) for it in cb.index_terms]
    self_term = mk_apps(Construct(ind, k), [lift(nargs, 0, x) for x in p.params] + ctx_rels(nargs))
    ret = lift(nargs, m + 1, p.preturn)
    return subst([self_term] + list(reversed(indices)), 0, ret)


# -- the syntactic guard -------------------------------------------------------


def guard_default(defs: Sequence[FixDef], idx: int) -> None:
    """Every recursive call must pass, as its structural argument, a variable
    bound by a match branch on the structural parameter (or on such a
    variable).  Raises GuardError otherwise."""
    n = len(defs)
    for d in defs:
        body, depth = d.body, n
        for _ in range(d.rarg + 1):
            if not isinstance(body, Lambda):
                raise GuardError(f"{d.name}: the body must bind the structural argument", Fix(tuple(defs), idx))
            _guard_walk(defs, body.dom, depth, frozenset(), frozenset())
            body, depth = body.body, depth + 1
        _guard_walk(defs, body, depth, frozenset({n + d.rarg}), frozenset())


def _guard_walk(defs, t: Term, depth: int, structs: frozenset, subs: frozenset) -> None:
    """``structs``/``subs`` hold de Bruijn *levels* counted from the fixpoint binders."""
    n = len(defs)

    def level(r: Rel) -> int:
        return depth - 1 - r.index

    head, args = decompose_app(t)
    if isinstance(head, Rel) and 0 <= level(head) < n:
        f = defs[level(head)]
        if len(args) <= f.rarg:
            raise GuardError(f"recursive call to {f.name} is not applied to its structural argument", t)
        a = args[f.rarg]
        if not (isinstance(a, Rel) and level(a) in subs):
            raise GuardError(f"recursive call to {f.name} on a term that is not a strict subterm", t)
        for a in args:
            _guard_walk(defs, a, depth, structs, subs)
        return
    if isinstance(t, Case):
        s = t.scrut
        on_struct = isinstance(s, Rel) and level(s) >= 0 and level(s) in structs | subs
        for x in t.pred.params:
            _guard_walk(defs, x, depth, structs, subs)
        _guard_ctx(defs, t.pred.pcontext, depth, structs, subs)
        _guard_walk(defs, t.pred.preturn, depth + len(t.pred.pcontext), structs, subs)
        _guard_walk(defs, s, depth, structs, subs)
        for br in t.branches:
            k = len(br.bcontext)
            _guard_ctx(defs, br.bcontext, depth, structs, subs)
            inner = subs | frozenset(range(depth, depth + k)) if on_struct else subs
            _guard_walk(defs, br.body, depth + k, structs, inner)
        return
    for sub, k in children(t):
        _guard_walk(defs, sub, depth + k, structs, subs)


def _guard_ctx(defs, decls, depth, structs, subs) -> None:
    for i, d in enumerate(decls):
        if isinstance(d, LocalDef):
            _guard_walk(defs, d.body, depth + i, structs, subs)
        _guard_walk(defs, d.ty, depth + i, structs, subs)


# -- public entry points -------------------------------------------------------


def _run(E: CheckedEnv, fuel, f):
    return f(Checker(E, as_fuel(fuel)))


def infer(E: CheckedEnv, ctx: Sequence, t: Term, fuel: Fuel | int | None = None) -> Term:
    return _run(E, fuel, lambda c: c.infer(tuple(ctx), t))


def check(E: CheckedEnv, ctx: Sequence, t: Term, ty: Term, fuel: Fuel | int | None = None) -> None:
    return _run(E, fuel, lambda c: c.check(tuple(ctx), t, ty))


def infer_sort(E: CheckedEnv, ctx: Sequence, t: Term, fuel: Fuel | int | None = None) -> SortValue:
    return _run(E, fuel, lambda c: c.infer_sort(tuple(ctx), t))


def infer_product(E: CheckedEnv, ctx: Sequence, ty: Term, fuel: Fuel | int | None = None) -> Prod:
    return _run(E, fuel, lambda c: c.infer_product(tuple(ctx), ty, ty))


def check_case(E: CheckedEnv, ctx: Sequence, t: Case, fuel: Fuel | int | None = None) -> Term:
    return _run(E, fuel, lambda c: c.check_case(tuple(ctx), t))


def check_fix(E: CheckedEnv, ctx: Sequence, t: Fix, fuel: Fuel | int | None = None) -> Term:
    return _run(E, fuel, lambda c: c.check_fix(tuple(ctx), t))


def check_env(
    raw: GlobalEnv,
    fuel: int | None = None,
    guard: GuardOracle | None = None,
) -> CheckedEnv:
    """Check every declaration against the ones before it.

    Each declaration gets its own fuel budget.  Errors carry the offending
    declaration's name in ``decl``.
    """
    E = checked(GlobalEnv(raw.levels, raw.constraints), guard)
    for name, decl in raw.decls:
        c = Checker(E, as_fuel(fuel))
        try:
            if isinstance(decl, ConstantBody):
                c.infer_sort((), decl.ty)
                if decl.body is not None:
                    c.check((), decl.body, decl.ty)
                E = E.extend(name, decl)
            else:
                E = _check_inductive(E, c, name, decl)
        except TypeCheckError as e:
            e.decl = name
            raise
    return E


def _check_inductive(E: CheckedEnv, c: Checker, name: str, mib: MutualInductiveBody) -> CheckedEnv:
    def bad(detail):
        return IllFormedInductive(detail, message=f"{name}: ill-formed inductive ({detail})")

    c.check_context((), mib.params, bad)
    for oib in mib.bodies:
        c.check_sort(oib.sort)
        c.check_context(mib.params, oib.indices, bad)
    E2 = E.extend(name, mib)
    c = Checker(E2, c.fuel)
    params = tuple(mib.params)
    for i, oib in enumerate(mib.bodies):
        for cb in oib.ctors:
            inner = params
            for d in cb.args:
                if isinstance(d, LocalDef):
                    raise bad("let-binding")
                s = c.infer_sort(inner, d.ty)
                if isinstance(oib.sort, Type) and isinstance(s, Type) and not leq_universe(
                    E.graph, s.u, oib.sort.u
                ):
                    raise bad(f"universe of an argument of {cb.name} is too large")
                inner = inner + (d,)
            if len(cb.index_terms) != len(oib.indices):
                raise bad(f"{cb.name} has the wrong number of indices")
            nargs = cb.arity
            tele = [Assum(d.name, lift(nargs, j, d.ty)) for j, d in enumerate(oib.indices)]
            c.check_args(inner, list(cb.index_terms), tele)
    positivity_check(E2.env, mib)
    for i in range(len(mib.bodies)):
        c.large_elim(IndRef(name, i))
    return E2
