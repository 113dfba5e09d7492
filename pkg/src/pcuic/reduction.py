"""Reduction: the weak-head stack machine, one-step reducts, weak CBV.

Every entry point takes a fuel budget in place of a strong normalization
assumption; exhausting it raises OutOfFuel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .env import ConstantBody, GlobalEnv, lookup_inductive
from .errors import OutOfFuel, Stuck
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
    decompose_app,
    lift,
    mk_apps,
    subst,
    subst1,
    unfold_fix,
)

DEFAULT_FUEL = 10**6


class Fuel:
    """A step budget shared by one top-level call."""

    __slots__ = ("steps",)

    def __init__(self, steps: int = DEFAULT_FUEL):
        self.steps = steps

    def tick(self, n: int = 1) -> None:
        if self.steps < n:
            self.steps = 0
            raise OutOfFuel("reduction ran out of fuel")
        self.steps -= n

    def __repr__(self) -> str:
        return f"Fuel({self.steps})"


def as_fuel(fuel: Fuel | int | None) -> Fuel:
    if fuel is None:
        return Fuel()
    if isinstance(fuel, int):
        return Fuel(fuel)
    return fuel


@dataclass(frozen=True)
class RedFlags:
    beta: bool = True
    iota: bool = True
    zeta: bool = True
    delta: bool = True
    fixp: bool = True


ALL = RedFlags()
NO_DELTA = RedFlags(delta=False)


# -- the stack machine --------------------------------------------------------


@dataclass(frozen=True)
class AppArg:
    arg: Term


@dataclass(frozen=True)
class CaseFrame:
    ci: CaseInfo
    pred: Predicate
    branches: tuple


@dataclass(frozen=True)
class FixFrame:
    defs: tuple
    idx: int
    before: tuple


Frame = AppArg | CaseFrame | FixFrame


def zip_stack(t: Term, stack: Sequence[Frame]) -> Term:
    """Rebuild the term for head ``t`` under ``stack`` (top of stack last)."""
    for fr in reversed(stack):
        match fr:
            case AppArg(a):
                t = App(t, a)
            case CaseFrame(ci, p, brs):
                t = Case(ci, p, t, brs)
            case FixFrame(defs, idx, before):
                t = mk_apps(Fix(defs, idx), list(before) + [t])
    return t


def unzip(t: Term) -> tuple[Term, list[Frame]]:
    """Split off the application spine of ``t``."""
    stack: list[Frame] = []
    while isinstance(t, App):
        stack.append(AppArg(t.arg))
        t = t.fn
    return t, stack


def lookup_local_def(ctx: Sequence, n: int) -> Term | None:
    if n < len(ctx):
        d = ctx[-1 - n]
        if isinstance(d, LocalDef):
            return lift(n + 1, 0, d.body)
    return None


def constant_body(env: GlobalEnv, c: str) -> Term | None:
    d = env.lookup(c)
    if isinstance(d, ConstantBody):
        return d.body
    return None


def _top_args(stack: list[Frame]) -> int:
    """Index where the run of AppArg frames at the top of the stack starts."""
    i = len(stack)
    while i > 0 and isinstance(stack[i - 1], AppArg):
        i -= 1
    return i


def whnf(flags: RedFlags, env: GlobalEnv, ctx: Sequence, t: Term, fuel: Fuel | int | None = None) -> Term:
    fuel = as_fuel(fuel)
    stack: list[Frame] = []
    while True:
        fuel.tick()
        match t:
            case App(f, a):
                stack.append(AppArg(a))
                t = f
                continue
            case Rel(n) if flags.delta:
                body = lookup_local_def(ctx, n)
                if body is not None:
                    t = body
                    continue
            case LetIn(_, v, _, b) if flags.zeta:
                t = subst1(v, b)
                continue
            case Lambda(_, _, b) if flags.beta and stack and isinstance(stack[-1], AppArg):
                t = subst1(stack.pop().arg, b)
                continue
            case Const(c) if flags.delta:
                body = constant_body(env, c)
                if body is not None:
                    t = body
                    continue
            case Case(ci, p, scrut, brs) if flags.iota:
                stack.append(CaseFrame(ci, p, brs))
                t = scrut
                continue
            case Fix(defs, idx) if flags.fixp:
                rarg = defs[idx].rarg
                if len(stack) - _top_args(stack) > rarg:
                    before = tuple(stack.pop().arg for _ in range(rarg))
                    struct = stack.pop().arg
                    stack.append(FixFrame(defs, idx, before))
                    t = struct
                    continue

        # t is irreducible on its own; maybe the enclosing frame consumes it
        i = _top_args(stack)
        if i == 0 or not isinstance(t, Construct):
            return zip_stack(t, stack)
        args = [fr.arg for fr in reversed(stack[i:])]
        frame = stack[i - 1]
        if isinstance(frame, CaseFrame):
            br = iota_branch(env, frame.ci, t, args, frame.branches)
            if br is None:
                return zip_stack(t, stack)
            del stack[i - 1 :]
            t = br
        else:
            del stack[i - 1 :]
            struct = mk_apps(t, args)
            for a in reversed(list(frame.before) + [struct]):
                stack.append(AppArg(a))
            t = unfold_fix(frame.defs, frame.idx)


def iota_branch(env: GlobalEnv, ci: CaseInfo, head: Term, args: Sequence[Term], branches: Sequence[Branch]) -> Term | None:
    """Contract ``match C args with branches``; None if the shapes do not fit."""
    if not isinstance(head, Construct) or head.ind != ci.ind or head.idx >= len(branches):
        return None
    br = branches[head.idx]
    nargs = len(br.bcontext)
    if len(args) != ci.npars + nargs:
        return None
    real = list(args[ci.npars :])
    return subst(list(reversed(real)), 0, br.body)


def is_constructor_app(t: Term) -> bool:
    return isinstance(decompose_app(t)[0], Construct)


# -- one-step reducts ---------------------------------------------------------


def root_reducts(env: GlobalEnv, ctx: Sequence, t: Term) -> Iterator[Term]:
    match t:
        case App(Lambda(_, _, b), a):
            yield subst1(a, b)
        case LetIn(_, v, _, b):
            yield subst1(v, b)
        case Rel(n):
            body = lookup_local_def(ctx, n)
            if body is not None:
                yield body
        case Const(c):
            body = constant_body(env, c)
            if body is not None:
                yield body
        case Case(ci, _, scrut, brs):
            head, args = decompose_app(scrut)
            r = iota_branch(env, ci, head, args, brs)
            if r is not None:
                yield r
    if isinstance(t, App):
        head, args = decompose_app(t)
        if isinstance(head, Fix):
            rarg = head.defs[head.idx].rarg
            if len(args) == rarg + 1 and is_constructor_app(args[rarg]):
                yield mk_apps(unfold_fix(head.defs, head.idx), args)


def _context_reducts(env, ctx, decls) -> Iterator[tuple]:
    decls = tuple(decls)
    for i, d in enumerate(decls):
        inner = tuple(ctx) + decls[:i]
        if isinstance(d, LocalDef):
            for b in reducts(env, inner, d.body):
                yield decls[:i] + (LocalDef(d.name, b, d.ty),) + decls[i + 1 :]
            for ty in reducts(env, inner, d.ty):
                yield decls[:i] + (LocalDef(d.name, d.body, ty),) + decls[i + 1 :]
        else:
            for ty in reducts(env, inner, d.ty):
                yield decls[:i] + (Assum(d.name, ty),) + decls[i + 1 :]


def _congruence(env: GlobalEnv, ctx: tuple, t: Term) -> Iterator[Term]:
    match t:
        case Prod(na, a, b):
            yield from (Prod(na, x, b) for x in reducts(env, ctx, a))
            yield from (Prod(na, a, x) for x in reducts(env, ctx + (Assum(na, a),), b))
        case Lambda(na, a, b):
            yield from (Lambda(na, x, b) for x in reducts(env, ctx, a))
            yield from (Lambda(na, a, x) for x in reducts(env, ctx + (Assum(na, a),), b))
        case LetIn(na, v, ty, b):
            yield from (LetIn(na, x, ty, b) for x in reducts(env, ctx, v))
            yield from (LetIn(na, v, x, b) for x in reducts(env, ctx, ty))
            yield from (LetIn(na, v, ty, x) for x in reducts(env, ctx + (LocalDef(na, v, ty),), b))
        case App(f, a):
            yield from (App(x, a) for x in reducts(env, ctx, f))
            yield from (App(f, x) for x in reducts(env, ctx, a))
        case Case(ci, p, scrut, brs):
            for i, par in enumerate(p.params):
                for x in reducts(env, ctx, par):
                    params = p.params[:i] + (x,) + p.params[i + 1 :]
                    yield Case(ci, Predicate(params, p.pcontext, p.preturn), scrut, brs)
            for pc in _context_reducts(env, ctx, p.pcontext):
                yield Case(ci, Predicate(p.params, pc, p.preturn), scrut, brs)
            for x in reducts(env, ctx + p.pcontext, p.preturn):
                yield Case(ci, Predicate(p.params, p.pcontext, x), scrut, brs)
            for x in reducts(env, ctx, scrut):
                yield Case(ci, p, x, brs)
            for i, br in enumerate(brs):
                for bc in _context_reducts(env, ctx, br.bcontext):
                    yield Case(ci, p, scrut, brs[:i] + (Branch(bc, br.body),) + brs[i + 1 :])
                for x in reducts(env, ctx + br.bcontext, br.body):
                    yield Case(ci, p, scrut, brs[:i] + (Branch(br.bcontext, x),) + brs[i + 1 :])
        case Fix(defs, idx):
            fix_ctx = ctx + fix_context(defs)
            for i, d in enumerate(defs):
                for x in reducts(env, ctx, d.ty):
                    yield Fix(defs[:i] + (FixDef(d.name, x, d.body, d.rarg),) + defs[i + 1 :], idx)
                for x in reducts(env, fix_ctx, d.body):
                    yield Fix(defs[:i] + (FixDef(d.name, d.ty, x, d.rarg),) + defs[i + 1 :], idx)


def fix_context(defs: Sequence[FixDef]) -> tuple:
    """Binders of a fixpoint block, each type lifted over the previous ones."""
    return tuple(Assum(d.name, lift(i, 0, d.ty)) for i, d in enumerate(defs))


def reducts(env: GlobalEnv, ctx: Sequence, t: Term) -> list[Term]:
    """All one-step reducts of ``t`` in ``ctx`` (root rules and congruences), deduplicated."""
    ctx = tuple(ctx)
    out = dict.fromkeys(root_reducts(env, ctx, t))
    for u in _congruence(env, ctx, t):
        out.setdefault(u)
    return list(out)


# -- weak call-by-value -------------------------------------------------------


def cbv_eval(env: GlobalEnv, t: Term, fuel: Fuel | int | None = None) -> Term:
    """Evaluate a closed term to a weak value."""
    fuel = as_fuel(fuel)

    def ev(t: Term) -> Term:
        fuel.tick()
        match t:
            case Sort() | Prod() | Lambda() | Ind() | Construct() | Fix():
                return t
            case Rel():
                raise Stuck("free variable during evaluation", t)
            case LetIn(_, v, _, b):
                return ev(subst1(ev(v), b))
            case App(f, a):
                fv = ev(f)
                return apply(fv, ev(a))
            case Const(c):
                body = constant_body(env, c)
                if body is None:
                    raise Stuck(f"cannot evaluate axiom {c}", t)
                return ev(body)
            case Case(ci, _, scrut, brs):
                v = ev(scrut)
                head, args = decompose_app(v)
                r = iota_branch(env, ci, head, args, brs)
                if r is None:
                    raise Stuck("match on a non-constructor value", t)
                return ev(r)
        raise Stuck("unknown term", t)

    def apply(f: Term, a: Term) -> Term:
        head, args = decompose_app(f)
        match head:
            case Lambda(_, _, b) if not args:
                return ev(subst1(a, b))
            case Construct() | Ind():
                return App(f, a)
            case Fix(defs, idx):
                rarg = defs[idx].rarg
                args = args + [a]
                if len(args) <= rarg:
                    return App(f, a)
                if not is_constructor_app(args[rarg]):
                    raise Stuck("fixpoint applied to a non-constructor", App(f, a))
                fn = ev(unfold_fix(defs, idx))
                for x in args:
                    fn = apply(fn, x)
                return fn
        raise Stuck("application of a non-function", App(f, a))

    return ev(t)


def ctor_args(env: GlobalEnv, v: Term) -> tuple[Construct, list[Term], list[Term]] | None:
    """Split a constructor value into (head, params, real args)."""
    head, args = decompose_app(v)
    if not isinstance(head, Construct):
        return None
    mib, _ = lookup_inductive(env, head.ind)
    return head, args[: mib.npars], args[mib.npars :]
