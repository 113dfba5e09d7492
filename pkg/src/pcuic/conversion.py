"""Alpha-cumulativity and the conversion/cumulativity algorithm.

Terms are reduced to weak-head normal form *without* delta, heads are
compared, and the algorithm recurses on subterms.  Constants are unfolded
lazily: with the same constant on both sides the arguments are compared
first and unfolding only happens if that fails.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .env import GlobalEnv
from .errors import OutOfFuel
from .reduction import ALL, NO_DELTA, Fuel, as_fuel, constant_body, fix_context, lookup_local_def, whnf
from .term import (
    App,
    Assum,
    Case,
    Const,
    Construct,
    Fix,
    Ind,
    Lambda,
    LetIn,
    LocalDef,
    Prod,
    Rel,
    Sort,
    Term,
    decompose_app,
    mk_apps,
)
from .universes import Prop, SortValue, UGraph, eq_universe, leq_universe


class ConvMode(Enum):
    CONV = "conv"
    CUMUL = "cumul"


CONV = ConvMode.CONV
CUMUL = ConvMode.CUMUL


@dataclass(frozen=True)
class ConvError:
    t: Term
    u: Term
    reason: str

    def __str__(self) -> str:
        return self.reason


@dataclass(frozen=True)
class ConvResult:
    error: ConvError | None = None
    out_of_fuel: bool = False

    @property
    def ok(self) -> bool:
        return self.error is None and not self.out_of_fuel

    def __bool__(self) -> bool:
        return self.ok


def compare_sort(g: UGraph, mode: ConvMode, s: SortValue, s2: SortValue) -> bool:
    if isinstance(s, Prop) or isinstance(s2, Prop):
        if isinstance(s, Prop) and isinstance(s2, Prop):
            return True
        # Prop <= Type u, never the other way round
        return mode is CUMUL and isinstance(s, Prop)
    if mode is CUMUL:
        return leq_universe(g, s.u, s2.u)
    return eq_universe(g, s.u, s2.u)


def compare_alpha(g: UGraph, mode: ConvMode, t: Term, u: Term) -> bool:
    """Syntactic comparison up to names, sorts compared with the universe preorder."""
    if t is u:
        return True
    match t, u:
        case Sort(s), Sort(s2):
            return compare_sort(g, mode, s, s2)
        case Prod(_, a, b), Prod(_, a2, b2):
            return compare_alpha(g, CONV, a, a2) and compare_alpha(g, mode, b, b2)
        case Lambda(_, a, b), Lambda(_, a2, b2):
            return compare_alpha(g, CONV, a, a2) and compare_alpha(g, mode, b, b2)
        case LetIn(_, v, ty, b), LetIn(_, v2, ty2, b2):
            return (
                compare_alpha(g, CONV, v, v2)
                and compare_alpha(g, CONV, ty, ty2)
                and compare_alpha(g, mode, b, b2)
            )
        case App(f, a), App(f2, a2):
            return compare_alpha(g, mode, f, f2) and compare_alpha(g, CONV, a, a2)
        case Case(ci, p, s, brs), Case(ci2, p2, s2, brs2):
            return (
                ci == ci2
                and len(brs) == len(brs2)
                and _alpha_all(g, p.params, p2.params)
                and _alpha_ctx(g, p.pcontext, p2.pcontext)
                and compare_alpha(g, CONV, p.preturn, p2.preturn)
                and compare_alpha(g, CONV, s, s2)
                and all(
                    _alpha_ctx(g, b.bcontext, b2.bcontext) and compare_alpha(g, CONV, b.body, b2.body)
                    for b, b2 in zip(brs, brs2)
                )
            )
        case Fix(defs, idx), Fix(defs2, idx2):
            return (
                idx == idx2
                and len(defs) == len(defs2)
                and all(
                    d.rarg == d2.rarg
                    and compare_alpha(g, CONV, d.ty, d2.ty)
                    and compare_alpha(g, CONV, d.body, d2.body)
                    for d, d2 in zip(defs, defs2)
                )
            )
    return t == u


def _alpha_all(g, ts, us) -> bool:
    return len(ts) == len(us) and all(compare_alpha(g, CONV, a, b) for a, b in zip(ts, us))


def _alpha_ctx(g, ctx, ctx2) -> bool:
    if len(ctx) != len(ctx2):
        return False
    for d, d2 in zip(ctx, ctx2):
        if type(d) is not type(d2) or not compare_alpha(g, CONV, d.ty, d2.ty):
            return False
        if isinstance(d, LocalDef) and not compare_alpha(g, CONV, d.body, d2.body):
            return False
    return True


class Converter:
    """One conversion problem; all recursive calls share the fuel budget."""

    def __init__(self, g: UGraph, env: GlobalEnv, fuel: Fuel, trace: list | None = None):
        self.g = g
        self.env = env
        self.fuel = fuel
        self.trace = trace

    def _log(self, *event) -> None:
        if self.trace is not None:
            self.trace.append(event)

    def conv(self, ctx: tuple, mode: ConvMode, t: Term, u: Term) -> ConvError | None:
        self.fuel.tick()
        if compare_alpha(self.g, mode, t, u):
            return None
        t = whnf(NO_DELTA, self.env, ctx, t, self.fuel)
        u = whnf(NO_DELTA, self.env, ctx, u, self.fuel)
        return self.conv_whnf(ctx, mode, t, u)

    # -- unfolding ----------------------------------------------------------

    def _unfoldable(self, ctx, head: Term) -> tuple[int, Term] | None:
        """(priority, body) for a delta-reducible head; local definitions win."""
        if isinstance(head, Const):
            body = constant_body(self.env, head.name)
            if body is not None:
                return self.env.position(head.name), body
        elif isinstance(head, Rel):
            body = lookup_local_def(ctx, head.index)
            if body is not None:
                return 1 << 30, body
        return None

    def _unfold(self, ctx, head, args, body) -> Term:
        self._log("unfold", _head_name(head))
        return whnf(NO_DELTA, self.env, ctx, mk_apps(body, args), self.fuel)

    def conv_whnf(self, ctx: tuple, mode: ConvMode, t: Term, u: Term) -> ConvError | None:
        self.fuel.tick()
        if compare_alpha(self.g, mode, t, u):
            return None
        ht, at = decompose_app(t)
        hu, au = decompose_app(u)
        ut = self._unfoldable(ctx, ht)
        uu = self._unfoldable(ctx, hu)

        if ut is not None and uu is not None and ht == hu:
            if len(at) == len(au) and self.conv_args(ctx, at, au) is None:
                self._log("args-first", _head_name(ht))
                return None
            return self.conv_whnf(
                ctx, mode, self._unfold(ctx, ht, at, ut[1]), self._unfold(ctx, hu, au, uu[1])
            )
        if ut is not None and (uu is None or ut[0] >= uu[0]):
            return self.conv_whnf(ctx, mode, self._unfold(ctx, ht, at, ut[1]), u)
        if uu is not None:
            return self.conv_whnf(ctx, mode, t, self._unfold(ctx, hu, au, uu[1]))

        err = self.conv_heads(ctx, mode, t, u, ht, at, hu, au)
        if err is None:
            return None
        # last resort: heads may be stuck on a constant hidden in a match or fixpoint argument
        t2 = whnf(ALL, self.env, ctx, t, self.fuel)
        u2 = whnf(ALL, self.env, ctx, u, self.fuel)
        if t2 != t or u2 != u:
            return self.conv_whnf(ctx, mode, t2, u2)
        return err

    def conv_args(self, ctx, at: Sequence[Term], au: Sequence[Term]) -> ConvError | None:
        if len(at) != len(au):
            return ConvError(mk_apps(Rel(0), at), mk_apps(Rel(0), au), "argument count mismatch")
        for a, b in zip(at, au):
            err = self.conv(ctx, CONV, a, b)
            if err is not None:
                return err
        return None

    def conv_ctx(self, ctx, ds, ds2) -> ConvError | None:
        ctx = tuple(ctx)
        for d, d2 in zip(ds, ds2):
            err = self.conv(ctx, CONV, d.ty, d2.ty)
            if err is None and isinstance(d, LocalDef) and isinstance(d2, LocalDef):
                err = self.conv(ctx, CONV, d.body, d2.body)
            if err is not None:
                return err
            ctx = ctx + (d,)
        return None

    def conv_heads(self, ctx, mode, t, u, ht, at, hu, au) -> ConvError | None:
        mismatch = ConvError(t, u, "head mismatch")
        match ht, hu:
            case Sort(s), Sort(s2) if not at and not au:
                if compare_sort(self.g, mode, s, s2):
                    return None
                return ConvError(t, u, f"universe mismatch: {s} vs {s2}")
            case Prod(na, a, b), Prod(_, a2, b2) if not at and not au:
                return self.conv(ctx, CONV, a, a2) or self.conv(ctx + (Assum(na, a),), mode, b, b2)
            case Lambda(na, a, b), Lambda(_, a2, b2) if not at and not au:
                return self.conv(ctx, CONV, a, a2) or self.conv(ctx + (Assum(na, a),), mode, b, b2)
            case (Rel(), Rel()) | (Ind(), Ind()) | (Construct(), Construct()) | (Const(), Const()):
                if ht != hu:
                    return mismatch
                return self.conv_args(ctx, at, au)
            case Case(ci, p, s, brs), Case(ci2, p2, s2, brs2):
                if ci != ci2 or len(brs) != len(brs2) or len(p.params) != len(p2.params):
                    return mismatch
                if len(p.pcontext) != len(p2.pcontext):
                    return mismatch
                for x, y in zip(p.params, p2.params):
                    err = self.conv(ctx, CONV, x, y)
                    if err is not None:
                        return err
                err = self.conv_ctx(ctx, p.pcontext, p2.pcontext) or self.conv(
                    ctx + p.pcontext, CONV, p.preturn, p2.preturn
                ) or self.conv(ctx, CONV, s, s2)
                if err is not None:
                    return err
                for b, b2 in zip(brs, brs2):
                    if len(b.bcontext) != len(b2.bcontext):
                        return mismatch
                    err = self.conv_ctx(ctx, b.bcontext, b2.bcontext) or self.conv(
                        ctx + b.bcontext, CONV, b.body, b2.body
                    )
                    if err is not None:
                        return err
                return self.conv_args(ctx, at, au)
            case Fix(defs, idx), Fix(defs2, idx2):
                if idx != idx2 or len(defs) != len(defs2):
                    return mismatch
                fctx = ctx + fix_context(defs)
                for d, d2 in zip(defs, defs2):
                    if d.rarg != d2.rarg:
                        return mismatch
                    err = self.conv(ctx, CONV, d.ty, d2.ty) or self.conv(fctx, CONV, d.body, d2.body)
                    if err is not None:
                        return err
                return self.conv_args(ctx, at, au)
        return mismatch


def _head_name(h: Term) -> str:
    if isinstance(h, Const):
        return h.name
    if isinstance(h, Rel):
        return f"#{h.index}"
    return type(h).__name__


def isconv(
    g: UGraph,
    env: GlobalEnv,
    ctx: Sequence,
    mode: ConvMode,
    t: Term,
    u: Term,
    fuel: Fuel | int | None = None,
    trace: list | None = None,
) -> ConvResult:
    fuel = as_fuel(fuel)
    try:
        err = Converter(g, env, fuel, trace).conv(tuple(ctx), mode, t, u)
    except OutOfFuel:
        return ConvResult(out_of_fuel=True)
    return ConvResult(err)
