"""Erasure to the untyped lambda-box calculus, its optimizations, and a CBV evaluator."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from .checker import Checker, CheckedEnv
from .env import MutualInductiveBody
from .errors import AxiomNotComputational, Stuck, UndeclaredConstant
from .reduction import ALL, Fuel, as_fuel, fix_context, whnf
from .term import (
    App,
    Assum,
    Case,
    Const,
    Construct,
    Fix,
    IndRef,
    Lambda,
    LetIn,
    LocalDef,
    Prod,
    Rel,
    Sort,
    Term,
    decompose_app,
)
from .universes import Prop

log = logging.getLogger(__name__)


# -- the target language -------------------------------------------------------


class ETerm:
    __slots__ = ()


@dataclass(frozen=True)
class EBox(ETerm):
    pass


BOX = EBox()


@dataclass(frozen=True)
class ERel(ETerm):
    index: int


@dataclass(frozen=True)
class ELam(ETerm):
    body: ETerm
    name: str = field(default="x", compare=False)


@dataclass(frozen=True)
class ELet(ETerm):
    val: ETerm
    body: ETerm
    name: str = field(default="x", compare=False)


@dataclass(frozen=True)
class EApp(ETerm):
    fn: ETerm
    arg: ETerm


@dataclass(frozen=True)
class EConst(ETerm):
    name: str


@dataclass(frozen=True)
class EConstruct(ETerm):
    ind: IndRef
    idx: int


@dataclass(frozen=True)
class EBranch:
    arity: int
    body: ETerm


@dataclass(frozen=True)
class ECase(ETerm):
    ind: IndRef
    scrut: ETerm
    branches: tuple


@dataclass(frozen=True)
class EFixDef:
    body: ETerm
    rarg: int
    name: str = field(default="f", compare=False)


@dataclass(frozen=True)
class EFix(ETerm):
    defs: tuple
    idx: int


@dataclass(frozen=True)
class EConstantBody:
    body: ETerm | None  # None for an axiom with computational content


@dataclass(frozen=True)
class EInductiveShape:
    """Names and constructor arities of each body of an inductive block."""

    names: tuple
    arities: tuple


@dataclass(frozen=True)
class EEnv:
    decls: tuple = ()

    def lookup(self, name: str):
        for n, d in self.decls:
            if n == name:
                return d
        return None

    def names(self) -> list[str]:
        return [n for n, _ in self.decls]


# -- erasure -------------------------------------------------------------------


class Eraser:
    def __init__(self, E: CheckedEnv, fuel: Fuel):
        self.E = E
        self.c = Checker(E, fuel)

    def is_arity(self, ctx: tuple, ty: Term) -> bool:
        while True:
            ty = whnf(ALL, self.E.env, ctx, ty, self.c.fuel)
            if isinstance(ty, Sort):
                return True
            if not isinstance(ty, Prod):
                return False
            ctx = ctx + (Assum(ty.name, ty.dom),)
            ty = ty.cod

    def is_erasable(self, ctx: tuple, t: Term) -> bool:
        ty = self.c.infer(ctx, t)
        if self.is_arity(ctx, ty):
            return True
        return isinstance(self.c.infer_sort(ctx, ty), Prop)

    def erase(self, ctx: tuple, t: Term) -> ETerm:
        if self.is_erasable(ctx, t):
            return BOX
        match t:
            case Rel(n):
                return ERel(n)
            case Lambda(na, a, b):
                return ELam(self.erase(ctx + (Assum(na, a),), b), na)
            case LetIn(na, v, ty, b):
                return ELet(self.erase(ctx, v), self.erase(ctx + (LocalDef(na, v, ty),), b), na)
            case App(f, a):
                return EApp(self.erase(ctx, f), self.erase(ctx, a))
            case Const(c):
                return EConst(c)
            case Construct(ind, k):
                return EConstruct(ind, k)
            case Case(ci, _, scrut, brs):
                return ECase(
                    ci.ind,
                    self.erase(ctx, scrut),
                    tuple(EBranch(len(b.bcontext), self.erase(ctx + b.bcontext, b.body)) for b in brs),
                )
            case Fix(defs, idx):
                fctx = ctx + fix_context(defs)
                return EFix(tuple(EFixDef(self.erase(fctx, d.body), d.rarg, d.name) for d in defs), idx)
        # sorts, products and inductive types are always erasable
        raise Stuck("cannot erase", t)


def is_erasable(E: CheckedEnv, ctx: Sequence, t: Term, fuel: Fuel | int | None = None) -> bool:
    return Eraser(E, as_fuel(fuel)).is_erasable(tuple(ctx), t)


def erase_term(E: CheckedEnv, ctx: Sequence, t: Term, fuel: Fuel | int | None = None) -> ETerm:
    return Eraser(E, as_fuel(fuel)).erase(tuple(ctx), t)


def erase_env(E: CheckedEnv, fuel: int | None = None) -> EEnv:
    out = []
    for pos, (name, decl) in enumerate(E.env.decls):
        prefix = CheckedEnv(E.env.prefix(pos), E.graph, E.guard, E._elim)
        er = Eraser(prefix, as_fuel(fuel))
        if isinstance(decl, MutualInductiveBody):
            shape = EInductiveShape(
                tuple(b.name for b in decl.bodies),
                tuple(tuple(cb.arity for cb in b.ctors) for b in decl.bodies),
            )
            out.append((name, shape))
            continue
        erasable_type = er.is_arity((), decl.ty) or isinstance(er.c.infer_sort((), decl.ty), Prop)
        if erasable_type:
            out.append((name, EConstantBody(BOX)))
        elif decl.body is None:
            out.append((name, EConstantBody(None)))
        else:
            out.append((name, EConstantBody(er.erase((), decl.body))))
    return EEnv(tuple(out))


# -- binding operations on erased terms -----------------------------------------


def emap(f, t: ETerm, k: int) -> ETerm:
    match t:
        case ELam(b, na):
            return ELam(f(b, k + 1), na)
        case ELet(v, b, na):
            return ELet(f(v, k), f(b, k + 1), na)
        case EApp(fn, a):
            return EApp(f(fn, k), f(a, k))
        case ECase(ind, s, brs):
            return ECase(ind, f(s, k), tuple(EBranch(b.arity, f(b.body, k + b.arity)) for b in brs))
        case EFix(defs, idx):
            n = len(defs)
            return EFix(tuple(EFixDef(f(d.body, k + n), d.rarg, d.name) for d in defs), idx)
    return t


def esubst(s: Sequence[ETerm], k: int, t: ETerm) -> ETerm:
    """Substitution for closed replacement terms (all we need: boxes)."""
    n = len(s)

    def go(t, d):
        if isinstance(t, ERel):
            if t.index < d:
                return t
            if t.index < d + n:
                return s[t.index - d]
            return ERel(t.index - n)
        return emap(go, t, d)

    return go(t, k)


def references(t: ETerm) -> set[str]:
    out: set[str] = set()

    def go(t, k):
        match t:
            case EConst(c):
                out.add(c)
            case EConstruct(ind, _):
                out.add(ind.mind)
            case ECase(ind, _, _):
                out.add(ind.mind)
        return emap(go, t, k)

    go(t, 0)
    return out


# -- optimizations -------------------------------------------------------------


def prune_env(env: EEnv, root: str | Sequence[str]) -> EEnv:
    roots = [root] if isinstance(root, str) else list(root)
    for r in roots:
        if env.lookup(r) is None:
            raise UndeclaredConstant(f"unknown declaration {r}")
    keep = set()
    todo = list(roots)
    while todo:
        n = todo.pop()
        if n in keep:
            continue
        keep.add(n)
        d = env.lookup(n)
        if isinstance(d, EConstantBody) and d.body is not None:
            todo.extend(references(d.body))
    return EEnv(tuple((n, d) for n, d in env.decls if n in keep))


def remove_box_matches(t: ETerm) -> ETerm:
    """One bottom-up pass replacing matches on boxes by their single branch."""

    def go(t, k):
        t = emap(go, t, k)
        if isinstance(t, ECase) and t.scrut == BOX:
            if len(t.branches) == 1:
                br = t.branches[0]
                return esubst([BOX] * br.arity, 0, br.body)
            log.warning("match on a box with %d branches left in place", len(t.branches))
        return t

    return go(t, 0)


def optimize_term(t: ETerm) -> ETerm:
    while True:
        t2 = remove_box_matches(t)
        if t2 == t:
            return t
        t = t2


def optimize_boxes(env: EEnv) -> EEnv:
    out = []
    for n, d in env.decls:
        if isinstance(d, EConstantBody) and d.body is not None:
            d = EConstantBody(optimize_term(d.body))
        out.append((n, d))
    return EEnv(tuple(out))


# -- evaluation ----------------------------------------------------------------


class EValue:
    __slots__ = ()


@dataclass(frozen=True)
class VBox(EValue):
    def __str__(self) -> str:
        return "box"


@dataclass(frozen=True)
class VCtor(EValue):
    ind: IndRef
    idx: int
    args: tuple = ()


@dataclass(frozen=True)
class VClosure(EValue):
    body: ETerm
    env: tuple


@dataclass(frozen=True)
class VFix(EValue):
    defs: tuple
    idx: int
    env: tuple
    args: tuple = ()


VBOX = VBox()


def eval_erased(env: EEnv, t: ETerm, fuel: Fuel | int | None = None) -> EValue:
    fuel = as_fuel(fuel)
    consts: dict[str, EValue] = {}

    def ev(t: ETerm, rho: tuple) -> EValue:
        fuel.tick()
        match t:
            case EBox():
                return VBOX
            case ERel(n):
                if n >= len(rho):
                    raise Stuck(f"free variable #{n}")
                return rho[-1 - n]
            case ELam(b):
                return VClosure(b, rho)
            case ELet(v, b):
                return ev(b, rho + (ev(v, rho),))
            case EApp(f, a):
                fv = ev(f, rho)
                return apply(fv, ev(a, rho))
            case EConst(c):
                if c not in consts:
                    d = env.lookup(c)
                    if not isinstance(d, EConstantBody):
                        raise Stuck(f"unknown constant {c}")
                    if d.body is None:
                        raise AxiomNotComputational(f"axiom {c} has no computational content")
                    consts[c] = ev(d.body, ())
                return consts[c]
            case EConstruct(ind, k):
                return VCtor(ind, k)
            case ECase(_, s, brs):
                v = ev(s, rho)
                if isinstance(v, VBox):
                    if len(brs) != 1:
                        raise Stuck("match on a box with several branches")
                    br = brs[0]
                    return ev(br.body, rho + (VBOX,) * br.arity)
                if not isinstance(v, VCtor) or v.idx >= len(brs):
                    raise Stuck("match on a non-constructor value")
                br = brs[v.idx]
                if len(v.args) < br.arity:
                    raise Stuck("match on a partially applied constructor")
                real = v.args[len(v.args) - br.arity :] if br.arity else ()
                return ev(br.body, rho + real)
            case EFix(defs, idx):
                return VFix(defs, idx, rho)
        raise Stuck(f"not an erased term: {t!r}")

    def apply(f: EValue, a: EValue) -> EValue:
        fuel.tick()
        match f:
            case VBox():
                return VBOX
            case VClosure(b, rho):
                return ev(b, rho + (a,))
            case VCtor(ind, k, args):
                return VCtor(ind, k, args + (a,))
            case VFix(defs, idx, rho, args):
                args = args + (a,)
                rarg = defs[idx].rarg
                if len(args) <= rarg:
                    return VFix(defs, idx, rho, args)
                if not isinstance(args[rarg], (VCtor, VBox)):
                    raise Stuck("fixpoint applied to a non-constructor")
                inner = rho + tuple(VFix(defs, j, rho) for j in range(len(defs)))
                fn = ev(defs[idx].body, inner)
                for x in args:
                    fn = apply(fn, x)
                return fn
        raise Stuck("application of a non-function")

    return ev(t, ())


def observe_eq(E: CheckedEnv, v: Term, v2: EValue, fuel: Fuel | int | None = None) -> bool:
    """Does the erased value ``v2`` have the observable shape of the source value ``v``?"""
    er = Eraser(E, as_fuel(fuel))

    def obs(v: Term, v2: EValue) -> bool:
        if er.is_erasable((), v):
            return isinstance(v2, VBox)
        head, args = decompose_app(v)
        if isinstance(head, Construct):
            return (
                isinstance(v2, VCtor)
                and (v2.ind, v2.idx) == (head.ind, head.idx)
                and len(v2.args) == len(args)
                and all(obs(a, b) for a, b in zip(args, v2.args))
            )
        return isinstance(v2, (VClosure, VFix))

    return obs(v, v2)


def is_box_free(v: EValue) -> bool:
    if isinstance(v, VBox):
        return False
    if isinstance(v, VCtor):
        return all(is_box_free(a) for a in v.args)
    return True


# -- s-expressions -------------------------------------------------------------


def _ind_name(env: EEnv | None, ind: IndRef) -> str:
    if env is not None:
        d = env.lookup(ind.mind)
        if isinstance(d, EInductiveShape) and ind.idx < len(d.names):
            return d.names[ind.idx]
    return ind.mind if ind.idx == 0 else f"{ind.mind}/{ind.idx}"


def emit(t: ETerm, env: EEnv | None = None) -> str:
    head, args = t, []
    while isinstance(head, EApp):
        args.append(head.arg)
        head = head.fn
    args.reverse()
    if isinstance(head, EConstruct):
        parts = ["construct", _ind_name(env, head.ind), str(head.idx)] + [emit(a, env) for a in args]
        return "(" + " ".join(parts) + ")"
    match t:
        case EBox():
            return "box"
        case ERel(n):
            return f"(rel {n})"
        case ELam(b):
            return f"(lam {emit(b, env)})"
        case ELet(v, b):
            return f"(let {emit(v, env)} {emit(b, env)})"
        case EApp(f, a):
            return f"(app {emit(f, env)} {emit(a, env)})"
        case EConst(c):
            return c
        case ECase(_, s, brs):
            inner = " ".join(f"({b.arity} {emit(b.body, env)})" for b in brs)
            return f"(case {emit(s, env)}{' ' + inner if inner else ''})"
        case EFix(defs, idx):
            inner = " ".join(f"(def {d.rarg} {emit(d.body, env)})" for d in defs)
            return f"(fix {idx} {inner})"
    raise TypeError(f"not an erased term: {t!r}")


def emit_value(v: EValue, env: EEnv | None = None) -> str:
    match v:
        case VBox():
            return "box"
        case VCtor(ind, k, args):
            return "(" + " ".join(["construct", _ind_name(env, ind), str(k)] + [emit_value(a, env) for a in args]) + ")"
        case VClosure() | VFix():
            return "<closure>"
    raise TypeError(f"not a value: {v!r}")


def emit_env(env: EEnv) -> str:
    lines = []
    for n, d in env.decls:
        if isinstance(d, EInductiveShape):
            ar = " ".join("(" + " ".join(map(str, a)) + ")" for a in d.arities)
            lines.append(f"(inductive {n} {ar})")
        elif d.body is None:
            lines.append(f"(axiom {n})")
        else:
            lines.append(f"(define {n} {emit(d.body, env)})")
    return "\n".join(lines) + "\n"
