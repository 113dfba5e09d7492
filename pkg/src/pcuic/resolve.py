"""Name resolution: surface declarations to a de Bruijn global environment."""

from __future__ import annotations

from dataclasses import dataclass, field

from .checker import branch_context, predicate_context
from .env import ConstantBody, ConstructorBody, GlobalEnv, MutualInductiveBody, OneInductiveBody, lookup_inductive
from .errors import DuplicateName, IllFormedCase, IllFormedInductive, ParseError, UnboundName
from .syntax import (
    DAxiom,
    DConstraint,
    DDef,
    DInductive,
    DUniverse,
    SApp,
    SBinder,
    SFix,
    SLam,
    SLet,
    SMatch,
    SPi,
    SSort,
    STerm,
    SVar,
    SurfaceDecl,
    parse,
    parse_term,
)
from .term import (
    Assum,
    Branch,
    Case,
    CaseInfo,
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
    ctx_rels,
    decompose_app,
    mk_apps,
)
from .universes import Constraint, Level, UnivExpr


@dataclass
class Program:
    """A resolved source file."""

    env: GlobalEnv
    roots: list[str] = field(default_factory=list)
    spans: dict = field(default_factory=dict)


class Resolver:
    def __init__(self, env: GlobalEnv, extra: dict | None = None):
        self.env = env
        # names bound while resolving an inductive block's constructors
        self.extra = extra or {}

    def lookup(self, scope: list[str], name: str, span) -> Term:
        if name != "_":
            for i in range(len(scope) - 1, -1, -1):
                if scope[i] == name:
                    return Rel(len(scope) - 1 - i)
            if name in self.extra:
                return self.extra[name]
            ref = self.env.global_ref(name)
            if ref is not None:
                return ref
        raise UnboundName(f"unbound name {name}", span)

    def term(self, scope: list[str], t: STerm) -> Term:
        match t:
            case SVar(name):
                return self.lookup(scope, name, t.span)
            case SSort(s):
                return Sort(s)
            case SPi(bs, body):
                decls, inner = self.binders(scope, bs)
                out = self.term(inner, body)
                for d in reversed(decls):
                    out = Prod(d.name, d.ty, out)
                return out
            case SLam(bs, body):
                decls, inner = self.binders(scope, bs)
                out = self.term(inner, body)
                for d in reversed(decls):
                    out = Lambda(d.name, d.ty, out)
                return out
            case SLet(name, ty, val, body):
                return LetIn(name, self.term(scope, val), self.term(scope, ty), self.term(scope + [name], body))
            case SApp(fn, args):
                return mk_apps(self.term(scope, fn), [self.term(scope, a) for a in args])
            case SMatch():
                return self.match(scope, t)
            case SFix():
                return self.fix(scope, t)
        raise TypeError(f"not a surface term: {t!r}")

    def binders(self, scope: list[str], bs: list[SBinder]) -> tuple[list[Assum], list[str]]:
        decls, inner = [], list(scope)
        for b in bs:
            decls.append(Assum(b.name, self.term(inner, b.ty)))
            inner = inner + [b.name]
        return decls, inner

    def match(self, scope: list[str], t: SMatch) -> Term:
        if t.in_head is not None:
            ref = self.lookup([], t.in_head, t.span)
            if not isinstance(ref, Ind):
                raise ParseError(f"{t.in_head} is not an inductive type", t.span)
            ind = ref.ind
        elif t.branches:
            ref = self.lookup([], t.branches[0].ctor, t.branches[0].span)
            if not isinstance(ref, Construct):
                raise ParseError(f"{t.branches[0].ctor} is not a constructor", t.branches[0].span)
            ind = ref.ind
        else:
            raise ParseError("a match without branches needs an 'in' clause", t.span)
        mib, oib = lookup_inductive(self.env, ind)
        npars, nind = mib.npars, len(oib.indices)
        if len(t.in_items) != npars + nind:
            if t.in_head is not None or npars + nind:
                raise ParseError(
                    f"'in {oib.name}' expects {npars} parameters and {nind} indices", t.span
                )
        params = []
        for item in t.in_items[:npars]:
            if isinstance(item, SBinder):
                raise ParseError("parameters of a match are terms, not binders", item.span)
            params.append(self.term(scope, item))
        index_bs = []
        for item in t.in_items[npars:]:
            if isinstance(item, SVar):
                item = SBinder(item.name, None, item.span)
            if not isinstance(item, SBinder):
                raise ParseError("indices of a match are bound by names", t.span)
            index_bs.append(item)
        as_b = t.as_binder or SBinder("_", None, t.span)

        default = predicate_context(ind, mib, oib, params)
        pcontext, inner = self.annotated(scope, index_bs + [as_b], default)
        preturn = self.term(inner, t.ret)

        by_name = {cb.name: k for k, cb in enumerate(oib.ctors)}
        for br in t.branches:
            if br.ctor not in by_name:
                raise ParseError(f"{br.ctor} is not a constructor of {oib.name}", br.span)
        given = [by_name[br.ctor] for br in t.branches]
        order = list(t.branches)
        if sorted(given) == list(range(len(oib.ctors))):
            order = sorted(t.branches, key=lambda br: by_name[br.ctor])
        branches = []
        for br in order:
            cb = oib.ctors[by_name[br.ctor]]
            if len(br.binders) != cb.arity:
                raise IllFormedCase("branch-arity", message=f"{br.ctor} takes {cb.arity} arguments")
            bctx, inner = self.annotated(scope, br.binders, branch_context(mib, cb, params))
            branches.append(Branch(bctx, self.term(inner, br.body)))
        scrut = self.term(scope, t.scrut)
        return Case(CaseInfo(ind, npars), Predicate(tuple(params), pcontext, preturn), scrut, tuple(branches))

    def annotated(self, scope, bs: list[SBinder], default) -> tuple[tuple, list[str]]:
        decls, inner = [], list(scope)
        for b, d in zip(bs, default):
            ty = d.ty if b.ty is None else self.term(inner, b.ty)
            decls.append(Assum(b.name, ty))
            inner = inner + [b.name]
        return tuple(decls), inner

    def fix(self, scope: list[str], t: SFix) -> Term:
        names = [d.name for d in t.defs]
        defs = []
        for d in t.defs:
            ty = self.term(scope, SPi(d.binders, d.ty, d.span) if d.binders else d.ty)
            body = self.term(scope + names, SLam(d.binders, d.body, d.span) if d.binders else d.body)
            if isinstance(d.struct, int):
                rarg = d.struct
            else:
                pos = [i for i, b in enumerate(d.binders) if b.name == d.struct]
                if not pos:
                    raise ParseError(f"{d.struct} is not an argument of {d.name}", d.span)
                rarg = pos[-1]
            defs.append(FixDef(d.name, ty, body, rarg))
        idx = 0
        if t.target is not None:
            if t.target not in names:
                raise UnboundName(f"{t.target} is not defined in this fixpoint", t.span)
            idx = names.index(t.target)
        return Fix(tuple(defs), idx)

    # -- declarations ---------------------------------------------------------

    def inductive(self, d: DInductive) -> MutualInductiveBody:
        block = d.name
        params, pscope = self.binders([], d.params)
        npars = len(params)
        refs = {}
        for i, b in enumerate(d.bodies):
            if b.name in refs or b.name in self.env.names() or self.env.global_ref(b.name) is not None:
                raise DuplicateName(f"{b.name} is already declared", b.span)
            refs[b.name] = Ind(IndRef(block, i))
        bodies = []
        for i, b in enumerate(d.bodies):
            arity = self.term(pscope, b.arity)
            indices = []
            while isinstance(arity, Prod):
                indices.append(Assum(arity.name, arity.dom))
                arity = arity.cod
            if not isinstance(arity, Sort):
                raise IllFormedInductive("arity", message=f"the arity of {b.name} must end in a sort")
            sub = Resolver(self.env, {**self.extra, **refs})
            ctors = []
            for c in b.ctors:
                ty = sub.term(pscope, c.ty)
                args = []
                while isinstance(ty, (Prod, LetIn)):
                    if isinstance(ty, Prod):
                        args.append(Assum(ty.name, ty.dom))
                        ty = ty.cod
                    else:
                        args.append(LocalDef(ty.name, ty.val, ty.ty))
                        ty = ty.body
                head, cargs = decompose_app(ty)
                if head != Ind(IndRef(block, i)) or cargs[:npars] != ctx_rels(npars, len(args)):
                    raise IllFormedInductive(
                        "conclusion", message=f"{c.name} must build {b.name} applied to its parameters"
                    )
                ctors.append(ConstructorBody(c.name, tuple(args), tuple(cargs[npars:])))
            bodies.append(OneInductiveBody(b.name, tuple(indices), arity.s, tuple(ctors)))
        return MutualInductiveBody(tuple(params), tuple(bodies))


def resolve(decls: list[SurfaceDecl], env: GlobalEnv | None = None) -> Program:
    env = env or GlobalEnv()
    levels, constraints = set(env.levels), set(env.constraints)
    roots, spans = [], {}
    for d in decls:
        r = Resolver(env)
        match d:
            case DUniverse(names):
                for n in names:
                    if Level(n) in levels:
                        raise DuplicateName(f"universe {n} is already declared", d.span)
                    levels.add(Level(n))
                env = GlobalEnv(frozenset(levels), frozenset(constraints), env.decls)
                continue
            case DConstraint(l, op, rhs):
                match op:
                    case "<":
                        cs = [Constraint(UnivExpr(l.level, l.plus + 1), rhs)]
                    case "<=":
                        cs = [Constraint(l, rhs)]
                    case _:
                        cs = [Constraint(l, rhs), Constraint(rhs, l)]
                constraints.update(cs)
                env = GlobalEnv(frozenset(levels), frozenset(constraints), env.decls)
                continue
            case DAxiom(name, ty):
                decl = ConstantBody(r.term([], ty))
            case DDef(name, ty, body):
                decl = ConstantBody(r.term([], ty), r.term([], body))
            case DInductive():
                name = d.name
                decl = r.inductive(d)
        try:
            env = env.extend(name, decl)
        except DuplicateName as e:
            raise DuplicateName(e.message, d.span) from None
        roots.append(name)
        spans[name] = d.span
    return Program(env, roots, spans)


def load(src: str, env: GlobalEnv | None = None) -> Program:
    return resolve(parse(src), env)


def read_term(src: str, env: GlobalEnv, scope: list[str] | None = None) -> Term:
    return Resolver(env).term(list(scope or []), parse_term(src))
