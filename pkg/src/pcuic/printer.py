"""Pretty-printing terms and environments back to parseable source."""

from __future__ import annotations

from .checker import branch_context, predicate_context
from .env import ConstantBody, GlobalEnv, MutualInductiveBody, ctor_conclusion, lookup_inductive
from .syntax import KEYWORDS
from .term import (
    App,
    Case,
    Const,
    Construct,
    Fix,
    Ind,
    IndRef,
    Lambda,
    LetIn,
    Prod,
    Rel,
    Sort,
    Term,
    decompose_app,
    lift,
    mk_prods,
    occurs,
)
from .universes import LZero, Prop

TOP, ARROW_LHS, ARG = 0, 1, 2


def print_sort(s) -> str:
    if isinstance(s, Prop):
        return "Prop"
    es = s.u.sorted_exprs()
    if len(es) == 1 and es[0].level == LZero:
        return f"Type{es[0].plus}"
    if len(es) == 1:
        return f"Type({es[0]})"
    return "Type(max(" + ", ".join(map(str, es)) + "))"


class Printer:
    def __init__(self, env: GlobalEnv):
        self.env = env
        self.taken = set(KEYWORDS) | set(env._globals)

    def fresh(self, scope: list[str], name: str, used: bool = True) -> str:
        if not used and name in ("", "_"):
            return "_"
        base = name if name not in ("", "_") else "x"
        if base not in scope and base not in self.taken:
            return base
        i = 0
        while f"{base}{i}" in scope or f"{base}{i}" in self.taken:
            i += 1
        return f"{base}{i}"

    def var(self, scope: list[str], n: int) -> str:
        if n < len(scope):
            return scope[-1 - n]
        return f"#{n}"  # unprintable free variable; never produced for well-scoped input

    def paren(self, s: str, need: bool) -> str:
        return f"({s})" if need else s

    def term(self, scope: list[str], t: Term, prec: int = TOP) -> str:
        match t:
            case Rel(n):
                return self.var(scope, n)
            case Sort(s):
                return print_sort(s)
            case Const(c):
                return c
            case Ind(ind):
                return lookup_inductive(self.env, ind)[1].name
            case Construct(ind, k):
                return lookup_inductive(self.env, ind)[1].ctors[k].name
            case Prod(na, a, b):
                if not occurs(0, b):
                    x = self.fresh(scope, "_", used=False)
                    s = f"{self.term(scope, a, ARROW_LHS)} -> {self.term(scope + [x], b, TOP)}"
                    return self.paren(s, prec > TOP)
                binders, body, inner = self.telescope(scope, t, Prod)
                return self.paren(f"forall {binders}, {self.term(inner, body)}", prec > TOP)
            case Lambda():
                binders, body, inner = self.telescope(scope, t, Lambda)
                return self.paren(f"fun {binders} => {self.term(inner, body)}", prec > TOP)
            case LetIn(na, v, ty, b):
                x = self.fresh(scope, na, occurs(0, b))
                s = f"let {x} : {self.term(scope, ty)} := {self.term(scope, v)} in {self.term(scope + [x], b)}"
                return self.paren(s, prec > TOP)
            case App():
                head, args = decompose_app(t)
                parts = [self.term(scope, head, ARG)] + [self.term(scope, a, ARG) for a in args]
                return self.paren(" ".join(parts), prec > ARROW_LHS)
            case Case():
                return self.case(scope, t)
            case Fix():
                return self.paren(self.fix(scope, t), prec > TOP)
        raise TypeError(f"not a term: {t!r}")

    def telescope(self, scope, t, kind):
        parts, inner = [], list(scope)
        while isinstance(t, kind):
            body = t.cod if kind is Prod else t.body
            x = self.fresh(inner, t.name, occurs(0, body))
            parts.append(f"({x} : {self.term(inner, t.dom)})")
            inner = inner + [x]
            t = body
            if kind is Prod and isinstance(t, Prod) and not occurs(0, t.cod):
                break
        return " ".join(parts), t, inner

    def binder(self, inner, name, ty, default, used=True) -> tuple[str, str]:
        x = self.fresh(inner, name, used)
        if default is not None and ty == default:
            return x, x
        return x, f"({x} : {self.term(inner, ty)})"

    def case(self, scope: list[str], t: Case) -> str:
        mib, oib = lookup_inductive(self.env, t.ci.ind)
        p = t.pred
        default_p = (
            predicate_context(t.ci.ind, mib, oib, p.params)
            if len(p.params) == mib.npars
            else [None] * len(p.pcontext)
        )
        if len(default_p) != len(p.pcontext):
            default_p = [None] * len(p.pcontext)
        inner = list(scope)
        items = []
        m = len(p.pcontext)
        for j, (d, dd) in enumerate(zip(p.pcontext, default_p)):
            used = occurs(m - 1 - j, p.preturn)
            x, s = self.binder(inner, d.name, d.ty, dd.ty if dd is not None else None, used)
            items.append(s)
            inner = inner + [x]
        *index_items, as_item = items or ["_"]
        params = [self.term(scope, x, ARG) for x in p.params]
        head = " ".join([oib.name] + params + index_items)
        as_part = "" if as_item == "_" else f" as {as_item}"
        s = f"match {self.term(scope, t.scrut)}{as_part} in {head} return {self.term(inner, p.preturn)} with"
        for k, br in enumerate(t.branches):
            cb = oib.ctors[k] if k < len(oib.ctors) else None
            default_b = (
                branch_context(mib, cb, p.params)
                if cb is not None and len(br.bcontext) == cb.arity and len(p.params) == mib.npars
                else [None] * len(br.bcontext)
            )
            binner, pats = list(scope), []
            for j, (d, dd) in enumerate(zip(br.bcontext, default_b)):
                used = occurs(len(br.bcontext) - 1 - j, br.body)
                x, pat = self.binder(binner, d.name, d.ty, dd.ty if dd is not None else None, used)
                pats.append(pat)
                binner = binner + [x]
            name = cb.name if cb is not None else f"<branch {k}>"
            s += " | " + " ".join([name] + pats) + f" => {self.term(binner, br.body)}"
        return s + " end"

    def fix(self, scope: list[str], t: Fix) -> str:
        fnames, inner = [], list(scope)
        for d in t.defs:
            x = self.fresh(inner, d.name)
            fnames.append(x)
            inner = inner + [x]
        out = []
        for i, d in enumerate(t.defs):
            # print the longest prefix of matching product/lambda binders as arguments
            ty, body = d.ty, d.body
            tscope, bscope, parts = list(scope), list(inner), []
            n = len(t.defs)
            while isinstance(ty, Prod) and isinstance(body, Lambda) and lift(n, len(parts), ty.dom) == body.dom:
                x = self.fresh(bscope + tscope[len(scope):], body.name)
                parts.append((x, ty.dom, tscope))
                tscope = tscope + [x]
                bscope = bscope + [x]
                ty, body = ty.cod, body.body
            binders = " ".join(f"({x} : {self.term(sc, dom)})" for x, dom, sc in parts)
            struct = parts[d.rarg][0] if d.rarg < len(parts) else str(d.rarg)
            head = " ".join(filter(None, [fnames[i], binders]))
            out.append(f"{head} {{struct {struct}}} : {self.term(tscope, ty)} := {self.term(bscope, body)}")
        s = "fix " + " with ".join(out)
        if len(t.defs) > 1 or t.idx != 0:
            s += f" for {fnames[t.idx]}"
        return s


def print_term(t: Term, env: GlobalEnv | None = None, names: list[str] | None = None) -> str:
    return Printer(env or GlobalEnv()).term(list(names or []), t)


def print_decl(env: GlobalEnv, name: str) -> str:
    """Source text for declaration ``name``, printed against the environment before it."""
    pos = env.position(name)
    before = env.prefix(pos)
    decl = env.decls[pos][1]
    if isinstance(decl, ConstantBody):
        pr = Printer(before)
        if decl.body is None:
            return f"axiom {name} : {pr.term([], decl.ty)}."
        return f"def {name} : {pr.term([], decl.ty)} := {pr.term([], decl.body)}."
    return _print_inductive(env.prefix(pos + 1), decl)


def _print_inductive(env: GlobalEnv, mib: MutualInductiveBody) -> str:
    pr = Printer(env)
    scope, params = [], []
    for d in mib.params:
        x = pr.fresh(scope, d.name)
        params.append(f"({x} : {pr.term(scope, d.ty)})")
        scope.append(x)
    chunks = []
    for i, oib in enumerate(mib.bodies):
        arity = pr.term(scope, mk_prods(oib.indices, Sort(oib.sort)))
        ctors = []
        for cb in oib.ctors:
            ty = mk_prods(cb.args, ctor_conclusion(IndRef(mib.name, i), mib, cb))
            ctors.append(f"{cb.name} : {pr.term(scope, ty)}")
        head = oib.name if i else " ".join([oib.name] + params)
        chunks.append(f"{head} : {arity} :=" + "".join(f"\n  | {c}" for c in ctors))
    return "inductive " + "\nwith ".join(chunks) + "."


def print_env(env: GlobalEnv) -> str:
    lines = []
    levels = sorted(l.name for l in env.levels if not l.is_zero)
    if levels:
        lines.append("universe " + " ".join(levels) + ".")
    for c in sorted(env.constraints):
        lines.append(f"constraint {c.l} <= {c.r}.")
    for name, _ in env.decls:
        lines.append(print_decl(env, name))
    return "\n".join(lines) + "\n"
