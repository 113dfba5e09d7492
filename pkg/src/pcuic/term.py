"""The de Bruijn term language and its binding theory.

Binder names are carried for printing only: every ``name`` field is excluded
from equality and hashing, so ``==`` on terms *is* alpha-equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .universes import SortValue


def _node(cls):
    """Frozen dataclass whose structural hash is computed once per node."""
    cls = dataclass(frozen=True)(cls)
    structural_hash = cls.__hash__

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            h = structural_hash(self)
            object.__setattr__(self, "_hash", h)
            return h

    cls.__hash__ = __hash__
    return cls


def _name():
    return field(compare=False, repr=False)


class Term:
    __slots__ = ()


@_node
class Rel(Term):
    index: int


@_node
class Sort(Term):
    s: SortValue


@_node
class Prod(Term):
    name: str = _name()
    dom: Term
    cod: Term


@_node
class Lambda(Term):
    name: str = _name()
    dom: Term
    body: Term


@_node
class LetIn(Term):
    name: str = _name()
    val: Term
    ty: Term
    body: Term


@_node
class App(Term):
    fn: Term
    arg: Term


@_node
class Const(Term):
    name: str


@_node
class IndRef:
    mind: str
    idx: int = 0


@_node
class Ind(Term):
    ind: IndRef


@_node
class Construct(Term):
    ind: IndRef
    idx: int


@_node
class Assum:
    name: str = _name()
    ty: Term


@_node
class LocalDef:
    name: str = _name()
    body: Term
    ty: Term


ContextDecl = Assum | LocalDef
Context = tuple  # of ContextDecl, innermost binder last


@_node
class CaseInfo:
    ind: IndRef
    npars: int


@_node
class Predicate:
    """Elimination predicate: stored parameters, index+self binders, return type."""

    params: tuple
    pcontext: tuple
    preturn: Term


@_node
class Branch:
    bcontext: tuple
    body: Term


@_node
class Case(Term):
    ci: CaseInfo
    pred: Predicate
    scrut: Term
    branches: tuple


@_node
class FixDef:
    name: str = _name()
    ty: Term
    body: Term
    rarg: int


@_node
class Fix(Term):
    defs: tuple
    idx: int

    def __post_init__(self):
        if not 0 <= self.idx < len(self.defs):
            raise ValueError("fixpoint index out of range")


# -- spines ------------------------------------------------------------------


def mk_apps(f: Term, args: Sequence[Term]) -> Term:
    for a in args:
        f = App(f, a)
    return f


def decompose_app(t: Term) -> tuple[Term, list[Term]]:
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def mk_prods(ctx: Sequence[ContextDecl], t: Term) -> Term:
    for d in reversed(ctx):
        if isinstance(d, LocalDef):
            t = LetIn(d.name, d.body, d.ty, t)
        else:
            t = Prod(d.name, d.ty, t)
    return t


def mk_lambdas(ctx: Sequence[ContextDecl], t: Term) -> Term:
    for d in reversed(ctx):
        if isinstance(d, LocalDef):
            t = LetIn(d.name, d.body, d.ty, t)
        else:
            t = Lambda(d.name, d.ty, t)
    return t


def ctx_rels(n: int, offset: int = 0) -> list[Term]:
    """``#(offset+n-1), ..., #offset``: the variables of an n-binder context, outermost first."""
    return [Rel(offset + n - 1 - i) for i in range(n)]


# -- generic traversal -------------------------------------------------------


def map_decl(f: Callable[[Term, int], Term], d: ContextDecl, k: int) -> ContextDecl:
    if isinstance(d, LocalDef):
        return LocalDef(d.name, f(d.body, k), f(d.ty, k))
    return Assum(d.name, f(d.ty, k))


def map_context(f: Callable[[Term, int], Term], ctx: Sequence[ContextDecl], k: int) -> tuple:
    return tuple(map_decl(f, d, k + i) for i, d in enumerate(ctx))


def map_subterms(f: Callable[[Term, int], Term], t: Term, k: int) -> Term:
    """Rebuild ``t`` applying ``f(sub, k')`` to each immediate subterm,
    where ``k'`` is ``k`` plus the number of binders crossed."""
    match t:
        case Rel() | Sort() | Const() | Ind() | Construct():
            return t
        case Prod(na, a, b):
            return Prod(na, f(a, k), f(b, k + 1))
        case Lambda(na, a, b):
            return Lambda(na, f(a, k), f(b, k + 1))
        case LetIn(na, v, ty, b):
            return LetIn(na, f(v, k), f(ty, k), f(b, k + 1))
        case App(fn, a):
            return App(f(fn, k), f(a, k))
        case Case(ci, p, scrut, brs):
            n = len(p.pcontext)
            pred = Predicate(
                tuple(f(x, k) for x in p.params),
                map_context(f, p.pcontext, k),
                f(p.preturn, k + n),
            )
            branches = tuple(
                Branch(map_context(f, br.bcontext, k), f(br.body, k + len(br.bcontext)))
                for br in brs
            )
            return Case(ci, pred, f(scrut, k), branches)
        case Fix(defs, idx):
            n = len(defs)
            return Fix(tuple(FixDef(d.name, f(d.ty, k), f(d.body, k + n), d.rarg) for d in defs), idx)
    raise TypeError(f"not a term: {t!r}")


def children(t: Term, k: int = 0) -> Iterator[tuple[Term, int]]:
    """Immediate subterms with their binder depth offsets."""
    out: list[tuple[Term, int]] = []

    def visit(sub, kk):
        out.append((sub, kk))
        return sub

    map_subterms(visit, t, k)
    return iter(out)


def _cached(t: Term, attr: str, compute):
    try:
        return t.__dict__[attr]
    except KeyError:
        v = compute()
        object.__setattr__(t, attr, v)
        return v


def loose_bound(t: Term) -> int:
    """One more than the largest free de Bruijn index (0 when closed)."""

    def compute():
        if isinstance(t, Rel):
            return t.index + 1
        m = 0
        for sub, k in children(t):
            m = max(m, loose_bound(sub) - k)
        return m

    return _cached(t, "_loose", compute)


def closed_under(k: int, t: Term) -> bool:
    return loose_bound(t) <= k


def node_count(t: Term) -> int:
    return _cached(t, "_size", lambda: 1 + sum(node_count(s) for s, _ in children(t)))


def occurs(n: int, t: Term) -> bool:
    """Is the free variable ``#n`` mentioned in ``t``?"""
    if loose_bound(t) <= n:
        return False
    if isinstance(t, Rel):
        return t.index == n
    return any(occurs(n + k, sub) for sub, k in children(t))


def subterms(t: Term, k: int = 0) -> Iterator[tuple[Term, int]]:
    """All subterms (pre-order) with the number of binders above them."""
    yield t, k
    for sub, kk in children(t, k):
        yield from subterms(sub, kk)


# -- renamings and instantiations --------------------------------------------


@dataclass(frozen=True)
class Renaming:
    """``i -> prefix[i]`` for ``i < len(prefix)``, ``i -> i + shift`` beyond."""

    prefix: tuple[int, ...] = ()
    shift: int = 0

    def __post_init__(self):
        if len(self.prefix) + self.shift < 0:
            raise ValueError("renaming tail would produce negative indices")

    def __call__(self, i: int) -> int:
        return self.prefix[i] if i < len(self.prefix) else i + self.shift

    def up(self) -> Renaming:
        return Renaming((0,) + tuple(j + 1 for j in self.prefix), self.shift)

    def then(self, other: Renaming) -> Renaming:
        """``other . self`` (apply self first)."""
        n = max(len(self.prefix), len(other.prefix) - self.shift, 0)
        return Renaming(tuple(other(self(i)) for i in range(n)), self.shift + other.shift)


ID_REN = Renaming()


def shift_ren(n: int) -> Renaming:
    return Renaming((), n)


def shift_above(k: int, n: int) -> Renaming:
    return Renaming(tuple(range(k)), n)


@dataclass(frozen=True)
class Instantiation:
    """``i -> prefix[i]`` for ``i < len(prefix)``, ``i -> #(i + shift)`` beyond."""

    prefix: tuple[Term, ...] = ()
    shift: int = 0

    def __call__(self, i: int) -> Term:
        return self.prefix[i] if i < len(self.prefix) else Rel(i + self.shift)

    def after(self, r: Renaming) -> Instantiation:
        """``self . r`` (rename first, then instantiate)."""
        n = max(len(r.prefix), len(self.prefix) - r.shift, 0)
        return Instantiation(tuple(self(r(i)) for i in range(n)), self.shift + r.shift)


ID_INST = Instantiation()


def rename(r: Renaming, t: Term) -> Term:
    def go(t: Term, k: int) -> Term:
        if loose_bound(t) <= k:
            return t
        if isinstance(t, Rel):
            return Rel(r(t.index - k) + k)
        return map_subterms(go, t, k)

    return go(t, 0)


def inst(sigma: Instantiation, t: Term) -> Term:
    def go(t: Term, k: int) -> Term:
        if loose_bound(t) <= k:
            return t
        if isinstance(t, Rel):
            return lift(k, 0, sigma(t.index - k))
        return map_subterms(go, t, k)

    return go(t, 0)


def lift(n: int, k: int, t: Term) -> Term:
    """Shift free indices ``>= k`` by ``n``."""
    if n == 0:
        return t

    def go(t: Term, d: int) -> Term:
        if loose_bound(t) <= d:
            return t
        if isinstance(t, Rel):
            return Rel(t.index + n)
        return map_subterms(go, t, d)

    return go(t, k)


def subst(s: Sequence[Term], k: int, t: Term) -> Term:
    """Replace ``#k+i`` by ``s[i]`` (lifted by the binders crossed) and lower
    indices above ``k+len(s)`` by ``len(s)``."""
    n = len(s)
    if n == 0:
        return t

    def go(t: Term, d: int) -> Term:
        if loose_bound(t) <= d:
            return t
        if isinstance(t, Rel):
            i = t.index
            if i < d + n:
                return lift(d, 0, s[i - d])
            return Rel(i - n)
        return map_subterms(go, t, d)

    return go(t, k)


def subst1(u: Term, t: Term) -> Term:
    return subst([u], 0, t)


def alpha_eq(t: Term, u: Term) -> bool:
    return t == u


def strip_names(t: Term) -> Term:
    """Same term with every binder name replaced by ``_`` (useful for printing tests)."""

    def go(t, k):
        t = map_subterms(go, t, k)
        match t:
            case Prod(_, a, b):
                return Prod("_", a, b)
            case Lambda(_, a, b):
                return Lambda("_", a, b)
            case LetIn(_, v, ty, b):
                return LetIn("_", v, ty, b)
            case Case(ci, p, scrut, brs):
                pred = Predicate(p.params, _anon_ctx(p.pcontext), p.preturn)
                return Case(ci, pred, scrut, tuple(Branch(_anon_ctx(b.bcontext), b.body) for b in brs))
            case Fix(defs, idx):
                return Fix(tuple(FixDef("_", d.ty, d.body, d.rarg) for d in defs), idx)
        return t

    return go(t, 0)


def _anon_ctx(ctx):
    return tuple(
        LocalDef("_", d.body, d.ty) if isinstance(d, LocalDef) else Assum("_", d.ty) for d in ctx
    )


def decl_type(ctx: Sequence[ContextDecl], n: int) -> Term:
    """Type of ``#n`` in ``ctx``, valid in the full context."""
    return lift(n + 1, 0, ctx[-1 - n].ty)


def fix_subst(defs: Sequence[FixDef]) -> list[Term]:
    """Substitution unfolding a fixpoint block: ``#i -> Fix(defs, n-1-i)``."""
    n = len(defs)
    defs = tuple(defs)
    return [Fix(defs, n - 1 - i) for i in range(n)]


def unfold_fix(defs: Sequence[FixDef], idx: int) -> Term:
    return subst(fix_subst(defs), 0, defs[idx].body)
