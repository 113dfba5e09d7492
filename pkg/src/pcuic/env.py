"""Global declarations: constants, axioms and mutual inductive blocks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import (
    DuplicateName,
    NoSuchConstructor,
    PositivityError,
    UndeclaredConstant,
    UndeclaredInductive,
)
from .term import (
    Construct,
    Const,
    Ind,
    IndRef,
    LocalDef,
    Prod,
    Sort,
    Term,
    ctx_rels,
    decompose_app,
    mk_apps,
    mk_prods,
    subterms,
)
from .universes import Constraint, Level, SortValue


@dataclass(frozen=True)
class ConstantBody:
    ty: Term
    body: Term | None = None

    @property
    def is_axiom(self) -> bool:
        return self.body is None


@dataclass(frozen=True)
class ConstructorBody:
    """``args`` live under the parameters; ``index_terms`` under params + args."""

    name: str
    args: tuple
    index_terms: tuple = ()

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True)
class OneInductiveBody:
    name: str
    indices: tuple
    sort: SortValue
    ctors: tuple


@dataclass(frozen=True)
class MutualInductiveBody:
    params: tuple
    bodies: tuple

    def __post_init__(self):
        if not self.bodies:
            raise ValueError("empty inductive block")

    @property
    def name(self) -> str:
        """Kernel name of the block: the name of its first inductive."""
        return self.bodies[0].name

    @property
    def npars(self) -> int:
        return len(self.params)


Decl = ConstantBody | MutualInductiveBody


@dataclass(frozen=True)
class GlobalEnv:
    levels: frozenset[Level] = frozenset()
    constraints: frozenset[Constraint] = frozenset()
    decls: tuple[tuple[str, Decl], ...] = ()
    _index: dict = field(default_factory=dict, compare=False, repr=False)
    _globals: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for pos, (name, decl) in enumerate(self.decls):
            self._register(name, decl, pos)

    def _register(self, name: str, decl: Decl, pos: int) -> None:
        if name in self._index:
            raise DuplicateName(f"{name} is already declared")
        self._index[name] = pos
        entries: list[tuple[str, Term]] = []
        if isinstance(decl, ConstantBody):
            entries.append((name, Const(name)))
        else:
            if decl.name != name:
                raise ValueError(f"inductive block {name} must be named after its first body")
            for i, oib in enumerate(decl.bodies):
                ref = IndRef(name, i)
                entries.append((oib.name, Ind(ref)))
                for k, cb in enumerate(oib.ctors):
                    entries.append((cb.name, Construct(ref, k)))
        for n, t in entries:
            if n in self._globals:
                raise DuplicateName(f"{n} is already declared")
            self._globals[n] = t

    # -- construction --------------------------------------------------------

    def extend(self, name: str, decl: Decl) -> GlobalEnv:
        return GlobalEnv(self.levels, self.constraints, self.decls + ((name, decl),))

    def with_universes(self, levels: Iterable[Level], constraints: Iterable[Constraint]) -> GlobalEnv:
        return GlobalEnv(self.levels | frozenset(levels), self.constraints | frozenset(constraints), self.decls)

    def prefix(self, n: int) -> GlobalEnv:
        """The environment of the first ``n`` declarations."""
        return GlobalEnv(self.levels, self.constraints, self.decls[:n])

    # -- lookups -------------------------------------------------------------

    def lookup(self, name: str) -> Decl | None:
        pos = self._index.get(name)
        return None if pos is None else self.decls[pos][1]

    def position(self, name: str) -> int:
        return self._index.get(name, -1)

    def global_ref(self, name: str) -> Term | None:
        """The term a surface identifier denotes (constant, inductive or constructor)."""
        return self._globals.get(name)

    def names(self) -> list[str]:
        return [n for n, _ in self.decls]

    def __contains__(self, name: str) -> bool:
        return name in self._index


def lookup_constant(env: GlobalEnv, c: str) -> ConstantBody:
    d = env.lookup(c)
    if not isinstance(d, ConstantBody):
        raise UndeclaredConstant(f"unknown constant {c}", Const(c))
    return d


def lookup_inductive(env: GlobalEnv, ind: IndRef) -> tuple[MutualInductiveBody, OneInductiveBody]:
    d = env.lookup(ind.mind)
    if not isinstance(d, MutualInductiveBody) or not 0 <= ind.idx < len(d.bodies):
        raise UndeclaredInductive(f"unknown inductive {ind.mind}#{ind.idx}", Ind(ind))
    return d, d.bodies[ind.idx]


def lookup_constructor(env: GlobalEnv, ind: IndRef, k: int):
    mib, oib = lookup_inductive(env, ind)
    if not 0 <= k < len(oib.ctors):
        raise NoSuchConstructor(f"{oib.name} has no constructor {k}", Construct(ind, k))
    return mib, oib, oib.ctors[k]


def ind_arity(mib: MutualInductiveBody, oib: OneInductiveBody) -> Term:
    return mk_prods(mib.params, mk_prods(oib.indices, Sort(oib.sort)))


def ctor_conclusion(ind: IndRef, mib: MutualInductiveBody, cb: ConstructorBody) -> Term:
    """``I params index_terms`` under params + args."""
    return mk_apps(Ind(ind), ctx_rels(mib.npars, cb.arity) + list(cb.index_terms))


def type_of_constructor(env: GlobalEnv, ind: IndRef, k: int) -> Term:
    mib, _, cb = lookup_constructor(env, ind, k)
    return mk_prods(mib.params, mk_prods(cb.args, ctor_conclusion(ind, mib, cb)))


def type_of_inductive(env: GlobalEnv, ind: IndRef) -> Term:
    return ind_arity(*lookup_inductive(env, ind))


# -- strict positivity -------------------------------------------------------


def _mentions(block: str, t: Term) -> bool:
    return any(isinstance(s, Ind) and s.ind.mind == block for s, _ in subterms(t))


def positivity_check(env: GlobalEnv, mib: MutualInductiveBody) -> None:
    """Raise PositivityError unless every constructor argument mentions the
    block only as the head of its conclusion.  Nested occurrences (under
    another inductive) are rejected."""
    block = mib.name
    for oib in mib.bodies:
        for cb in oib.ctors:
            for pos, d in enumerate(cb.args):
                if isinstance(d, LocalDef):
                    if _mentions(block, d.body) or _mentions(block, d.ty):
                        raise PositivityError(cb.name, pos)
                    continue
                if not _strictly_positive(block, d.ty):
                    raise PositivityError(cb.name, pos)
            if any(_mentions(block, t) for t in cb.index_terms):
                raise PositivityError(cb.name, len(cb.args), f"{cb.name}: the inductive occurs in its own indices")


def _strictly_positive(block: str, ty: Term) -> bool:
    while isinstance(ty, Prod):
        if _mentions(block, ty.dom):
            return False
        ty = ty.cod
    if not _mentions(block, ty):
        return True
    head, args = decompose_app(ty)
    return isinstance(head, Ind) and head.ind.mind == block and not any(_mentions(block, a) for a in args)
