"""Universe levels, constraints and the constraint graph.

Universe expressions live in the tropical algebra (N, max, +k, <=).  A set of
constraints ``l + k <= l' + k'`` is decided by turning it into a weighted
digraph and looking for positive cycles; the least valuation is read off the
longest paths from the zero level.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .errors import UndeclaredLevel

PLUS_BOUND = 16


@dataclass(frozen=True, order=True)
class Level:
    """A universe level variable; the empty name is the zero level (Set)."""

    name: str = ""

    @property
    def is_zero(self) -> bool:
        return self.name == ""

    def __str__(self) -> str:
        return self.name or "0"


LZero = Level("")


def LVar(name: str) -> Level:
    if not name:
        raise ValueError("level variables need a name")
    return Level(name)


@dataclass(frozen=True, order=True)
class UnivExpr:
    level: Level
    plus: int = 0

    def __post_init__(self):
        if not 0 <= self.plus <= PLUS_BOUND:
            raise ValueError(f"universe increment {self.plus} out of range")

    def succ(self) -> UnivExpr:
        return UnivExpr(self.level, self.plus + 1)

    def __str__(self) -> str:
        if self.level.is_zero:
            return str(self.plus)
        return f"{self.level}+{self.plus}" if self.plus else str(self.level)


@dataclass(frozen=True)
class Universe:
    """Max of a non-empty set of expressions, kept normalized."""

    exprs: frozenset[UnivExpr]

    def __post_init__(self):
        if not self.exprs:
            raise ValueError("a universe needs at least one expression")
        best: dict[Level, int] = {}
        for e in self.exprs:
            best[e.level] = max(best.get(e.level, 0), e.plus)
        object.__setattr__(self, "exprs", frozenset(UnivExpr(l, k) for l, k in best.items()))

    @classmethod
    def of(cls, *exprs: UnivExpr) -> Universe:
        return cls(frozenset(exprs))

    @classmethod
    def level(cls, level: Level, plus: int = 0) -> Universe:
        return cls.of(UnivExpr(level, plus))

    def succ(self) -> Universe:
        return Universe(frozenset(e.succ() for e in self.exprs))

    def sorted_exprs(self) -> list[UnivExpr]:
        return sorted(self.exprs)

    def levels(self) -> set[Level]:
        return {e.level for e in self.exprs}

    def __str__(self) -> str:
        es = self.sorted_exprs()
        if len(es) == 1:
            return str(es[0])
        return "max(" + ", ".join(map(str, es)) + ")"


def sup(u: Universe, v: Universe) -> Universe:
    return Universe(u.exprs | v.exprs)


# -- sorts -------------------------------------------------------------------


@dataclass(frozen=True)
class Prop:
    def __str__(self) -> str:
        return "Prop"


@dataclass(frozen=True)
class Type:
    u: Universe

    def __str__(self) -> str:
        es = self.u.sorted_exprs()
        if len(es) == 1 and es[0].level.is_zero:
            return f"Type{es[0].plus}"
        return f"Type({self.u})"


SortValue = Prop | Type

PROP = Prop()
TYPE0 = Type(Universe.level(LZero))


def type_of_sort(s: SortValue) -> SortValue:
    """The sort inhabited by ``s`` itself: Prop : Type1, Type(u) : Type(u+1)."""
    if isinstance(s, Prop):
        return Type(Universe.level(LZero, 1))
    return Type(s.u.succ())


def sort_of_product(dom: SortValue, cod: SortValue) -> SortValue:
    if isinstance(cod, Prop):
        return PROP
    du = TYPE0.u if isinstance(dom, Prop) else dom.u
    return Type(sup(du, cod.u))


# -- constraints and graphs --------------------------------------------------


@dataclass(frozen=True, order=True)
class Constraint:
    """``l <= r``."""

    l: UnivExpr
    r: UnivExpr

    def __str__(self) -> str:
        return f"{self.l} <= {self.r}"


def lt(l: UnivExpr, r: UnivExpr) -> Constraint:
    return Constraint(l.succ(), r)


Edge = tuple[Level, int, Level]
Valuation = dict[Level, int]


@dataclass(frozen=True)
class UGraph:
    """Weighted arcs ``x ->w y`` meaning ``v(y) >= v(x) + w``."""

    nodes: frozenset[Level]
    edges: tuple[Edge, ...]

    @cached_property
    def valuation(self) -> Valuation | None:
        return longest_paths(self.nodes, self.edges)

    @property
    def consistent(self) -> bool:
        return self.valuation is not None

    def require(self, level: Level) -> None:
        if level not in self.nodes:
            raise UndeclaredLevel(level.name)

    def with_constraint(self, c: Constraint) -> UGraph:
        self.require(c.l.level)
        self.require(c.r.level)
        return UGraph(self.nodes, self.edges + (_edge(c),))


def _edge(c: Constraint) -> Edge:
    return (c.l.level, c.l.plus - c.r.plus, c.r.level)


def build_graph(levels: Iterable[Level], cs: Iterable[Constraint]) -> UGraph:
    nodes = {LZero} | set(levels)
    edges: list[Edge] = [(LZero, 0, l) for l in sorted(nodes) if not l.is_zero]
    for c in sorted(cs):
        for l in (c.l.level, c.r.level):
            if l not in nodes:
                raise UndeclaredLevel(l.name)
        edges.append(_edge(c))
    return UGraph(frozenset(nodes), tuple(edges))


def longest_paths(nodes: Iterable[Level], edges: Iterable[Edge]) -> Valuation | None:
    """Bellman-Ford for longest paths from the zero level.

    Returns None when a positive-weight cycle exists (no valuation in N).
    Unreachable nodes get 0.
    """
    order = sorted(nodes)
    edges = list(edges)
    dist: Valuation = {n: 0 for n in order}
    # every node starts at 0 (levels are >= 0), so all cycles are "reachable"
    for _ in range(len(order)):
        changed = False
        for x, w, y in edges:
            if dist[x] + w > dist[y]:
                dist[y] = dist[x] + w
                changed = True
        if not changed:
            break
    else:
        for x, w, y in edges:
            if dist[x] + w > dist[y]:
                return None
    if dist.get(LZero, 0) != 0:
        return None
    return dist


def check_consistency(g: UGraph) -> Valuation | None:
    """The least valuation of ``g``, or None if it is inconsistent."""
    v = g.valuation
    return None if v is None else dict(v)


def entails(g: UGraph, e: UnivExpr, e2: UnivExpr) -> bool:
    """Does every valuation of ``g`` satisfy ``e <= e2``?  Decided by refutation."""
    g.require(e.level)
    g.require(e2.level)
    cache = g.__dict__.setdefault("_entails", {})
    key = (e, e2)
    if key not in cache:
        # negation of e <= e2 is e2 + 1 <= e
        negated = (e2.level, e2.plus + 1 - e.plus, e.level)
        cache[key] = longest_paths(g.nodes, g.edges + (negated,)) is None
    return cache[key]


def leq_universe(g: UGraph, u: Universe, v: Universe) -> bool:
    return all(any(entails(g, e, e2) for e2 in v.exprs) for e in u.exprs)


def eq_universe(g: UGraph, u: Universe, v: Universe) -> bool:
    return leq_universe(g, u, v) and leq_universe(g, v, u)


def satisfies(val: Mapping[Level, int], c: Constraint) -> bool:
    return val[c.l.level] + c.l.plus <= val[c.r.level] + c.r.plus
