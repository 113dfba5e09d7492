"""Lexer, surface AST and recursive-descent parser."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ParseError
from .universes import LZero, Level, Type, UnivExpr, Universe, PROP


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


KEYWORDS = {
    "universe", "constraint", "axiom", "def", "inductive", "forall", "fun", "let", "in",
    "match", "as", "return", "with", "end", "fix", "struct", "for", "Prop", "Set", "Type", "max",
}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\(\*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>:=|=>|->|<=|[()\[\]{}:,.|<=+])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "num", "kw", "sym", "eof"
    text: str
    span: Span


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    pos, line, col = 0, 1, 1

    def advance(text: str):
        nonlocal line, col
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)

    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", Span(line, col))
        kind = m.lastgroup
        text = m.group()
        if kind == "comment":
            end, depth, i = None, 1, m.end()
            while i < len(src):
                if src.startswith("(*", i):
                    depth, i = depth + 1, i + 2
                elif src.startswith("*)", i):
                    depth, i = depth - 1, i + 2
                    if depth == 0:
                        end = i
                        break
                else:
                    i += 1
            if end is None:
                raise ParseError("unterminated comment", Span(line, col))
            text = src[pos:end]
        elif kind == "ident":
            toks.append(Token("kw" if text in KEYWORDS else "ident", text, Span(line, col)))
        elif kind in ("num", "sym"):
            toks.append(Token(kind, text, Span(line, col)))
        advance(text)
        pos += len(text)
    toks.append(Token("eof", "", Span(line, col)))
    return toks


# -- surface syntax ----------------------------------------------------------


class STerm:
    span: Span


@dataclass
class SVar(STerm):
    name: str
    span: Span = field(default=None, compare=False)


@dataclass
class SSort(STerm):
    sort: object
    span: Span = field(default=None, compare=False)


@dataclass
class SBinder:
    name: str
    ty: STerm | None
    span: Span = field(default=None, compare=False)


@dataclass
class SPi(STerm):
    binders: list[SBinder]
    body: STerm
    span: Span = field(default=None, compare=False)


@dataclass
class SLam(STerm):
    binders: list[SBinder]
    body: STerm
    span: Span = field(default=None, compare=False)


@dataclass
class SLet(STerm):
    name: str
    ty: STerm
    val: STerm
    body: STerm
    span: Span = field(default=None, compare=False)


@dataclass
class SApp(STerm):
    fn: STerm
    args: list[STerm]
    span: Span = field(default=None, compare=False)


@dataclass
class SBranch:
    ctor: str
    binders: list[SBinder]
    body: STerm
    span: Span = field(default=None, compare=False)


@dataclass
class SMatch(STerm):
    scrut: STerm
    as_binder: SBinder | None
    in_head: str | None
    in_items: list  # STerm or SBinder
    ret: STerm
    branches: list[SBranch]
    span: Span = field(default=None, compare=False)


@dataclass
class SFixDef:
    name: str
    binders: list[SBinder]
    struct: str | int
    ty: STerm
    body: STerm
    span: Span = field(default=None, compare=False)


@dataclass
class SFix(STerm):
    defs: list[SFixDef]
    target: str | None
    span: Span = field(default=None, compare=False)


# declarations


@dataclass
class DUniverse:
    names: list[str]
    span: Span = None


@dataclass
class DConstraint:
    l: UnivExpr
    op: str
    r: UnivExpr
    span: Span = None


@dataclass
class DAxiom:
    name: str
    ty: STerm
    span: Span = None


@dataclass
class DDef:
    name: str
    ty: STerm
    body: STerm
    span: Span = None


@dataclass
class SCtor:
    name: str
    ty: STerm
    span: Span = None


@dataclass
class SIndBody:
    name: str
    arity: STerm
    ctors: list[SCtor]
    span: Span = None


@dataclass
class DInductive:
    params: list[SBinder]
    bodies: list[SIndBody]
    span: Span = None

    @property
    def name(self) -> str:
        return self.bodies[0].name


SurfaceDecl = DUniverse | DConstraint | DAxiom | DDef | DInductive


# -- parser ------------------------------------------------------------------


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "sym") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def fail(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"{msg}, found {found}", t.span)

    def ident(self, allow_blank: bool = True) -> str:
        t = self.tok
        if t.kind != "ident" or (t.text == "_" and not allow_blank):
            self.fail("expected an identifier")
        self.i += 1
        return t.text

    def number(self) -> int:
        t = self.tok
        if t.kind != "num":
            self.fail("expected a number")
        self.i += 1
        return int(t.text)

    # declarations

    def file(self) -> list[SurfaceDecl]:
        out = []
        while self.tok.kind != "eof":
            out.append(self.decl())
        return out

    def decl(self) -> SurfaceDecl:
        span = self.tok.span
        if self.accept("universe"):
            names = [self.ident(False)]
            while self.tok.kind == "ident":
                names.append(self.ident(False))
            self.expect(".")
            return DUniverse(names, span)
        if self.accept("constraint"):
            l = self.uexpr()
            if self.at("<") or self.at("<=") or self.at("="):
                op = self.tok.text
                self.i += 1
            else:
                self.fail("expected '<', '<=' or '='")
            r = self.uexpr()
            self.expect(".")
            return DConstraint(l, op, r, span)
        if self.accept("axiom"):
            name = self.ident(False)
            self.expect(":")
            ty = self.term()
            self.expect(".")
            return DAxiom(name, ty, span)
        if self.accept("def"):
            name = self.ident(False)
            binders = self.binders_opt()
            self.expect(":")
            ty = self.term()
            self.expect(":=")
            body = self.term()
            self.expect(".")
            if binders:
                ty = SPi(binders, ty, span)
                body = SLam(binders, body, span)
            return DDef(name, ty, body, span)
        if self.accept("inductive"):
            name = self.ident(False)
            params = self.binders_opt()
            bodies = [self.ind_body(name, span)]
            while self.accept("with"):
                bspan = self.tok.span
                bodies.append(self.ind_body(self.ident(False), bspan))
            self.expect(".")
            return DInductive(params, bodies, span)
        self.fail("expected a declaration")

    def ind_body(self, name: str, span: Span) -> SIndBody:
        self.expect(":")
        arity = self.term()
        self.expect(":=")
        ctors = []
        if self.tok.kind == "ident" or self.at("|"):
            self.accept("|")
            ctors.append(self.ctor())
            while self.accept("|"):
                ctors.append(self.ctor())
        return SIndBody(name, arity, ctors, span)

    def ctor(self) -> SCtor:
        span = self.tok.span
        name = self.ident(False)
        self.expect(":")
        return SCtor(name, self.term(), span)

    def uatom(self) -> UnivExpr:
        if self.tok.kind == "num":
            return UnivExpr(LZero, self.number())
        lvl = Level(self.ident(False))
        plus = 0
        if self.accept("+"):
            plus = self.number()
        return self._uexpr(lvl, plus)

    def _uexpr(self, lvl, plus) -> UnivExpr:
        try:
            return UnivExpr(lvl, plus)
        except ValueError as e:
            self.fail(str(e))

    def uexpr(self) -> UnivExpr:
        return self.uatom()

    def universe(self) -> Universe:
        if self.accept("max"):
            self.expect("(")
            es = [self.uatom()]
            while self.accept(","):
                es.append(self.uatom())
            self.expect(")")
            return Universe(frozenset(es))
        return Universe.of(self.uatom())

    # binders

    def binders_opt(self) -> list[SBinder]:
        """Zero or more parenthesised groups ``(x y : A)``."""
        out = []
        while self.at("(") and self.peek().kind == "ident":
            self.expect("(")
            span = self.tok.span
            names = [self.ident()]
            while self.tok.kind == "ident":
                names.append(self.ident())
            self.expect(":")
            ty = self.term()
            self.expect(")")
            out.extend(SBinder(n, ty, span) for n in names)
        return out

    def binders(self) -> list[SBinder]:
        if self.tok.kind == "ident":
            span = self.tok.span
            names = [self.ident()]
            while self.tok.kind == "ident":
                names.append(self.ident())
            self.expect(":")
            ty = self.term()
            return [SBinder(n, ty, span) for n in names]
        out = self.binders_opt()
        if not out:
            self.fail("expected binders")
        return out

    # terms

    def term(self) -> STerm:
        span = self.tok.span
        if self.accept("forall"):
            bs = self.binders()
            self.expect(",")
            return SPi(bs, self.term(), span)
        if self.accept("fun"):
            bs = self.binders()
            self.expect("=>")
            return SLam(bs, self.term(), span)
        if self.accept("let"):
            name = self.ident()
            self.expect(":")
            ty = self.term()
            self.expect(":=")
            val = self.term()
            self.expect("in")
            return SLet(name, ty, val, self.term(), span)
        if self.accept("fix"):
            return self.fix(span)
        lhs = self.app()
        if self.accept("->"):
            return SPi([SBinder("_", lhs, span)], self.term(), span)
        return lhs

    def fix(self, span: Span) -> SFix:
        defs = [self.fixdef()]
        while self.accept("with"):
            defs.append(self.fixdef())
        target = None
        if self.accept("for"):
            target = self.ident(False)
        return SFix(defs, target, span)

    def fixdef(self) -> SFixDef:
        span = self.tok.span
        name = self.ident(False)
        bs = self.binders_opt()
        self.expect("{")
        self.expect("struct")
        struct: str | int = self.number() if self.tok.kind == "num" else self.ident(False)
        self.expect("}")
        self.expect(":")
        ty = self.term()
        self.expect(":=")
        return SFixDef(name, bs, struct, ty, self.term(), span)

    def starts_atom(self) -> bool:
        t = self.tok
        if t.kind == "ident":
            return True
        return t.kind in ("kw", "sym") and t.text in ("(", "Prop", "Set", "Type", "match")

    def app(self) -> STerm:
        span = self.tok.span
        head = self.atom()
        args = []
        while self.starts_atom():
            args.append(self.atom())
        return SApp(head, args, span) if args else head

    def atom(self) -> STerm:
        t = self.tok
        span = t.span
        if t.kind == "ident":
            self.i += 1
            m = re.fullmatch(r"Type(\d+)", t.text)
            if m:
                return SSort(Type(Universe.level(LZero, int(m.group(1)))), span)
            return SVar(t.text, span)
        if self.accept("Prop"):
            return SSort(PROP, span)
        if self.accept("Set"):
            return SSort(Type(Universe.level(LZero)), span)
        if self.accept("Type"):
            self.expect("(")
            u = self.universe()
            self.expect(")")
            return SSort(Type(u), span)
        if self.accept("match"):
            return self.match(span)
        if self.accept("("):
            inner = self.term()
            self.expect(")")
            return inner
        self.fail("expected a term")

    def pattern_binder(self) -> SBinder:
        span = self.tok.span
        if self.accept("("):
            name = self.ident()
            self.expect(":")
            ty = self.term()
            self.expect(")")
            return SBinder(name, ty, span)
        return SBinder(self.ident(), None, span)

    def match(self, span: Span) -> SMatch:
        scrut = self.term()
        as_b = None
        if self.accept("as"):
            as_b = self.pattern_binder()
        head, items = None, []
        if self.accept("in"):
            head = self.ident(False)
            while not self.at("return"):
                if self.at("(") and self.peek().kind == "ident" and self.peek(2).text == ":" and self.peek(2).kind == "sym":
                    items.append(self.pattern_binder())
                elif self.starts_atom():
                    items.append(self.atom())
                else:
                    self.fail("expected 'return'")
        self.expect("return")
        ret = self.term()
        self.expect("with")
        branches = []
        if not self.at("end"):
            self.accept("|")
            branches.append(self.branch())
            while self.accept("|"):
                branches.append(self.branch())
        self.expect("end")
        return SMatch(scrut, as_b, head, items, ret, branches, span)

    def branch(self) -> SBranch:
        span = self.tok.span
        ctor = self.ident(False)
        bs = []
        while not self.at("=>"):
            if self.tok.kind != "ident" and not self.at("("):
                self.fail("expected a pattern variable or '=>'")
            bs.append(self.pattern_binder())
        self.expect("=>")
        return SBranch(ctor, bs, self.term(), span)


def parse(src: str) -> list[SurfaceDecl]:
    return Parser(src).file()


def parse_term(src: str) -> STerm:
    p = Parser(src)
    t = p.term()
    if p.tok.kind != "eof":
        p.fail("trailing input")
    return t
