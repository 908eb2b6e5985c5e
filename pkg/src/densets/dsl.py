"""A small expression language naming sets built from the combinators.

Grammar::

    expr    := name | name '(' arg {',' arg} ')'
    arg     := expr | literal
    literal := natural | p/q | 0.ddd | seed:<n>[,mode=derived|pairing]
             | column=<primitive> | <perm-spec>

Examples: ``within(odds, arith(2,4))``, ``xr(1/3, seed:42)``,
``perm(blockshuffle:w=256,seed=7, bern(1/2,1))``.

A spec literal (anything of the form ``word:...`` or ``word=...``) greedily
absorbs following ``,mode=``, ``,seed=`` and ``,w=`` pairs, so commas inside
specs never clash with argument separators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Optional, Union

from . import sets as S
from .constructions import (
    BitSource,
    ColumnOracle,
    PartitionFamily,
    RealSpec,
    bernoulli_set,
    build_xr,
    parse_source,
)
from .errors import ArityError, DomainError, DSLSyntaxError
from .permutations import PermSpec, apply
from .sets import EvaluationBudget, SetHandle

# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Prim:
    name: str


@dataclass(frozen=True)
class Arith:
    a: int
    m: int

    def __post_init__(self):
        if self.m < 1 or not 0 <= self.a < self.m:
            raise DomainError(f"arith(a, m) needs m >= 1 and a < m, got ({self.a}, {self.m})")


@dataclass(frozen=True)
class Rational:
    value: Fraction


@dataclass(frozen=True)
class SeedReal:
    seed: int


Real = Union[Rational, SeedReal]


@dataclass(frozen=True)
class Source:
    seed: int
    mode: str = "derived"


@dataclass(frozen=True)
class Oracle:
    kind: str


SourceNode = Union[Source, Oracle]


@dataclass(frozen=True)
class Bern:
    r: Real
    seed: int


@dataclass(frozen=True)
class Col:
    src: SourceNode
    i: int


@dataclass(frozen=True)
class PartA:
    src: SourceNode
    i: int


@dataclass(frozen=True)
class PartB:
    src: SourceNode
    i: int


@dataclass(frozen=True)
class Xr:
    r: Real
    src: SourceNode


@dataclass(frozen=True)
class Into:
    b: "Expr"
    a: "Expr"


@dataclass(frozen=True)
class Within:
    b: "Expr"
    a: "Expr"


@dataclass(frozen=True)
class Join:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Compl:
    a: "Expr"


@dataclass(frozen=True)
class Union_:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Inter:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Diff:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Perm:
    spec: PermSpec
    a: "Expr"


Expr = Union[Prim, Arith, Bern, Col, PartA, PartB, Xr, Into, Within, Join, Compl, Union_, Inter, Diff, Perm]

PRIMITIVES = ("omega", "empty", "evens", "odds", "factorials")

# name -> (node class, argument kinds)
SIGNATURES = {
    "arith": (Arith, ("nat", "nat")),
    "bern": (Bern, ("real", "nat")),
    "col": (Col, ("source", "nat")),
    "partA": (PartA, ("source", "nat")),
    "partB": (PartB, ("source", "nat")),
    "xr": (Xr, ("real", "source")),
    "into": (Into, ("expr", "expr")),
    "within": (Within, ("expr", "expr")),
    "join": (Join, ("expr", "expr")),
    "compl": (Compl, ("expr",)),
    "union": (Union_, ("expr", "expr")),
    "inter": (Inter, ("expr", "expr")),
    "diff": (Diff, ("expr", "expr")),
    "perm": (Perm, ("perm", "expr")),
}
NAMES = {cls: name for name, (cls, _) in SIGNATURES.items()}

# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<spec>[A-Za-z_]\w*[:=][\w.=]+(?:,\s*(?:mode|seed|w)=[\w.]+)*)
  | (?P<rational>\d+/\d+)
  | (?P<decimal>\d*\.\d+)
  | (?P<nat>\d+)
  | (?P<name>[A-Za-z_]\w*)
  | (?P<punct>[(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def tokenize(text: str) -> list[Token]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.take()
        if tok.text != text:
            found = tok.text or "end of input"
            raise DSLSyntaxError(f"expected {text!r}, found {found!r}", tok.offset)
        return tok

    def parse(self) -> Expr:
        expr = self.expr()
        tok = self.peek()
        if tok.kind != "eof":
            raise DSLSyntaxError(f"trailing input {tok.text!r}", tok.offset)
        return expr

    def expr(self) -> Expr:
        tok = self.take()
        if tok.kind != "name":
            raise DSLSyntaxError(f"expected a set expression, found {tok.text or 'end of input'!r}", tok.offset)
        if tok.text in PRIMITIVES:
            if self.peek().text == "(":
                raise ArityError(f"{tok.text} takes no arguments", self.peek().offset)
            return Prim(tok.text)
        if tok.text not in SIGNATURES:
            raise DSLSyntaxError(f"unknown name {tok.text!r}", tok.offset)
        cls, kinds = SIGNATURES[tok.text]
        self.expect("(")
        args = []
        while True:
            if len(args) == len(kinds):
                raise ArityError(f"{tok.text} takes {len(kinds)} argument(s)", self.peek().offset)
            args.append(self.arg(kinds[len(args)]))
            sep = self.take()
            if sep.text == ")":
                break
            if sep.text != ",":
                raise DSLSyntaxError(f"expected ',' or ')', found {sep.text or 'end of input'!r}", sep.offset)
        if len(args) != len(kinds):
            raise ArityError(f"{tok.text} takes {len(kinds)} argument(s), got {len(args)}", tok.offset)
        try:
            return cls(*args)
        except DomainError as exc:
            raise DomainError(f"{exc} (at offset {tok.offset})") from exc

    def arg(self, kind: str):
        if kind == "expr":
            return self.expr()
        tok = self.take()
        try:
            if kind == "nat":
                if tok.kind != "nat":
                    raise DSLSyntaxError(f"expected a natural number, found {tok.text!r}", tok.offset)
                return int(tok.text)
            if kind == "real":
                return self.real(tok)
            if kind == "source":
                if tok.kind != "spec":
                    raise DSLSyntaxError(f"expected a bit source, found {tok.text!r}", tok.offset)
                src = parse_source(tok.text)
                if isinstance(src, BitSource):
                    return Source(src.seed, src.mode)
                return Oracle(src.kind)
            if kind == "perm":
                if tok.kind not in ("spec", "name"):
                    raise DSLSyntaxError(f"expected a permutation, found {tok.text!r}", tok.offset)
                return PermSpec.parse(tok.text)
        except DomainError as exc:
            raise DomainError(f"{exc} (at offset {tok.offset})") from exc
        raise AssertionError(kind)

    def real(self, tok: Token) -> Real:
        if tok.kind == "rational":
            p, q = tok.text.split("/")
            if int(q) == 0:
                raise DomainError("zero denominator")
            value = Fraction(int(p), int(q))
        elif tok.kind == "decimal":
            value = Fraction(Decimal(tok.text))
        elif tok.kind == "spec" and tok.text.startswith("seed:"):
            return SeedReal(RealSpec.parse(tok.text).seed)
        else:
            raise DSLSyntaxError(f"expected a real in (0,1), found {tok.text!r}", tok.offset)
        if not 0 < value < 1:
            raise DomainError(f"r must lie strictly between 0 and 1, got {value}")
        return Rational(value)


def parse(text: str) -> Expr:
    """Parse an expression; errors carry the byte offset of the problem."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printer


def _print_arg(x) -> str:
    if isinstance(x, bool):  # pragma: no cover - not produced by the parser
        raise TypeError(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Rational):
        return f"{x.value.numerator}/{x.value.denominator}"
    if isinstance(x, SeedReal):
        return f"seed:{x.seed}"
    if isinstance(x, Source):
        return f"seed:{x.seed}" + ("" if x.mode == "derived" else f",mode={x.mode}")
    if isinstance(x, Oracle):
        return f"column={x.kind}"
    if isinstance(x, PermSpec):
        return str(x)
    return to_text(x)


def to_text(e: Expr) -> str:
    """Canonical text; ``parse(to_text(e)) == e``."""
    if isinstance(e, Prim):
        return e.name
    name = NAMES[type(e)]
    args = [getattr(e, f) for f in e.__dataclass_fields__]
    return f"{name}(" + ", ".join(_print_arg(a) for a in args) + ")"


# ---------------------------------------------------------------------------
# Evaluation


def _real_spec(r: Real) -> RealSpec:
    return RealSpec(value=r.value) if isinstance(r, Rational) else RealSpec(seed=r.seed)


class Evaluator:
    """Turns ASTs into handles; structurally equal subtrees share one handle."""

    def __init__(self, budget: Optional[EvaluationBudget] = None):
        self.budget = budget if budget is not None else S.default_budget()
        self.cache: dict = {}

    def source(self, node: SourceNode):
        if isinstance(node, Source):
            return BitSource(node.seed, node.mode)
        return ColumnOracle(node.kind)

    def partition(self, node: SourceNode) -> PartitionFamily:
        key = ("partition", node)
        if key not in self.cache:
            self.cache[key] = PartitionFamily(self.source(node), budget=self.budget)
        return self.cache[key]

    def __call__(self, e: Expr) -> SetHandle:
        if e not in self.cache:
            self.cache[e] = self._build(e)
        return self.cache[e]

    def _build(self, e: Expr) -> SetHandle:
        b = self.budget
        if isinstance(e, Prim):
            return getattr(S, e.name)(b)
        if isinstance(e, Arith):
            return S.arithmetic(e.a, e.m, b)
        if isinstance(e, Bern):
            return bernoulli_set(_real_spec(e.r), e.seed, b)
        if isinstance(e, Col):
            return self.source(e.src).column(e.i, b)
        if isinstance(e, PartA):
            return self.partition(e.src).A(e.i)
        if isinstance(e, PartB):
            return self.partition(e.src).B(e.i)
        if isinstance(e, Xr):
            return build_xr(_real_spec(e.r), self.partition(e.src), b)
        if isinstance(e, Into):
            return S.into(self(e.b), self(e.a), b)
        if isinstance(e, Within):
            return S.within(self(e.b), self(e.a), b)
        if isinstance(e, Join):
            return S.join(self(e.a), self(e.b), b)
        if isinstance(e, Compl):
            return S.compl(self(e.a), b)
        if isinstance(e, Union_):
            return S.union(self(e.a), self(e.b), b)
        if isinstance(e, Inter):
            return S.intersect(self(e.a), self(e.b), b)
        if isinstance(e, Diff):
            return S.diff(self(e.a), self(e.b), b)
        if isinstance(e, Perm):
            return apply(e.spec.build(b), self(e.a), b)
        raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Union[Expr, str], budget: Optional[EvaluationBudget] = None) -> SetHandle:
    if isinstance(e, str):
        e = parse(e)
    return Evaluator(budget)(e)
