"""ASCII syntax for set circuits: AST, parser, printer and validation.

Grammar, loosest binding first::

    expr  := "let" IDENT "=" expr "in" expr | union
    union := diff ("|" diff)*        diff := inter ("\\" inter)*
    inter := sum ("&" sum)*          sum  := prod ("+" prod)*
    prod  := atom (("*" | ".") atom)*
    atom  := "~" atom | "N" | "E" | "{" [num ("," num)*] "}" | "ep[" bits ";" bits "]"
           | GATE "(" expr ")" | IDENT | "(" expr ")"

``*`` is the full productset, ``.`` the productset over nonzero factors,
``\\`` is difference.  All binary operators are left-associative.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .epset import EpSet, EpSetError, GateKind


class Node:
    """Base class of circuit nodes."""

    __slots__ = ()

    @property
    def children(self) -> tuple[Node, ...]:
        return ()


@dataclass(frozen=True, eq=True)
class Var(Node):
    name: str


@dataclass(frozen=True, eq=True)
class Single(Node):
    value: int


@dataclass(frozen=True, eq=True)
class FiniteConst(Node):
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        vals = self.values
        if len(vals) < 2 or any(a >= b for a, b in zip(vals, vals[1:])) or vals[0] < 0:
            raise ValueError("finite constant needs two or more strictly increasing naturals")


@dataclass(frozen=True, eq=True)
class Empty(Node):
    pass


@dataclass(frozen=True, eq=True)
class Nat(Node):
    pass


@dataclass(frozen=True, eq=True)
class EpLit(Node):
    value: EpSet


@dataclass(frozen=True, eq=True)
class Complement(Node):
    operand: Node

    @property
    def children(self) -> tuple[Node, ...]:
        return (self.operand,)


@dataclass(frozen=True, eq=True)
class Gate(Node):
    kind: GateKind
    operand: Node

    @property
    def children(self) -> tuple[Node, ...]:
        return (self.operand,)


@dataclass(frozen=True, eq=True)
class Binary(Node):
    left: Node
    right: Node

    symbol = "?"
    precedence = 0

    @property
    def children(self) -> tuple[Node, ...]:
        return (self.left, self.right)


class Union(Binary):
    symbol, precedence = "|", 1


class Diff(Binary):
    symbol, precedence = "\\", 2


class Inter(Binary):
    symbol, precedence = "&", 3


class Sum(Binary):
    symbol, precedence = "+", 4


class Prod(Binary):
    symbol, precedence = "*", 5


class ModProd(Binary):
    symbol, precedence = ".", 5


@dataclass(frozen=True, eq=True)
class Let(Node):
    name: str
    value: Node
    body: Node

    @property
    def children(self) -> tuple[Node, ...]:
        return (self.value, self.body)


BINARY_BY_SYMBOL: dict[str, type[Binary]] = {
    cls.symbol: cls for cls in (Union, Diff, Inter, Sum, Prod, ModProd)
}
_UNARY_PREC = 6
_ATOM_PREC = 7
RESERVED = frozenset({"let", "in", "N", "E"})


# lexer


class ParseError(ValueError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position


class UnboundIdentifierError(ParseError):
    def __init__(self, name: str, position: int) -> None:
        super().__init__(f"unbound identifier {name!r}", position)
        self.name = name


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "ep", "sym", "end"
    text: str
    pos: int


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<ep>ep\[[^\]]*\])|(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<sym>[()|\\&+*.~{},=]))"
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            tokens.append(Token("end", "", pos))
            return tokens
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()


# parser

_LEVELS: list[tuple[str, ...]] = [("|",), ("\\",), ("&",), ("+",), ("*", ".")]


class _Parser:
    def __init__(self, text: str, free_vars: frozenset[str] | None) -> None:
        self.tokens = tokenize(text)
        self.i = 0
        self.free_vars = free_vars
        self.scope: list[str] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.tok
        if tok.text != text or tok.kind == "end":
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ParseError(f"expected {text!r}, found {found}", tok.pos)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return node

    def expr(self) -> Node:
        if self.tok.kind == "ident" and self.tok.text == "let":
            self.advance()
            name_tok = self.advance()
            if name_tok.kind != "ident" or name_tok.text in RESERVED:
                raise ParseError("expected a name after 'let'", name_tok.pos)
            if _is_gate(name_tok.text):
                raise ParseError(f"gate name {name_tok.text!r} cannot be bound", name_tok.pos)
            self.expect("=")
            value = self.expr()
            self.expect("in")
            self.scope.append(name_tok.text)
            try:
                body = self.expr()
            finally:
                self.scope.pop()
            return Let(name_tok.text, value, body)
        return self.binary(0)

    def binary(self, level: int) -> Node:
        if level == len(_LEVELS):
            return self.atom()
        node = self.binary(level + 1)
        while self.tok.kind == "sym" and self.tok.text in _LEVELS[level]:
            cls = BINARY_BY_SYMBOL[self.advance().text]
            node = cls(node, self.binary(level + 1))
        return node

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "end":
            raise ParseError("unexpected end of input", tok.pos)
        if tok.kind == "sym":
            if tok.text == "~":
                self.advance()
                return Complement(self.atom())
            if tok.text == "(":
                self.advance()
                node = self.expr()
                self.expect(")")
                return node
            if tok.text == "{":
                return self.braces()
            raise ParseError(f"unexpected {tok.text!r}", tok.pos)
        if tok.kind == "ep":
            self.advance()
            try:
                return EpLit(EpSet.parse(tok.text))
            except EpSetError as exc:
                raise ParseError(str(exc), tok.pos) from None
        if tok.kind == "num":
            raise ParseError("bare number; write singletons as {n}", tok.pos)
        self.advance()
        name = tok.text
        if name == "N":
            return Nat()
        if name == "E":
            return Empty()
        if name in ("let", "in"):
            raise ParseError(f"unexpected keyword {name!r}", tok.pos)
        if self.tok.kind == "sym" and self.tok.text == "(":
            if not _is_gate(name):
                raise ParseError(f"unknown gate {name!r}", tok.pos)
            self.advance()
            operand = self.expr()
            self.expect(")")
            return Gate(GateKind(name), operand)
        if _is_gate(name):
            raise ParseError(f"gate {name!r} needs an argument", tok.pos)
        if self.free_vars is not None and name not in self.scope and name not in self.free_vars:
            raise UnboundIdentifierError(name, tok.pos)
        return Var(name)

    def braces(self) -> Node:
        self.expect("{")
        values: list[int] = []
        if not (self.tok.kind == "sym" and self.tok.text == "}"):
            while True:
                tok = self.advance()
                if tok.kind != "num":
                    raise ParseError("expected a number", tok.pos)
                values.append(int(tok.text))
                if self.tok.kind == "sym" and self.tok.text == ",":
                    self.advance()
                    continue
                break
        self.expect("}")
        vals = sorted(set(values))
        if not vals:
            return Empty()
        if len(vals) == 1:
            return Single(vals[0])
        return FiniteConst(tuple(vals))


def _is_gate(name: str) -> bool:
    return name in {g.value for g in GateKind}


def parse(text: str, free_vars: Iterator[str] | None = None) -> Node:
    """Parse circuit text.

    With ``free_vars`` given, any identifier that is neither let-bound nor in
    ``free_vars`` raises :class:`UnboundIdentifierError`.
    """
    allowed = None if free_vars is None else frozenset(free_vars)
    return _Parser(text, allowed).parse()


# printer


def _prec(node: Node) -> int:
    if isinstance(node, Binary):
        return node.precedence
    if isinstance(node, Let):
        return 0
    if isinstance(node, Complement):
        return _UNARY_PREC
    return _ATOM_PREC


def unparse(node: Node) -> str:
    """Render with the fewest parentheses that still parse back to ``node``."""
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Single):
        return f"{{{node.value}}}"
    if isinstance(node, FiniteConst):
        return "{" + ",".join(map(str, node.values)) + "}"
    if isinstance(node, Empty):
        return "E"
    if isinstance(node, Nat):
        return "N"
    if isinstance(node, EpLit):
        return str(node.value)
    if isinstance(node, Complement):
        inner = unparse(node.operand)
        return "~" + (inner if _prec(node.operand) >= _UNARY_PREC else f"({inner})")
    if isinstance(node, Gate):
        return f"{node.kind.value}({unparse(node.operand)})"
    if isinstance(node, Binary):
        left, right = unparse(node.left), unparse(node.right)
        if _prec(node.left) < node.precedence:
            left = f"({left})"
        if _prec(node.right) <= node.precedence:
            right = f"({right})"
        return f"{left} {node.symbol} {right}"
    if isinstance(node, Let):
        return f"let {node.name} = {unparse(node.value)} in {unparse(node.body)}"
    raise TypeError(f"not a circuit node: {node!r}")


# structural utilities


def walk(node: Node) -> Iterator[Node]:
    """Each distinct node object once, parents before children."""
    seen: set[int] = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        yield n
        stack.extend(reversed(n.children))


def free_vars(node: Node) -> frozenset[str]:
    memo: dict[int, frozenset[str]] = {}

    def go(n: Node) -> frozenset[str]:
        key = id(n)
        if key in memo:
            return memo[key]
        if isinstance(n, Var):
            out = frozenset({n.name})
        elif isinstance(n, Let):
            out = go(n.value) | (go(n.body) - {n.name})
        else:
            out = frozenset().union(*(go(c) for c in n.children)) if n.children else frozenset()
        memo[key] = out
        return out

    return go(node)


def rebuild(node: Node, children: tuple[Node, ...]) -> Node:
    """A copy of ``node`` with new children (same object if unchanged)."""
    if all(a is b for a, b in zip(node.children, children)):
        return node
    if isinstance(node, Complement):
        return Complement(children[0])
    if isinstance(node, Gate):
        return Gate(node.kind, children[0])
    if isinstance(node, Binary):
        return type(node)(children[0], children[1])
    if isinstance(node, Let):
        return Let(node.name, children[0], children[1])
    raise TypeError(f"node {node!r} has no children")


def substitute(node: Node, mapping: dict[str, Node]) -> Node:
    """Replace free occurrences of variables; replacements are shared, not copied."""
    memo: dict[tuple[int, frozenset[str]], Node] = {}

    def go(n: Node, hidden: frozenset[str]) -> Node:
        key = (id(n), hidden)
        if key in memo:
            return memo[key]
        if isinstance(n, Var):
            out = mapping[n.name] if n.name in mapping and n.name not in hidden else n
        elif isinstance(n, Let):
            out = rebuild(n, (go(n.value, hidden), go(n.body, hidden | {n.name})))
        elif n.children:
            out = rebuild(n, tuple(go(c, hidden) for c in n.children))
        else:
            out = n
        memo[key] = out
        return out

    return go(node, frozenset())


def inline_lets(node: Node) -> Node:
    """Remove let-bindings; every use of a bound name becomes the same node object."""
    memo: dict[tuple[int, tuple], Node] = {}

    def go(n: Node, env: tuple[tuple[str, Node], ...]) -> Node:
        key = (id(n), tuple((k, id(v)) for k, v in env))
        if key in memo:
            return memo[key]
        if isinstance(n, Var):
            out = next((v for k, v in reversed(env) if k == n.name), n)
        elif isinstance(n, Let):
            value = go(n.value, env)
            out = go(n.body, env + ((n.name, value),))
        elif n.children:
            out = rebuild(n, tuple(go(c, env) for c in n.children))
        else:
            out = n
        memo[key] = out
        return out

    return go(node, ())


def tree_size(node: Node, weight: Callable[[Node], int]) -> int:
    """Sum of ``weight`` over the let-expanded tree, counted with multiplicity."""
    memo: dict[int, int] = {}

    def go(n: Node) -> int:
        if id(n) not in memo:
            memo[id(n)] = weight(n) + sum(go(c) for c in n.children)
        return memo[id(n)]

    return go(inline_lets(node))


# validation


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error", "warning" or "note"
    code: str
    message: str
    node: Node | None = field(default=None, compare=False, repr=False)


_FINITE_GATES = frozenset({GateKind.MIN, GateKind.EPSILON, GateKind.FIN, GateKind.FMINUS1})


def may_be_infinite(node: Node) -> bool:
    """Conservative static test: can this node ever denote an infinite set?"""
    memo: dict[int, bool] = {}

    def go(n: Node) -> bool:
        if id(n) in memo:
            return memo[id(n)]
        if isinstance(n, (Var, Nat)):
            out = True
        elif isinstance(n, (Single, FiniteConst, Empty)):
            out = False
        elif isinstance(n, EpLit):
            out = not n.value.is_finite
        elif isinstance(n, Complement):
            out = not isinstance(n.operand, Nat)
        elif isinstance(n, Inter):
            out = go(n.left) and go(n.right)
        elif isinstance(n, Diff):
            out = go(n.left)
        elif isinstance(n, Binary):
            out = go(n.left) or go(n.right)
        elif isinstance(n, Gate):
            if n.kind in _FINITE_GATES:
                out = False
            elif n.kind is GateKind.BELOW:
                out = True
            else:
                out = go(n.operand)
        elif isinstance(n, Let):
            out = go(inline_lets(n))
        else:
            raise TypeError(n)
        memo[id(n)] = out
        return out

    return go(node)


def validate(node: Node, env_names: set[str] | frozenset[str] = frozenset()) -> list[Diagnostic]:
    """Errors for unbound variables, warnings for shadowing lets, and notes for
    productsets whose operands may both be infinite (exact-tier fallback points)."""
    out: list[Diagnostic] = []
    reported: set[str] = set()

    def scan(n: Node, bound: tuple[str, ...]) -> None:
        if isinstance(n, Var):
            if n.name not in bound and n.name not in env_names and n.name not in reported:
                reported.add(n.name)
                out.append(Diagnostic("error", "unbound-variable", f"variable {n.name!r} is not bound", n))
            return
        if isinstance(n, Let):
            if n.name in bound or n.name in env_names:
                out.append(Diagnostic("warning", "shadowed-let", f"let {n.name!r} shadows an outer binding", n))
            scan(n.value, bound)
            scan(n.body, bound + (n.name,))
            return
        for c in n.children:
            scan(c, bound)

    scan(node, ())
    for n in walk(inline_lets(node)):
        if isinstance(n, (Prod, ModProd)) and may_be_infinite(n.left) and may_be_infinite(n.right):
            out.append(
                Diagnostic("note", "product-fallback", f"productset {unparse(n)} may need the bounded tier", n)
            )
    return out
