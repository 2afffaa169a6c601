"""Infix expressions for user-supplied potentials and deformation functions.

The grammar is small on purpose::

    expr    := expr ('+' | '-') expr
             | expr ('*' | '/') expr
             | '-' expr
             | expr '^' expr          (right-associative)
             | NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

Precedence from loosest to tightest is ``+ -``, ``* /``, unary ``-``, ``^``,
so ``-X^2`` is ``-(X^2)`` and ``2^-1`` is ``2^(-1)``.  It is parsed with a
Pratt (top-down operator precedence) parser.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, Union

from .errors import DomainError, ExpressionSyntaxError, UnknownIdentifier

__all__ = [
    "Num", "Var", "Neg", "BinOp", "Call", "Node", "Expression",
    "FUNCTIONS", "parse", "evaluate", "to_source",
]


def _ln(x: float) -> float:
    if x <= 0.0:
        raise ValueError("ln of non-positive number")
    return math.log(x)


FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "ln": _ln,
    "sqrt": math.sqrt,
    "abs": abs,
    "arctan": math.atan,
    "arcsinh": math.asinh,
    "tanh": math.tanh,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]


# ---------------------------------------------------------------- tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'num', 'name', 'op', 'end'
    text: str
    offset: int  # byte offset into the UTF-8 encoded source


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        byte_off = len(source[:pos].encode("utf-8"))
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {source[pos]!r}", byte_off)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), byte_off))
        pos = m.end()
    tokens.append(_Token("end", "", len(source.encode("utf-8"))))
    return tokens


# ------------------------------------------------------------------- parser

_BINARY_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_BP = 30


class _Parser:
    def __init__(self, source: str, variables: frozenset[str]):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.variables = variables

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> None:
        tok = self.advance()
        if tok.text != text:
            found = tok.text or "end of input"
            raise ExpressionSyntaxError(f"expected {text!r}, found {found!r}", tok.offset)

    def expression(self, rbp: int = 0) -> Node:
        left = self.nud(self.advance())
        while True:
            tok = self.peek()
            lbp = _BINARY_BP.get(tok.text, 0) if tok.kind == "op" else 0
            if lbp <= rbp:
                break
            self.advance()
            left = self.led(tok, left)
        return left

    def nud(self, tok: _Token) -> Node:
        if tok.kind == "num":
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExpressionSyntaxError(f"literal {tok.text!r} overflows", tok.offset)
            return Num(value)
        if tok.kind == "name":
            if tok.text in FUNCTIONS:
                nxt = self.peek()
                if nxt.text != "(":
                    raise ExpressionSyntaxError(
                        f"function {tok.text!r} must be followed by '('", nxt.offset)
                self.advance()
                arg = self.expression()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text not in self.variables:
                raise UnknownIdentifier(tok.text, tok.offset)
            return Var(tok.text)
        if tok.text == "-":
            return Neg(self.expression(_UNARY_BP))
        if tok.text == "(":
            inner = self.expression()
            self.expect(")")
            return inner
        if tok.kind == "end":
            raise ExpressionSyntaxError("unexpected end of input", tok.offset)
        raise ExpressionSyntaxError(f"unexpected token {tok.text!r}", tok.offset)

    def led(self, tok: _Token, left: Node) -> Node:
        bp = _BINARY_BP[tok.text]
        # right-associative power: parse the right side one notch looser
        right = self.expression(bp - 1 if tok.text == "^" else bp)
        return BinOp(tok.text, left, right)


# --------------------------------------------------------------- evaluation

def _pow(x: float, y: float) -> float:
    return math.pow(x, y)


_BINARY_FN: dict[str, Callable[[float, float], float]] = {
    "+": lambda x, y: x + y,
    "-": lambda x, y: x - y,
    "*": lambda x, y: x * y,
    "/": lambda x, y: x / y,
    "^": _pow,
}


def _checked(value: float, what: str) -> float:
    if not math.isfinite(value):
        raise DomainError(f"{what} produced non-finite value {value!r}")
    return value


def _compile_node(node: Node) -> Callable[[Mapping[str, float]], float]:
    if isinstance(node, Num):
        v = node.value
        return lambda env: v
    if isinstance(node, Var):
        name = node.name
        return lambda env: env[name]
    if isinstance(node, Neg):
        inner = _compile_node(node.operand)
        return lambda env: -inner(env)
    if isinstance(node, BinOp):
        fn = _BINARY_FN[node.op]
        op = node.op
        lf = _compile_node(node.left)
        rf = _compile_node(node.right)

        def binop(env):
            try:
                return _checked(fn(lf(env), rf(env)), f"operator {op!r}")
            except (ZeroDivisionError, OverflowError, ValueError) as exc:
                raise DomainError(f"operator {op!r}: {exc}") from None
        return binop
    if isinstance(node, Call):
        fn = FUNCTIONS[node.func]
        name = node.func
        af = _compile_node(node.arg)

        def call(env):
            try:
                return _checked(fn(af(env)), f"{name}()")
            except (OverflowError, ValueError) as exc:
                raise DomainError(f"{name}(): {exc}") from None
        return call
    raise TypeError(f"not an expression node: {node!r}")


@dataclass(frozen=True)
class Expression:
    """A parsed expression over a declared set of variable names."""

    root: Node
    variables: frozenset[str]
    source: str = field(default="", compare=False)
    _fn: Callable = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_fn", _compile_node(self.root))

    def __call__(self, **bindings: float) -> float:
        return evaluate(self, bindings)

    def used_variables(self) -> frozenset[str]:
        """Names that actually occur in the tree (a subset of ``variables``)."""
        found = set()
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Var):
                found.add(node.name)
            elif isinstance(node, Neg):
                stack.append(node.operand)
            elif isinstance(node, BinOp):
                stack.extend((node.left, node.right))
            elif isinstance(node, Call):
                stack.append(node.arg)
        return frozenset(found)

    def bind(self, order: Sequence[str]) -> Callable[..., float]:
        """Return a positional callable, e.g. ``expr.bind(("X", "P"))(1.0, 2.0)``."""
        names = tuple(order)
        missing = self.used_variables() - set(names)
        if missing:
            raise UnknownIdentifier(sorted(missing)[0])
        fn = self._fn

        def bound(*args: float) -> float:
            return fn(dict(zip(names, args)))
        return bound

    def __str__(self) -> str:
        return to_source(self.root)


def parse(source: str, variables: Iterable[str]) -> Expression:
    """Parse ``source`` into an :class:`Expression`.

    Raises
    ------
    ExpressionSyntaxError
        Malformed input; carries the byte offset.
    UnknownIdentifier
        A name that is neither a declared variable nor a known function.
    """
    if not source or not source.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    declared = frozenset(variables)
    parser = _Parser(source, declared)
    root = parser.expression()
    tail = parser.peek()
    if tail.kind != "end":
        raise ExpressionSyntaxError(f"unexpected token {tail.text!r}", tail.offset)
    return Expression(root, declared, source)


def evaluate(e: Expression, bindings: Mapping[str, float]) -> float:
    """Evaluate ``e``; never returns a non-finite number (raises DomainError)."""
    missing = e.used_variables() - set(bindings)
    if missing:
        raise KeyError(f"no binding for variable {sorted(missing)[0]!r}")
    env = {k: float(v) for k, v in bindings.items()}
    return e._fn(env)


def to_source(node: Node | Expression) -> str:
    """Fully parenthesised source text that parses back to the same tree."""
    if isinstance(node, Expression):
        node = node.root
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")
