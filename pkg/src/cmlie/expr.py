"""Parse and render the textual expression dialect.

The grammar (whitespace-insensitive, no implicit multiplication):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' INT)?          -- exponent: non-negative integer literal
    atom   := NUMBER | IDENT | '(' expr ')'

Precedence: '^' binds tighter than unary '-', which binds tighter than
'*' '/', which bind tighter than '+' '-'.  '+' '-' '*' '/' associate left.
Numeric literals (integer, decimal, scientific) convert exactly to
rationals, so e.g. "1e-9" is exactly 1/10^9.

Every parse failure raises ExprError carrying the character position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .algebra import MultiPoly, RatFunc, ZeroDenominatorError


class ExprError(ValueError):
    """Parse or validation failure, with a position into the source text."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'number' | 'ident' | 'op' | 'end'
    text: str
    pos: int


def _tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# AST nodes: ('num', Fraction) | ('sym', name) | ('neg', child)
#          | ('add'|'sub'|'mul'|'div', left, right) | ('pow', base, int)
# Each node carries its source position as the last element.
Node = tuple


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            raise ExprError(f"expected {op!r}", tok.pos)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExprError(f"unexpected trailing input {tok.text!r}", tok.pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance()
            rhs = self.term()
            node = ("add" if op.text == "+" else "sub", node, rhs, op.pos)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance()
            rhs = self.unary()
            node = ("mul" if op.text == "*" else "div", node, rhs, op.pos)
        return node

    def unary(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return ("neg", self.unary(), tok.pos)
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            exp_tok = self.peek()
            if exp_tok.kind == "op" and exp_tok.text == "-":
                raise ExprError("negative exponents are not allowed", exp_tok.pos)
            if exp_tok.kind == "ident":
                raise ExprError("symbolic exponents are not allowed", exp_tok.pos)
            if exp_tok.kind != "number" or not exp_tok.text.isdigit():
                raise ExprError("exponent must be a non-negative integer literal", exp_tok.pos)
            self.advance()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "^":
                raise ExprError("chained '^' needs parentheses around the base", nxt.pos)
            return ("pow", base, int(exp_tok.text), tok.pos)
        return base

    def atom(self) -> Node:
        tok = self.advance()
        if tok.kind == "number":
            return ("num", Fraction(tok.text), tok.pos)
        if tok.kind == "ident":
            return ("sym", tok.text, tok.pos)
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if tok.kind == "end":
            raise ExprError("unexpected end of input", tok.pos)
        raise ExprError(f"unexpected token {tok.text!r}", tok.pos)


def parse_ast(text: str) -> Node:
    """Parse to the raw AST without resolving symbols."""
    if not text or not text.strip():
        raise ExprError("empty expression", 0)
    return _Parser(_tokenize(text)).parse()


def _fold(node: Node, symbols: tuple[str, ...]) -> RatFunc:
    kind = node[0]
    if kind == "num":
        return RatFunc.const(symbols, node[1])
    if kind == "sym":
        name = node[1]
        if name not in symbols:
            raise ExprError(f"unknown identifier {name!r}", node[2])
        return RatFunc.variable(symbols, name)
    if kind == "neg":
        return -_fold(node[1], symbols)
    if kind == "pow":
        return _fold(node[1], symbols) ** node[2]
    left = _fold(node[1], symbols)
    right = _fold(node[2], symbols)
    if kind == "add":
        return left + right
    if kind == "sub":
        return left - right
    if kind == "mul":
        return left * right
    if kind == "div":
        try:
            return left / right
        except ZeroDenominatorError:
            raise ExprError("division by an identically-zero expression", node[3]) from None
    raise AssertionError(f"unhandled node kind {kind!r}")  # pragma: no cover


def parse_expr(text: str, symbols: Sequence[str]) -> RatFunc:
    """Parse ``text`` into an exact rational function over ``symbols``."""
    return _fold(parse_ast(text), tuple(symbols))


def _fraction_str(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _term_str(mono, coeff: Fraction, symbols: tuple[str, ...]) -> str:
    factors = []
    for name, e in zip(symbols, mono):
        if e == 1:
            factors.append(name)
        elif e > 1:
            factors.append(f"{name}^{e}")
    if not factors:
        return _fraction_str(coeff)
    body = "*".join(factors)
    if coeff == 1:
        return body
    if coeff == -1:
        return f"-{body}"
    return f"{_fraction_str(coeff)}*{body}"


def render_poly(p: MultiPoly) -> str:
    """Render a polynomial in descending graded-lex order; re-parses exactly."""
    if p.is_zero:
        return "0"
    parts = []
    for i, (mono, coeff) in enumerate(p.sorted_terms()):
        s = _term_str(mono, coeff, p.symbols)
        if i == 0:
            parts.append(s)
        elif s.startswith("-"):
            parts.append(" - " + s[1:])
        else:
            parts.append(" + " + s)
    return "".join(parts)


def render_expr(v: RatFunc) -> str:
    """Render a rational function so that parse_expr round-trips its value.

    For printing, numerator and denominator are scaled by the denominator's
    rational content so the denominator shows integer coefficients.
    """
    num, den = v.num, v.den
    if den.is_constant:
        return render_poly(num)
    scale = 1 / den.content()
    num = num * scale
    den = den * scale
    num_s = render_poly(num)
    if len(num.terms) > 1 or num_s.startswith("-"):
        num_s = f"({num_s})"
    return f"{num_s}/({render_poly(den)})"
