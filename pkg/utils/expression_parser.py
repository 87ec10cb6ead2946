"""Recursive-descent parser for curvature function expressions.

    expr    := product | atom
    product := "product" "(" factor ("," factor)* ")"
    factor  := expr "^" number
    atom    := "mean" | "gauss" | "power" "(" number ")" | "esym" "(" integer ")"
"""

import re
from typing import List, NamedTuple, Optional

from models.curvature_spec import (
    ElemSymRootFamily, Family, GaussPowerFamily, PowerMeanFamily, WeightedProductFamily,
)
from models.errors import ParseError

_TOKEN = re.compile(r"""
    (?P<number>[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<punct>[(),^])
  | (?P<space>\s+)
""", re.VERBOSE)


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str, line: int = 1, column: int = 1) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, column, text)
        chunk = match.group()
        if match.lastgroup != "space":
            value = chunk.lower() if match.lastgroup == "name" else chunk
            tokens.append(Token(match.lastgroup, value, line, column))
        for ch in chunk:
            if ch == "\n":
                line, column = line + 1, 1
            else:
                column += 1
        pos = match.end()
    tokens.append(Token("end", "", line, column))
    return tokens


class ExpressionParser:
    """Parses one expression; positions are reported relative to ``line``/``column``."""

    def __init__(self, text: str, line: int = 1, column: int = 1):
        self.text = text
        self.tokens = tokenize(text, line, column)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _fail(self, message: str, token: Optional[Token] = None):
        token = token or self.current
        found = token.text or "end of input"
        raise ParseError(f"{message}, found '{found}'", token.line, token.column, self.text)

    def _expect(self, kind: str, text: Optional[str] = None) -> Token:
        token = self.current
        if token.kind != kind or (text is not None and token.text != text):
            self._fail(f"expected '{text or kind}'")
        self.pos += 1
        return token

    def _number(self) -> float:
        return float(self._expect("number").text)

    def parse(self) -> Family:
        family = self._expr()
        if self.current.kind != "end":
            self._fail("unexpected trailing input")
        return family

    def _expr(self) -> Family:
        token = self.current
        if token.kind != "name":
            self._fail("expected a curvature function")
        if token.text == "product":
            return self._product()
        return self._atom()

    def _product(self) -> Family:
        self._expect("name", "product")
        self._expect("punct", "(")
        factors = [self._factor()]
        while self.current.text == ",":
            self.pos += 1
            factors.append(self._factor())
        self._expect("punct", ")")
        return WeightedProductFamily(tuple(factors))

    def _factor(self):
        sub = self._expr()
        self._expect("punct", "^")
        return sub, self._number()

    def _atom(self) -> Family:
        token = self._expect("name")
        if token.text == "mean":
            return PowerMeanFamily(1.0)
        if token.text == "gauss":
            return GaussPowerFamily()
        if token.text == "power":
            self._expect("punct", "(")
            r = self._number()
            self._expect("punct", ")")
            return PowerMeanFamily(r)
        if token.text == "esym":
            self._expect("punct", "(")
            number = self.current
            k = self._number()
            if k != int(k):
                self._fail("esym order must be an integer", number)
            self._expect("punct", ")")
            return ElemSymRootFamily(int(k))
        self._fail("unknown curvature function", token)


def parse_expression(text: str, line: int = 1, column: int = 1) -> Family:
    """Family tree for ``text``, e.g. ``product(gauss^0.5, mean^0.5)``."""
    return ExpressionParser(text, line, column).parse()
