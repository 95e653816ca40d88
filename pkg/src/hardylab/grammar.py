"""Text grammar for fragment expressions and tuple families.

Terms look like ``3/2 * t^(5/2) * log(t)^2``, joined by ``+``/``-``;
``S[h]{...}`` shifts, ``D{...}`` differentiates, ``O(...)`` records a
truncation tail.  Coefficient polynomials in shift symbols are written in
parentheses: ``(3/2*h + 1) * t^(1/2)``.  Families of tuples are written
``[(expr, expr); (expr, expr)]``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Optional

from .hardy import (
    HardyExpr,
    Offset,
    Term,
    ZERO_EXPR,
    as_offset,
    derivative,
    expr_from_terms,
    lincomb,
    shift,
)
from .qpoly import ONE, Poly

__all__ = ["format_expr", "parse_expr", "format_family", "parse_family", "ParseError"]


class ParseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Printing


def _format_rat(x: Fraction) -> str:
    return str(x)


def _format_exponent(x: Fraction) -> str:
    return str(x) if x.denominator == 1 else f"({x})"


def _format_poly(p: Poly) -> str:
    return f"({p})"


def _term_body(t: Term) -> list[str]:
    parts = []
    if t.p != 0:
        parts.append("t" if t.p == 1 else f"t^{_format_exponent(t.p)}")
    if t.q != 0:
        parts.append("log(t)" if t.q == 1 else f"log(t)^{_format_exponent(t.q)}")
    return parts


def format_expr(e: HardyExpr) -> str:
    if e.is_zero():
        return "0"
    chunks: list[str] = []
    for t in e.terms:
        body = _term_body(t)
        if t.coef.is_constant():
            c = t.coef.constant_value()
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if not body:
                s = _format_rat(mag)
            elif mag == 1:
                s = " * ".join(body)
            else:
                s = " * ".join([_format_rat(mag)] + body)
        else:
            sign = "+"
            s = " * ".join([_format_poly(t.coef)] + body)
        if not chunks:
            chunks.append(s if sign == "+" else f"-{s}")
        else:
            chunks.append(f"{sign} {s}")
    if e.trunc is not None:
        p, q = e.trunc
        body = _term_body(Term(ONE, p, q))
        chunks.append("+ O(%s)" % (" * ".join(body) if body else "1"))
    return " ".join(chunks)


def format_family(tuples: list[tuple]) -> str:
    rows = ["(" + ", ".join(format_expr(e) for e in tup) + ")" for tup in tuples]
    return "[" + "; ".join(rows) + "]"


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d+|\d+)|(?P<name>[A-Za-z]+\d*)|(?P<op>[-+*/^(){}\[\],;]))"
)


def _tokenize(s: str) -> list[str]:
    out = []
    pos = 0
    while pos < len(s):
        m = _TOKEN_RE.match(s, pos)
        if not m:
            if s[pos:].strip():
                raise ParseError(f"unexpected character at: {s[pos:pos+16]!r}")
            break
        out.append(m.group(m.lastgroup))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.i = 0

    def peek(self) -> Optional[str]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            raise ParseError(f"expected {tok!r}, got {got!r}")

    # expr := ['-'] piece (('+'|'-') piece)*
    def expr(self) -> HardyExpr:
        coeffs: list[int] = []
        parts: list[HardyExpr] = []
        marker: Optional[tuple[Fraction, Fraction]] = None
        sign = 1
        if self.peek() == "-":
            self.next()
            sign = -1
        while True:
            piece = self.piece()
            if isinstance(piece, tuple):
                marker = piece if marker is None else max(marker, piece)
            else:
                coeffs.append(sign)
                parts.append(piece)
            tok = self.peek()
            if tok == "+":
                self.next()
                sign = 1
            elif tok == "-":
                self.next()
                sign = -1
            else:
                break
        out = lincomb(coeffs, parts) if parts else ZERO_EXPR
        if marker is not None:
            out = HardyExpr(tuple(t for t in out.terms if t.key() > marker), marker, None)
        return out

    def piece(self):
        tok = self.peek()
        if tok == "S":
            self.next()
            self.expect("[")
            off = self.offset()
            self.expect("]")
            self.expect("{")
            inner = self.expr()
            self.expect("}")
            return shift(inner, off)
        if tok == "D":
            self.next()
            self.expect("{")
            inner = self.expr()
            self.expect("}")
            return derivative(inner)
        if tok == "O":
            self.next()
            self.expect("(")
            p = Fraction(0)
            q = Fraction(0)
            if self.peek() == "1" and self.toks[self.i + 1] == ")":
                self.next()
            else:
                while self.peek() != ")":
                    name = self.next()
                    if name == "t":
                        p = self.opt_exponent()
                    elif name == "log":
                        self.expect("(")
                        self.expect("t")
                        self.expect(")")
                        q = self.opt_exponent()
                    elif name == "*":
                        continue
                    else:
                        raise ParseError(f"unexpected {name!r} in tail marker")
            self.expect(")")
            return (p, q)
        return self.product()

    def product(self) -> HardyExpr:
        coef = ONE
        p = Fraction(0)
        q = Fraction(0)
        saw_factor = False
        while True:
            tok = self.peek()
            if tok is None:
                break
            if tok == "t":
                self.next()
                p += self.opt_exponent()
                saw_factor = True
            elif tok == "log":
                self.next()
                self.expect("(")
                self.expect("t")
                self.expect(")")
                q += self.opt_exponent()
                saw_factor = True
            elif tok == "(":
                self.next()
                coef = coef * self.poly_sum()
                self.expect(")")
                saw_factor = True
            elif tok is not None and _is_number(tok):
                coef = coef * self.rational()
                saw_factor = True
            elif tok is not None and _is_symbol(tok):
                self.next()
                coef = coef * Poly.sym(_symbol_index(tok))
                saw_factor = True
            else:
                break
            if self.peek() == "*":
                self.next()
                continue
            break
        if not saw_factor:
            raise ParseError(f"expected a term, got {self.peek()!r}")
        return expr_from_terms([(coef, p, q)])

    def poly_sum(self) -> Poly:
        total = Poly(0)
        sign = 1
        if self.peek() == "-":
            self.next()
            sign = -1
        while True:
            total = total + self.poly_mono() * sign
            tok = self.peek()
            if tok == "+":
                self.next()
                sign = 1
            elif tok == "-":
                self.next()
                sign = -1
            else:
                return total

    def poly_mono(self) -> Poly:
        out = ONE
        while True:
            tok = self.peek()
            if tok is not None and _is_number(tok):
                out = out * self.rational()
            elif tok is not None and _is_symbol(tok):
                self.next()
                exp = 1
                if self.peek() == "^":
                    self.next()
                    exp = int(self.next())
                out = out * Poly.sym(_symbol_index(tok)) ** exp
            else:
                return out
            if self.peek() == "*":
                self.next()

    def rational(self) -> Fraction:
        tok = self.next()
        val = Fraction(tok)
        if self.peek() == "/":
            self.next()
            val /= Fraction(self.next())
        return val

    def opt_exponent(self) -> Fraction:
        if self.peek() != "^":
            return Fraction(1)
        self.next()
        if self.peek() == "(":
            self.next()
            sign = 1
            if self.peek() == "-":
                self.next()
                sign = -1
            val = self.rational() * sign
            self.expect(")")
            return val
        sign = 1
        if self.peek() == "-":
            self.next()
            sign = -1
        return Fraction(self.next()) * sign

    def offset(self) -> Offset:
        tok = self.peek()
        sign = 1
        if tok == "-":
            self.next()
            sign = -1
            tok = self.peek()
        if tok is not None and _is_symbol(tok):
            if sign < 0:
                raise ParseError("negative formal shift offsets are not supported")
            self.next()
            return as_offset(tok)
        return Offset(const=self.rational() * sign)


def _is_number(tok: str) -> bool:
    return tok[0].isdigit()


def _is_symbol(tok: str) -> bool:
    return tok == "h" or (tok[0] == "h" and tok[1:].isdigit())


def _symbol_index(tok: str) -> int:
    return 1 if tok == "h" else int(tok[1:])


def parse_expr(s: str) -> HardyExpr:
    parser = _Parser(_tokenize(s))
    out = parser.expr()
    if parser.peek() is not None:
        raise ParseError(f"trailing input at token {parser.peek()!r}")
    return out


def parse_family(s: str) -> list[tuple[HardyExpr, ...]]:
    """Parse ``[(expr, expr); (expr, expr)]`` into a list of tuples."""
    s = s.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ParseError("family must be enclosed in [ ... ]")
    body = s[1:-1].strip()
    if not body:
        return []
    tuples = []
    for row in _split_top(body, ";"):
        row = row.strip()
        if not (row.startswith("(") and row.endswith(")")):
            raise ParseError(f"tuple must be parenthesized: {row!r}")
        entries = [parse_expr(part) for part in _split_top(row[1:-1], ",")]
        tuples.append(tuple(entries))
    return tuples


def _split_top(s: str, sep: str) -> list[str]:
    out = []
    depth = 0
    cur = []
    for ch in s:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out
