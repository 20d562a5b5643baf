"""Plain-text syntax for series:  ``c * x^q * exp(i*w*x) * y^p * exp(a*y)``.

Terms are joined with ``+`` or ``-``.  Coefficients are real literals or
complex pairs ``(re,im)``; every factor is optional.  :func:`format_series`
writes the canonical form that :func:`parse_series` reads back.
"""
from __future__ import annotations

import re

from .algebra import SeriesFunction, Term

_TOKEN = re.compile(r"""
    \s*(?:
      (?P<num>[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)
    | (?P<name>exp|x|y|i)
    | (?P<op>[-+*^(),])
    )""", re.VERBOSE)


class ParseError(ValueError):
    pass


def _tokenize(s):
    pos, out = 0, []
    s = s.strip()
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected input at {pos}: {s[pos:pos + 10]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise ParseError(f"expected {value!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def signed_number(self):
        sign = 1.0
        while self.peek()[1] in ("+", "-"):
            if self.take()[1] == "-":
                sign = -sign
        kind, val = self.take()
        if kind != "num":
            raise ParseError(f"expected number, got {val!r}")
        return sign * float(val)

    def series(self):
        terms = []
        sign = 1.0
        if self.peek()[1] in ("+", "-"):
            sign = -1.0 if self.take()[1] == "-" else 1.0
        terms.append(self.term(sign))
        while self.peek()[1] in ("+", "-"):
            sign = -1.0 if self.take()[1] == "-" else 1.0
            terms.append(self.term(sign))
        if self.peek()[0] is not None:
            raise ParseError(f"trailing input {self.peek()[1]!r}")
        return SeriesFunction(terms)

    def term(self, sign):
        coeff, xpow, xfreq, ypow, yrate = complex(sign), 0, 0.0, 0, 0.0
        while True:
            c, xp, xf, yp, yr = self.factor()
            coeff *= c
            xpow += xp
            xfreq += xf
            ypow += yp
            yrate += yr
            if self.peek()[1] != "*":
                break
            self.take("*")
        return Term(coeff, xpow, xfreq, ypow, yrate)

    def factor(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return float(val), 0, 0.0, 0, 0.0
        if val == "(":
            self.take("(")
            re_ = self.signed_number()
            self.take(",")
            im = self.signed_number()
            self.take(")")
            return complex(re_, im), 0, 0.0, 0, 0.0
        if val in ("x", "y"):
            self.take()
            p = 1
            if self.peek()[1] == "^":
                self.take("^")
                p = int(self.signed_number())
            return (1.0, p, 0.0, 0, 0.0) if val == "x" else (1.0, 0, 0.0, p, 0.0)
        if val == "exp":
            self.take()
            self.take("(")
            imag = False
            if self.peek()[1] == "i":
                self.take("i")
                self.take("*")
                imag = True
            rate = self.signed_number()
            self.take("*")
            var = self.take()[1]
            self.take(")")
            if var == "x" and imag:
                return 1.0, 0, rate, 0, 0.0
            if var == "y" and not imag:
                return 1.0, 0, 0.0, 0, rate
            raise ParseError("only exp(i*w*x) and exp(a*y) are admissible")
        raise ParseError(f"unexpected token {val!r}")


def parse_series(text: str) -> SeriesFunction:
    """Parse the text syntax into a :class:`SeriesFunction`."""
    if not text.strip() or text.strip() == "0":
        return SeriesFunction()
    return _Parser(text).series()


def _num(v: float) -> str:
    return repr(float(v))


def format_term(t: Term) -> str:
    parts = [f"({_num(t.coeff.real)},{_num(t.coeff.imag)})"]
    if t.xpow:
        parts.append(f"x^{t.xpow}")
    if t.xfreq:
        parts.append(f"exp(i*{_num(t.xfreq)}*x)")
    if t.ypow:
        parts.append(f"y^{t.ypow}")
    if t.yrate:
        parts.append(f"exp({_num(t.yrate)}*y)")
    return " * ".join(parts)


def format_series(f: SeriesFunction) -> str:
    if not f:
        return "0"
    return " + ".join(format_term(t) for t in f)
