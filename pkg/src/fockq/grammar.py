"""
Parser for symbol expressions.

Grammar (whitespace is ignored)::

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := "-" unary | atom
    atom   := number | "z" | "zbar" | call | "(" expr ")"
    call   := name "(" arguments ")"
    number := real | real "i"

Recognized calls::

    const(c)              phase(alpha)          planewave(xi)
    radial_dyadic(J)      disk(r)               radial([b...], [v...], v0)
    conj(f)               re(f)                 scale(f, s)
    translate(f, w)

Numeric arguments of calls accept a leading sign and the two-part form
``a+bi`` (``const(-1+2i)``). Outside calls ``+`` and ``-`` are always
operators, so ``1-2i*z`` is ``1 - (2i z)``. The canonical printer
(``Symbol.to_expr``) produces text this parser maps back to an equal symbol.
"""

import re

from . import symbols as sym
from .errors import SymbolSyntaxError

_REAL = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TOKEN_RE = re.compile(
    rf"""
    (?P<ws>\s+)
  | (?P<num>{_REAL}i?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*(),\[\]])
    """,
    re.VERBOSE,
)


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind, self.text, self.pos = kind, text, pos

    def __repr__(self):
        return f"_Token({self.kind!r}, {self.text!r}, {self.pos})"


def _tokenize(expr):
    tokens = []
    pos = 0
    while pos < len(expr):
        m = _TOKEN_RE.match(expr, pos)
        if m is None:
            raise SymbolSyntaxError(f"unexpected character {expr[pos]!r}", expr, pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(expr)))
    return tokens


def _literal_value(text):
    if text.endswith("i"):
        return complex(0.0, float(text[:-1]))
    return float(text)


class _Parser:
    def __init__(self, expr):
        self.expr = expr
        self.tokens = _tokenize(expr)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, tok=None):
        tok = self.tok if tok is None else tok
        raise SymbolSyntaxError(message, self.expr, tok.pos)

    def advance(self):
        tok = self.tok
        self.i += 1
        return tok

    def accept(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            return self.advance()
        return None

    def expect(self, text):
        if self.accept(text) is None:
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")

    def parse(self):
        out = self.parse_expr()
        if self.tok.kind != "end":
            self.error(f"unexpected {self.tok.text!r}")
        return out

    def parse_expr(self):
        out = self.parse_term()
        while True:
            if self.accept("+"):
                out = sym.Sum(out, self.parse_term())
            elif self.accept("-"):
                out = sym.Sum(out, sym.Product(sym.Constant(-1.0), self.parse_term()))
            else:
                return out

    def parse_term(self):
        out = self.parse_unary()
        while self.accept("*"):
            out = sym.Product(out, self.parse_unary())
        return out

    def parse_unary(self):
        if self.accept("-"):
            return sym.Product(sym.Constant(-1.0), self.parse_unary())
        return self.parse_atom()

    def parse_atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return sym.Constant(_literal_value(tok.text))
        elif tok.kind == "name":
            self.advance()
            if tok.text == "z":
                return sym.Z
            elif tok.text == "zbar":
                return sym.ZBAR
            elif tok.text not in _CALLS:
                self.error(f"unknown function {tok.text!r}", tok)
            self.expect("(")
            out = _CALLS[tok.text](self, tok)
            self.expect(")")
            return out
        elif self.accept("("):
            out = self.parse_expr()
            self.expect(")")
            return out
        found = tok.text or "end of input"
        self.error(f"expected a number, a coordinate or a call, found {found!r}")

    # numeric arguments

    def parse_number(self, real=False):
        negate = self.accept("-") is not None
        tok = self.tok
        if tok.kind != "num":
            self.error("expected a number")
        self.advance()
        val = _literal_value(tok.text)
        if negate:
            val = -val
        if not isinstance(val, complex) and self.tok.text in ("+", "-"):
            # "a+bi" / "a-bi"; the "end" token always follows an operator
            nxt = self.tokens[self.i + 1]
            if nxt.kind == "num" and nxt.text.endswith("i"):
                sign = self.advance().text
                imag = _literal_value(self.advance().text).imag
                val = complex(val, imag if sign == "+" else -imag)
        if real:
            if isinstance(val, complex):
                self.error("expected a real number", tok)
            return val
        return complex(val)

    def parse_int(self):
        tok = self.tok
        val = self.parse_number(real=True)
        if val != int(val):
            self.error("expected an integer", tok)
        return int(val)

    def parse_list(self):
        self.expect("[")
        out = []
        if self.accept("]"):
            return out
        while True:
            out.append(self.parse_number())
            if self.accept("]"):
                return out
            self.expect(",")


def _call_const(p, tok):
    return sym.Constant(p.parse_number())


def _call_phase(p, tok):
    return sym.QuadraticPhase(p.parse_number(real=True))


def _call_planewave(p, tok):
    return sym.PlaneWave(p.parse_number())


def _call_radial_dyadic(p, tok):
    J = p.parse_int()
    try:
        return sym.radial_dyadic(J)
    except ValueError as err:
        p.error(str(err), tok)


def _call_disk(p, tok):
    radius = p.parse_number(real=True)
    if not radius > 0:
        p.error("the disk radius must be positive", tok)
    return sym.disk_indicator(radius)


def _call_radial(p, tok):
    breaks = p.parse_list()
    p.expect(",")
    values = p.parse_list()
    p.expect(",")
    at_zero = p.parse_number()
    if any(b.imag != 0 for b in breaks):
        p.error("radial breaks must be real", tok)
    try:
        return sym.RadialPiecewise(tuple(b.real for b in breaks), tuple(values), at_zero)
    except ValueError as err:
        p.error(str(err), tok)


def _call_conj(p, tok):
    return sym.Conjugate(p.parse_expr())


def _call_re(p, tok):
    return sym.real_part(p.parse_expr())


def _call_scale(p, tok):
    inner = p.parse_expr()
    p.expect(",")
    factor = p.parse_number(real=True)
    if not factor > 0:
        p.error("the scale factor must be positive", tok)
    return sym.Scaled(inner, factor)


def _call_translate(p, tok):
    inner = p.parse_expr()
    p.expect(",")
    return sym.Translated(inner, p.parse_number())


_CALLS = {
    "const": _call_const,
    "phase": _call_phase,
    "planewave": _call_planewave,
    "radial_dyadic": _call_radial_dyadic,
    "disk": _call_disk,
    "radial": _call_radial,
    "conj": _call_conj,
    "re": _call_re,
    "scale": _call_scale,
    "translate": _call_translate,
}


def parse_symbol(expr):
    """
    Parse a symbol expression (see the module docstring for the grammar).

    Raises
    ------
    SymbolSyntaxError
        With the column of the offending token
    """
    if not isinstance(expr, str):
        raise TypeError(f"expected a string, got {type(expr).__name__}")
    return _Parser(expr).parse()
