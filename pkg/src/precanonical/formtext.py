"""Human-readable syntax for polynomials and horizontal forms.

Grammar (whitespace insignificant)::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor (('*' factor) | ('/' INT))*
    factor := NUMBER | VAR ['^' INT] | BASIS | '(' expr ')'
    VAR    := x[i] | y[a] | p[i,a]
    BASIS  := w | w[i] | dx[i] ('^' dx[j])*

``w`` is the volume form dx[0]^...^dx[n-1] and ``w[i]`` its contraction
with the i-th coordinate vector.  Example: ``p[0,0]*w[0] + y[0]^2*dx[0]^dx[1]``.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import TYPE_CHECKING

from .poly import Poly

if TYPE_CHECKING:
    from .gradedforms import HorizontalForm, PhaseContext

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_]\w*(?:\[[\d,\s]*\])?)|(?P<op>[-+*/^()]))"
)
_VAR = re.compile(r"^(x|y|p)\[(\d+)(?:,(\d+))?\]$")


class FormSyntaxError(ValueError):
    pass


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormSyntaxError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind).replace(" ", "")))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def _wedge_keys(a: tuple[int, ...], b: tuple[int, ...]):
    if set(a) & set(b):
        return 0, None
    merged = list(a + b)
    sign = 1
    # bubble sort keeps track of the permutation parity
    for i in range(len(merged)):
        for j in range(len(merged) - 1 - i):
            if merged[j] > merged[j + 1]:
                merged[j], merged[j + 1] = merged[j + 1], merged[j]
                sign = -sign
    return sign, tuple(merged)


class _Parser:
    def __init__(self, text: str, n: int | None, m: int | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n = n
        self.m = m

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise FormSyntaxError(f"expected {op!r}, got {val!r}")

    def parse(self) -> dict:
        value = self.expr()
        if self.i != len(self.tokens):
            raise FormSyntaxError(f"trailing input at token {self.peek()[1]!r}")
        return value

    # values are dicts: increasing horizontal multi-index -> Poly
    def expr(self) -> dict:
        sign = 1
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        total = _scale(self.term(), sign)
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                total = _add(total, _scale(self.term(), -1 if val == "-" else 1))
            else:
                return total

    def term(self) -> dict:
        value = self.factor()
        while True:
            kind, val = self.peek()
            if kind == "op" and val == "*":
                self.take()
                value = _mul(value, self.factor())
            elif kind == "op" and val == "/":
                self.take()
                k, d = self.take()
                if k != "num" or "." in d or int(d) == 0:
                    raise FormSyntaxError("division only by nonzero integers")
                value = _scale(value, Fraction(1, int(d)))
            else:
                return value

    def factor(self) -> dict:
        kind, val = self.take()
        if kind == "num":
            return {(): Poly.const(Fraction(val))}
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        if kind == "name":
            if val == "w" or val.startswith("w["):
                return self.omega(val)
            if val.startswith("dx["):
                return self.dx_chain(val)
            poly = Poly.var(self.check_var(val))
            k, v = self.peek()
            if k == "op" and v == "^":
                self.take()
                k, e = self.take()
                if k != "num" or "." in e:
                    raise FormSyntaxError("exponent must be a nonnegative integer")
                poly = poly ** int(e)
            return {(): poly}
        raise FormSyntaxError(f"unexpected token {val!r}")

    def check_var(self, name: str) -> str:
        m = _VAR.match(name)
        if not m:
            raise FormSyntaxError(f"unknown variable {name!r}")
        head, i, a = m.group(1), int(m.group(2)), m.group(3)
        if head == "p":
            if a is None:
                raise FormSyntaxError(f"polymomentum needs two indices: {name!r}")
            a = int(a)
            if self.n is not None and not (i < self.n and a < self.m):
                raise FormSyntaxError(f"index out of range in {name!r}")
            return f"p[{i},{a}]"
        if a is not None:
            raise FormSyntaxError(f"{head} takes a single index: {name!r}")
        bound = self.n if head == "x" else self.m
        if bound is not None and i >= bound:
            raise FormSyntaxError(f"index out of range in {name!r}")
        return f"{head}[{i}]"

    def need_n(self) -> int:
        if self.n is None:
            raise FormSyntaxError("horizontal basis elements need a phase context")
        return self.n

    def omega(self, val: str) -> dict:
        n = self.need_n()
        if val == "w":
            return {tuple(range(n)): Poly.const(1)}
        i = int(val[2:-1])
        if i >= n:
            raise FormSyntaxError(f"index out of range in {val!r}")
        rest = tuple(j for j in range(n) if j != i)
        return {rest: Poly.const(-1 if i % 2 else 1)}

    def dx_chain(self, val: str) -> dict:
        n = self.need_n()
        indices = []
        while True:
            i = int(val[3:-1])
            if i >= n:
                raise FormSyntaxError(f"index out of range in {val!r}")
            indices.append(i)
            k, v = self.peek()
            nxt = self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else (None, None)
            if k == "op" and v == "^" and nxt[0] == "name" and nxt[1].startswith("dx["):
                self.take()
                _, val = self.take()
            else:
                break
        sign, key = _wedge_keys((), tuple(indices)) if len(set(indices)) == len(indices) else (0, None)
        return {key: Poly.const(sign)} if sign else {}


def _add(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, Poly()) + v
    return {k: v for k, v in out.items() if not v.is_zero()}


def _scale(a: dict, c) -> dict:
    return {k: v * c for k, v in a.items() if not (v * c).is_zero()}


def _mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            s, key = _wedge_keys(ka, kb)
            if s:
                out[key] = out.get(key, Poly()) + va * vb * s
    return {k: v for k, v in out.items() if not v.is_zero()}


def parse_poly(text: str, n: int | None = None, m: int | None = None) -> Poly:
    value = _Parser(text, n, m).parse()
    if any(k != () for k in value):
        raise FormSyntaxError("expected a polynomial, found horizontal basis elements")
    return value.get((), Poly())


def parse_form(text: str, ctx: "PhaseContext", degree: int | None = None) -> "HorizontalForm":
    from .gradedforms import HorizontalForm

    value = _Parser(text, ctx.n, ctx.m).parse()
    degrees = {len(k) for k in value}
    if len(degrees) > 1:
        raise FormSyntaxError(f"mixed form degrees {sorted(degrees)}")
    if degrees:
        found = degrees.pop()
        if degree is not None and degree != found:
            raise FormSyntaxError(f"expected a {degree}-form, parsed a {found}-form")
        degree = found
    elif degree is None:
        degree = 0
    return HorizontalForm(ctx, degree, value)


# -- printing ----------------------------------------------------------------
def _format_coeff(c: Fraction, bare: bool) -> tuple[str, str]:
    sign = "-" if c < 0 else "+"
    a = abs(c)
    if bare and a == 1:
        body = ""
    else:
        body = str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
    return sign, body


def _format_terms(items, suffix: str = "") -> list[str]:
    parts = []
    for mono, c in items:
        factors = [v if e == 1 else f"{v}^{e}" for v, e in mono]
        if suffix:
            factors.append(suffix)
        sign, body = _format_coeff(c, bare=bool(factors))
        text = "*".join(([body] if body else []) + factors)
        parts.append((sign, text))
    return parts


def _join(parts) -> str:
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, text in parts[1:]:
        out += f" {sign} {text}"
    return out


def format_poly(p: Poly) -> str:
    return _join(_format_terms(p.sorted_terms()))


def format_form(form: "HorizontalForm") -> str:
    n, q = form.ctx.n, form.degree
    parts = []
    if q == 0:
        poly = form.coeffs.get((), Poly())
        return format_poly(poly)
    if q == n:
        poly = form.coeffs.get(tuple(range(n)), Poly())
        return _join(_format_terms(poly.sorted_terms(), "w"))
    if q == n - 1:
        for i, poly in sorted(form.omega_components().items()):
            parts += _format_terms(poly.sorted_terms(), f"w[{i}]")
        return _join(parts)
    for key in sorted(form.coeffs):
        basis = "^".join(f"dx[{i}]" for i in key)
        parts += _format_terms(form.coeffs[key].sorted_terms(), basis)
    return _join(parts)
