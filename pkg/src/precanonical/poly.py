"""Sparse multivariate polynomials with exact rational coefficients.

Variables are plain strings such as ``"y[0]"`` or ``"p[1,0]"``.  A monomial
is a tuple of ``(variable, exponent)`` pairs sorted by variable name, so two
polynomials are equal iff their term dictionaries are equal.
"""
from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

Monomial = tuple[tuple[str, int], ...]

_ONE: Monomial = ()


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def _var_key(name: str):
    # sort "y[2]" before "y[10]"
    head, _, rest = name.partition("[")
    nums = tuple(int(t) for t in re.findall(r"-?\d+", rest))
    return (head, nums, name)


class Poly:
    """Immutable polynomial; the zero polynomial has an empty term map."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        clean = {}
        if terms:
            for mono, c in terms.items():
                c = Fraction(c)
                if c:
                    clean[mono] = c
        self._terms = clean
        self._hash = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def const(cls, c) -> "Poly":
        return cls({_ONE: Fraction(c)})

    @classmethod
    def var(cls, name: str, power: int = 1) -> "Poly":
        if power < 0:
            raise ValueError("negative powers are not polynomial")
        if power == 0:
            return cls.const(1)
        return cls({((name, power),): Fraction(1)})

    @classmethod
    def coerce(cls, value) -> "Poly":
        if isinstance(value, Poly):
            return value
        if isinstance(value, (int, Rational)):
            return cls.const(value)
        if isinstance(value, str):
            from .formtext import parse_poly

            return parse_poly(value)
        raise TypeError(f"cannot interpret {value!r} as a polynomial")

    # -- basic protocol -----------------------------------------------------
    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            try:
                other = Poly.coerce(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def variables(self) -> set[str]:
        return {v for mono in self._terms for v, _ in mono}

    def degree(self) -> int:
        return max((sum(e for _, e in mono) for mono in self._terms), default=0)

    def constant_term(self) -> Fraction:
        return self._terms.get(_ONE, Fraction(0))

    def is_constant(self) -> bool:
        return all(mono == _ONE for mono in self._terms)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = Poly.coerce(other)
        out = dict(self._terms)
        for mono, c in other._terms.items():
            out[mono] = out.get(mono, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-Poly.coerce(other))

    def __rsub__(self, other):
        return Poly.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Rational)):
            return Poly({m: c * other for m, c in self._terms.items()})
        other = Poly.coerce(other)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, (int, Rational)):
            raise TypeError("polynomials can only be divided by rational constants")
        return self * (Fraction(1) / Fraction(other))

    def __pow__(self, k: int):
        out = Poly.const(1)
        for _ in range(k):
            out = out * self
        return out

    # -- calculus and evaluation -------------------------------------------
    def diff(self, name: str) -> "Poly":
        out: dict[Monomial, Fraction] = {}
        for mono, c in self._terms.items():
            exps = dict(mono)
            e = exps.get(name, 0)
            if not e:
                continue
            if e == 1:
                del exps[name]
            else:
                exps[name] = e - 1
            m = tuple(sorted(exps.items()))
            out[m] = out.get(m, 0) + c * e
        return Poly(out)

    def subs(self, values: Mapping[str, "Poly | int | Fraction"]) -> "Poly":
        out = Poly()
        for mono, c in self._terms.items():
            term = Poly.const(c)
            for v, e in mono:
                term = term * (Poly.coerce(values[v]) ** e if v in values else Poly.var(v, e))
            out = out + term
        return out

    def __call__(self, env: Mapping[str, complex]):
        """Numerical value with variables taken from ``env`` (floats or numpy arrays)."""
        total = 0.0
        for mono, c in self._terms.items():
            term = float(c)
            for v, e in mono:
                try:
                    term = term * env[v] ** e
                except KeyError:
                    raise KeyError(f"no value supplied for variable {v}") from None
            total = total + term
        return total

    def univariate_coeffs(self, name: str) -> list[Fraction]:
        """Ascending coefficients of a polynomial in the single variable ``name``."""
        extra = self.variables() - {name}
        if extra:
            raise ValueError(f"polynomial also depends on {sorted(extra)}")
        coeffs = [Fraction(0)] * (self.degree() + 1)
        for mono, c in self._terms.items():
            coeffs[dict(mono).get(name, 0)] += c
        return coeffs

    # -- printing -----------------------------------------------------------
    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        def key(item):
            mono, _ = item
            return (-sum(e for _, e in mono), [(_var_key(v), -e) for v, e in mono])

        return sorted(self._terms.items(), key=key)

    def __str__(self):
        from .formtext import format_poly

        return format_poly(self)

    def __repr__(self):
        return f"Poly({str(self)!r})"


def sum_polys(polys: Iterable[Poly]) -> Poly:
    out: dict[Monomial, Fraction] = {}
    for p in polys:
        for mono, c in p.items():
            out[mono] = out.get(mono, 0) + c
    return Poly(out)
