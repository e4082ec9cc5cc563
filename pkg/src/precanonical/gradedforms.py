"""Graded Poisson bracket on horizontal forms over the polymomentum phase space.

Coordinates are ``x[i]`` (horizontal, i < n), ``y[a]`` and ``p[i,a]``
(vertical, a < m).  Every exterior object is stored on the global coframe
ordered as x, y, p; a key is a strictly increasing tuple of global indices.

Conventions
-----------
* ``w = dx[0]^...^dx[n-1]`` and ``w[i] = d/dx^i _| w``.
* ``Omega = -dy^a ^ dp^i_a ^ w[i]``.
* A vertical multivector ``d/dz^v ^ d/dx^{j1} ^ ... ^ d/dx^{jk}`` contracts as
  ``i_{jk} ... i_{j1} i_v``: the vertical vector first, then the horizontal
  ones in increasing order.
* ``{F1, F2} = (-1)^(n-r) X_1 _| d^V F2``; for ``r = n`` the tangent-valued
  one-form acts by ``X^v_k dx^k ^ (d/dz^v _| .)``.

With these choices the canonical brackets come out as
``{p_a, y^b} = delta``, ``{p^i_a, y^b w[j]} = delta delta`` and
``{p_a, y^b w[j]} = delta w[j]`` for every n.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from math import comb
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    InvalidParameter,
    InvalidSolutionData,
    NotHamiltonian,
    UndefinedBracketDegree,
    UnsupportedDegree,
)
from .poly import Poly

Key = tuple[int, ...]


@dataclass(frozen=True)
class PhaseContext:
    n: int
    m: int = 1

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise InvalidParameter(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")

    @cached_property
    def x_names(self) -> tuple[str, ...]:
        return tuple(f"x[{i}]" for i in range(self.n))

    @cached_property
    def vertical(self) -> tuple[str, ...]:
        ys = tuple(f"y[{a}]" for a in range(self.m))
        ps = tuple(f"p[{i},{a}]" for i in range(self.n) for a in range(self.m))
        return ys + ps

    def y(self, a: int) -> Poly:
        return Poly.var(f"y[{a}]")

    def p(self, i: int, a: int) -> Poly:
        return Poly.var(f"p[{i},{a}]")

    def x(self, i: int) -> Poly:
        return Poly.var(f"x[{i}]")

    def vindex(self, name: str) -> int:
        return self.vertical.index(name)

    def gidx(self, v: int) -> int:
        """Global coframe index of vertical variable ``v``."""
        return self.n + v

    @property
    def supported_degrees(self) -> frozenset[int]:
        return frozenset({0, self.n - 1, self.n})


# -- exterior algebra on the full coframe -----------------------------------
def _merge(a: Key, b: Key):
    if set(a) & set(b):
        return 0, ()
    merged = list(a + b)
    inversions = sum(1 for i in range(len(merged)) for j in range(i + 1, len(merged)) if merged[i] > merged[j])
    return (-1 if inversions & 1 else 1), tuple(sorted(merged))


def _is_zero(c) -> bool:
    return c.is_zero() if isinstance(c, Poly) else c == 0


def _accumulate(out: dict, key: Key, value) -> None:
    if key in out:
        out[key] = out[key] + value
    else:
        out[key] = value


def _clean(form: dict) -> dict:
    return {k: v for k, v in form.items() if not _is_zero(v)}


def ext_wedge(f: Mapping, g: Mapping) -> dict:
    out: dict = {}
    for ka, va in f.items():
        for kb, vb in g.items():
            s, key = _merge(ka, kb)
            if s:
                _accumulate(out, key, va * vb * s)
    return _clean(out)


def ext_interior(c: int, f: Mapping) -> dict:
    """Contraction of the coordinate vector with global index ``c`` into ``f``."""
    out: dict = {}
    for key, val in f.items():
        if c in key:
            pos = key.index(c)
            _accumulate(out, key[:pos] + key[pos + 1:], val * (-1 if pos & 1 else 1))
    return _clean(out)


def _omega_key(n: int, i: int) -> tuple[Key, int]:
    """``w[i]`` in the dx basis."""
    return tuple(j for j in range(n) if j != i), (-1 if i & 1 else 1)


@lru_cache(maxsize=None)
def polysymplectic(ctx: PhaseContext) -> dict:
    """``Omega = -dy^a ^ dp^i_a ^ w[i]`` as a coframe expansion with integer coefficients."""
    omega: dict = {}
    for a in range(ctx.m):
        ya = ctx.gidx(ctx.vindex(f"y[{a}]"))
        for i in range(ctx.n):
            pia = ctx.gidx(ctx.vindex(f"p[{i},{a}]"))
            wkey, wsign = _omega_key(ctx.n, i)
            term = ext_wedge({(ya,): 1}, ext_wedge({(pia,): 1}, {wkey: wsign}))
            for k, v in term.items():
                _accumulate(omega, k, -v)
    return _clean(omega)


# -- horizontal forms --------------------------------------------------------
class HorizontalForm:
    """``sum_I F_I dx^I`` over increasing horizontal multi-indices ``I``."""

    __slots__ = ("ctx", "degree", "coeffs")

    def __init__(self, ctx: PhaseContext, degree: int, coeffs: Mapping[Key, Poly] | None = None):
        if not 0 <= degree <= ctx.n:
            raise UnsupportedDegree(f"degree {degree} outside 0..{ctx.n}")
        clean = {}
        for key, val in (coeffs or {}).items():
            key = tuple(key)
            if len(key) != degree or list(key) != sorted(set(key)) or (key and key[-1] >= ctx.n):
                raise ValueError(f"bad multi-index {key} for a {degree}-form")
            val = Poly.coerce(val)
            if not val.is_zero():
                clean[key] = val
        self.ctx = ctx
        self.degree = degree
        self.coeffs = clean

    @classmethod
    def scalar(cls, ctx: PhaseContext, poly) -> "HorizontalForm":
        return cls(ctx, 0, {(): Poly.coerce(poly)})

    @classmethod
    def from_omega(cls, ctx: PhaseContext, components: Mapping[int, Poly]) -> "HorizontalForm":
        """``sum_i F^i w[i]``, an (n-1)-form."""
        coeffs: dict = {}
        for i, poly in components.items():
            key, sign = _omega_key(ctx.n, i)
            _accumulate(coeffs, key, Poly.coerce(poly) * sign)
        return cls(ctx, ctx.n - 1, coeffs)

    @classmethod
    def volume(cls, ctx: PhaseContext, poly) -> "HorizontalForm":
        """``F w``, an n-form."""
        return cls(ctx, ctx.n, {tuple(range(ctx.n)): Poly.coerce(poly)})

    @classmethod
    def parse(cls, text: str, ctx: PhaseContext, degree: int | None = None) -> "HorizontalForm":
        from .formtext import parse_form

        return parse_form(text, ctx, degree)

    def omega_components(self) -> dict[int, Poly]:
        if self.degree != self.ctx.n - 1:
            raise UnsupportedDegree("omega components exist only for (n-1)-forms")
        out = {}
        for i in range(self.ctx.n):
            key, sign = _omega_key(self.ctx.n, i)
            if key in self.coeffs:
                out[i] = self.coeffs[key] * sign
        return out

    def volume_coefficient(self) -> Poly:
        if self.degree != self.ctx.n:
            raise UnsupportedDegree("volume coefficient exists only for n-forms")
        return self.coeffs.get(tuple(range(self.ctx.n)), Poly())

    def is_zero(self) -> bool:
        return not self.coeffs

    def _binary(self, other: "HorizontalForm", sign: int) -> "HorizontalForm":
        if other.ctx != self.ctx or other.degree != self.degree:
            raise ValueError("forms must share context and degree")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Poly()) + v * sign
        return HorizontalForm(self.ctx, self.degree, out)

    def __add__(self, other):
        return self._binary(other, 1)

    def __sub__(self, other):
        return self._binary(other, -1)

    def __neg__(self):
        return self * -1

    def __mul__(self, c):
        return HorizontalForm(self.ctx, self.degree, {k: v * c for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, HorizontalForm):
            return self.ctx == other.ctx and self.degree == other.degree and self.coeffs == other.coeffs
        if self.degree == 0:
            try:
                return self.coeffs.get((), Poly()) == Poly.coerce(other)
            except TypeError:
                return NotImplemented
        return NotImplemented

    def __hash__(self):
        return hash((self.ctx, self.degree, frozenset(self.coeffs.items())))

    def __str__(self):
        from .formtext import format_form

        return format_form(self)

    def __repr__(self):
        return f"HorizontalForm(n={self.ctx.n}, degree={self.degree}, {str(self)!r})"


# -- vertical differential ---------------------------------------------------
@dataclass(frozen=True)
class VerticalDifferential:
    """``d^V F = sum dF_I/dz^v dz^v ^ dx^I``; ``terms[(v, I)]`` holds the coefficient."""

    ctx: PhaseContext
    degree: int
    terms: Mapping[tuple[int, Key], Poly]

    def to_ext(self) -> dict:
        out: dict = {}
        for (v, key), val in self.terms.items():
            # dz^v ^ dx^I = (-1)^|I| dx^I ^ dz^v
            sign = -1 if len(key) & 1 else 1
            _accumulate(out, key + (self.ctx.gidx(v),), val * sign)
        return _clean(out)


def _check_degree(F: HorizontalForm) -> None:
    if F.degree not in F.ctx.supported_degrees:
        raise UnsupportedDegree(
            f"degree {F.degree} not in the supported set {sorted(F.ctx.supported_degrees)} for n={F.ctx.n}"
        )


def vertical_differential(F: HorizontalForm) -> VerticalDifferential:
    _check_degree(F)
    terms = {}
    for key, val in F.coeffs.items():
        for v, name in enumerate(F.ctx.vertical):
            d = val.diff(name)
            if not d.is_zero():
                terms[(v, key)] = d
    return VerticalDifferential(F.ctx, F.degree, terms)


# -- linear solve for the polysymplectic map --------------------------------
@dataclass(frozen=True)
class _LinearSystem:
    """Row-reduced form of the contraction map ``X -> X _| Omega``."""

    unknowns: tuple
    rows: tuple[Key, ...]
    row_index: Mapping[Key, int]
    transform: tuple[tuple[Fraction, ...], ...]  # E with E @ A = rref
    rref: tuple[tuple[Fraction, ...], ...]
    pivots: tuple[int, ...]

    @cached_property
    def free(self) -> tuple[int, ...]:
        return tuple(c for c in range(len(self.unknowns)) if c not in self.pivots)

    def null_basis(self) -> list[dict]:
        basis = []
        for f in self.free:
            vec = {self.unknowns[f]: Fraction(1)}
            for r, pc in enumerate(self.pivots):
                if self.rref[r][f]:
                    vec[self.unknowns[pc]] = -self.rref[r][f]
            basis.append(vec)
        return basis


def _row_reduce(A: list[list[Fraction]]):
    rows, cols = len(A), len(A[0]) if A else 0
    M = [list(r) + [Fraction(int(i == j)) for j in range(rows)] for i, r in enumerate(A)]
    pivots = []
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if pr is None:
            continue
        M[r], M[pr] = M[pr], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    rref = tuple(tuple(row[:cols]) for row in M)
    transform = tuple(tuple(row[cols:]) for row in M)
    return rref, transform, tuple(pivots)


def _basis_contraction(ctx: PhaseContext, unknown, source_degree: int, form: Mapping) -> dict:
    if source_degree == ctx.n:
        v, k = unknown
        return ext_wedge({(k,): 1}, ext_interior(ctx.gidx(v), form))
    v, J = unknown
    out = ext_interior(ctx.gidx(v), form)
    for j in J:
        out = ext_interior(j, out)
    return out


@lru_cache(maxsize=None)
def _system(ctx: PhaseContext, source_degree: int) -> _LinearSystem:
    n, nv = ctx.n, len(ctx.vertical)
    if source_degree == n:
        unknowns = tuple((v, k) for v in range(nv) for k in range(n))
    else:
        k = n - source_degree
        unknowns = tuple((v, J) for v in range(nv) for J in combinations(range(n), k - 1))
    omega = polysymplectic(ctx)
    columns = [_basis_contraction(ctx, u, source_degree, omega) for u in unknowns]
    rows = tuple(sorted({key for col in columns for key in col}))
    row_index = {key: i for i, key in enumerate(rows)}
    A = [[Fraction(0)] * len(unknowns) for _ in rows]
    for c, col in enumerate(columns):
        for key, val in col.items():
            A[row_index[key]][c] = Fraction(val)
    rref, transform, pivots = _row_reduce(A)
    return _LinearSystem(unknowns, rows, row_index, transform, rref, pivots)


def _solve(system: _LinearSystem, rhs: Mapping[Key, Poly]) -> dict:
    stray = [k for k in rhs if k not in system.row_index]
    if stray:
        raise NotHamiltonian(f"d^V F has components {stray} outside the image of the polysymplectic map")
    b = [Poly()] * len(system.rows)
    for key, val in rhs.items():
        b[system.row_index[key]] = val
    nz = [(j, bj) for j, bj in enumerate(b) if not bj.is_zero()]
    reduced = []
    for row in system.transform:
        acc = Poly()
        for j, bj in nz:
            if row[j]:
                acc = acc + bj * row[j]
        reduced.append(acc)
    rank = len(system.pivots)
    if any(not c.is_zero() for c in reduced[rank:]):
        raise NotHamiltonian("the polysymplectic map has no solution for this form")
    return {system.unknowns[pc]: reduced[r] for r, pc in enumerate(system.pivots) if not reduced[r].is_zero()}


# -- Hamiltonian multivectors -----------------------------------------------
@dataclass(frozen=True)
class VerticalMultivector:
    """Solution ``X`` of ``X _| Omega = d^V F`` for a q-form with q < n.

    ``components[(v, J)]`` multiplies ``d/dz^v ^ d/dx^J`` with ``|J| = n-q-1``.
    Free components of the solve are set to zero; ``kernel`` spans the
    ambiguity, each element being a map of the same shape with rational entries.
    """

    ctx: PhaseContext
    degree: int
    components: Mapping[tuple[int, Key], Poly]
    kernel: tuple[Mapping, ...] = field(default=(), repr=False)

    def contract(self, form: Mapping, components: Mapping | None = None) -> dict:
        comps = self.components if components is None else components
        out: dict = {}
        for unknown, coeff in comps.items():
            for key, val in _basis_contraction(self.ctx, unknown, self.ctx.n - self.degree, form).items():
                _accumulate(out, key, val * coeff)
        return _clean(out)


@dataclass(frozen=True)
class TangentOneForm:
    """``X~ = X^v_k dx^k (x) d/dz^v`` solving ``X~ _| Omega = d^V(F w)``."""

    ctx: PhaseContext
    components: Mapping[tuple[int, int], Poly]
    kernel: tuple[Mapping, ...] = field(default=(), repr=False)
    system: _LinearSystem | None = field(default=None, repr=False, compare=False)

    def contract(self, form: Mapping, components: Mapping | None = None) -> dict:
        comps = self.components if components is None else components
        out: dict = {}
        for (v, k), coeff in comps.items():
            for key, val in ext_wedge({(k,): 1}, ext_interior(self.ctx.gidx(v), form)).items():
                _accumulate(out, key, val * coeff)
        return _clean(out)

    def representative(self, env: Mapping[str, float], free_values: Mapping[tuple[int, int], float]) -> dict:
        """Numerical components with the undetermined ones taken from ``free_values``.

        Pivot components follow from the row-reduced system, so the result is
        an exact solution of the polysymplectic equation at ``env``.
        """
        sys = self.system
        out = {}
        for f in sys.free:
            out[sys.unknowns[f]] = float(free_values.get(sys.unknowns[f], 0.0))
        for r, pc in enumerate(sys.pivots):
            u = sys.unknowns[pc]
            val = float(self.components[u](env)) if u in self.components else 0.0
            for f in sys.free:
                if sys.rref[r][f]:
                    val -= float(sys.rref[r][f]) * out[sys.unknowns[f]]
            out[u] = val
        return out


def hamiltonian_multivector(F: HorizontalForm, ctx: PhaseContext | None = None):
    """Solve the polysymplectic map for ``F``.

    Returns a :class:`VerticalMultivector` of degree ``n - q`` for ``q < n``
    and a :class:`TangentOneForm` for ``q = n``.
    """
    if ctx is not None and ctx != F.ctx:
        raise ValueError("form belongs to a different phase context")
    _check_degree(F)
    system = _system(F.ctx, F.degree)
    solution = _solve(system, vertical_differential(F).to_ext())
    kernel = tuple(system.null_basis())
    if F.degree == F.ctx.n:
        return TangentOneForm(F.ctx, solution, kernel, system)
    return VerticalMultivector(F.ctx, F.ctx.n - F.degree, solution, kernel)


def back_substitution(F: HorizontalForm, X=None) -> dict:
    """``X _| Omega - d^V F`` as a coframe expansion; empty when ``X`` solves the map."""
    X = hamiltonian_multivector(F) if X is None else X
    lhs = X.contract(polysymplectic(F.ctx))
    rhs = vertical_differential(F).to_ext()
    out = dict(lhs)
    for k, v in rhs.items():
        _accumulate(out, k, -v)
    return _clean(out)


# -- bracket -------------------------------------------------------------------
def bracket_degree(ctx: PhaseContext, r: int, s: int) -> int:
    d = r + s - ctx.n + 1
    if not 0 <= d <= ctx.n:
        raise UndefinedBracketDegree(f"bracket of a {r}-form and a {s}-form would have degree {d}")
    return d


def _to_horizontal(ctx: PhaseContext, degree: int, ext: Mapping) -> HorizontalForm:
    vertical_left = [k for k in ext if k and k[-1] >= ctx.n]
    if vertical_left:
        raise AssertionError(f"bracket left vertical components {vertical_left}")
    return HorizontalForm(ctx, degree, ext)


def graded_bracket(F1: HorizontalForm, F2: HorizontalForm) -> HorizontalForm:
    if F1.ctx != F2.ctx:
        raise ValueError("forms belong to different phase contexts")
    ctx = F1.ctx
    degree = bracket_degree(ctx, F1.degree, F2.degree)
    X1 = hamiltonian_multivector(F1)
    hamiltonian_multivector(F2)  # both arguments must be Hamiltonian
    sign = -1 if (ctx.n - F1.degree) & 1 else 1
    ext = X1.contract(vertical_differential(F2).to_ext())
    return _to_horizontal(ctx, degree, {k: v * sign for k, v in ext.items()})


def bracket_kernel_variation(F1: HorizontalForm, F2: HorizontalForm) -> list[HorizontalForm]:
    """Change of ``{F1, F2}`` along each kernel direction of ``X_{F1}``.

    The bracket is independent of the kernel choice iff every entry is zero.
    """
    ctx = F1.ctx
    degree = bracket_degree(ctx, F1.degree, F2.degree)
    X1 = hamiltonian_multivector(F1)
    dv = vertical_differential(F2).to_ext()
    sign = -1 if (ctx.n - F1.degree) & 1 else 1
    out = []
    for vec in X1.kernel:
        comps = {u: Poly.const(c) for u, c in vec.items()}
        ext = X1.contract(dv, comps)
        out.append(_to_horizontal(ctx, degree, {k: v * sign for k, v in ext.items()}))
    return out


def antisymmetry_sign(ctx: PhaseContext, r: int, s: int) -> int:
    """``-(-1)^((n-r-1)(n-s-1))``, the factor relating ``{F1,F2}`` to ``{F2,F1}``."""
    return 1 if ((ctx.n - r - 1) * (ctx.n - s - 1)) % 2 else -1


def graded_antisymmetry_check(F1: HorizontalForm, F2: HorizontalForm) -> bool:
    lhs = graded_bracket(F1, F2)
    rhs = graded_bracket(F2, F1) * antisymmetry_sign(F1.ctx, F1.degree, F2.degree)
    return lhs == rhs


# -- canonical table -----------------------------------------------------------
@dataclass(frozen=True)
class BracketIdentity:
    label: str
    lhs: HorizontalForm
    expected: HorizontalForm

    @property
    def holds(self) -> bool:
        return self.lhs == self.expected


def canonical_bracket_table(ctx: PhaseContext) -> list[BracketIdentity]:
    """Every instance of the three canonical brackets for the given (n, m)."""
    n, m = ctx.n, ctx.m
    ids = []
    p_forms = {a: HorizontalForm.from_omega(ctx, {i: ctx.p(i, a) for i in range(n)}) for a in range(m)}
    for a in range(m):
        for b in range(m):
            got = graded_bracket(p_forms[a], HorizontalForm.scalar(ctx, ctx.y(b)))
            want = HorizontalForm.scalar(ctx, int(a == b))
            ids.append(BracketIdentity(f"{{p_{a}, y^{b}}}", got, want))
    for i in range(n):
        for j in range(n):
            for a in range(m):
                for b in range(m):
                    yw = HorizontalForm.from_omega(ctx, {j: ctx.y(b)})
                    got = graded_bracket(HorizontalForm.scalar(ctx, ctx.p(i, a)), yw)
                    want = HorizontalForm.scalar(ctx, int(i == j and a == b))
                    ids.append(BracketIdentity(f"{{p^{i}_{a}, y^{b} w_{j}}}", got, want))
    for j in range(n):
        for a in range(m):
            for b in range(m):
                yw = HorizontalForm.from_omega(ctx, {j: ctx.y(b)})
                got = graded_bracket(p_forms[a], yw)
                want = HorizontalForm.from_omega(ctx, {j: Poly.const(int(a == b))})
                ids.append(BracketIdentity(f"{{p_{a}, y^{b} w_{j}}}", got, want))
    return ids


# -- random Hamiltonian forms -----------------------------------------------
def random_poly(rng: np.random.Generator, names: Sequence[str], max_degree: int, n_terms: int = 4) -> Poly:
    out = Poly()
    for _ in range(n_terms):
        deg = int(rng.integers(0, max_degree + 1))
        term = Poly.const(Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))))
        for _ in range(deg):
            if names:
                term = term * Poly.var(names[int(rng.integers(len(names)))])
        out = out + term
    return out


def random_hamiltonian_form(ctx: PhaseContext, degree: int, rng: np.random.Generator, max_degree: int = 2) -> HorizontalForm:
    """A random polynomial form of the given degree that admits a Hamiltonian multivector.

    0-forms and n-forms are unrestricted.  For n >= 2, Hamiltonian (n-1)-forms
    have the shape ``(h^a(y) p^i_a + g^i(y)) w[i]``.
    """
    ys = [f"y[{a}]" for a in range(ctx.m)]
    if degree == 0 or (degree == ctx.n - 1 and ctx.n == 1):
        return HorizontalForm(ctx, degree, {(): random_poly(rng, list(ctx.vertical), max_degree)})
    if degree == ctx.n:
        return HorizontalForm.volume(ctx, random_poly(rng, list(ctx.vertical), max_degree))
    if degree == ctx.n - 1:
        h = [random_poly(rng, ys, max(max_degree - 1, 0), 2) for _ in range(ctx.m)]
        comps = {}
        for i in range(ctx.n):
            g = random_poly(rng, ys, max_degree, 2)
            comps[i] = g + sum((h[a] * ctx.p(i, a) for a in range(ctx.m)), Poly())
        return HorizontalForm.from_omega(ctx, comps)
    raise UnsupportedDegree(f"degree {degree} not supported")


def well_defined_degree_pairs(ctx: PhaseContext) -> list[tuple[int, int]]:
    """Degree pairs whose bracket is independent of the kernel choice for all Hamiltonian forms."""
    n = ctx.n
    if n == 1:
        return [(0, 0), (0, 1), (1, 0)]
    return [(0, n - 1), (n - 1, 0), (n - 1, n - 1), (n - 1, n), (n, n - 1)]


# -- equations of motion ------------------------------------------------------
@dataclass(frozen=True)
class FieldSample:
    """Values of a classical field configuration at one spacetime point.

    ``dy[k, a] = d y^a / dx^k``, ``p[i, a] = p^i_a`` and
    ``dp[k, i, a] = d p^i_a / dx^k``.
    """

    x: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    p: np.ndarray
    dp: np.ndarray

    def validate(self, n: int, m: int) -> None:
        shapes = {"x": (n,), "y": (m,), "dy": (n, m), "p": (n, m), "dp": (n, n, m)}
        for name, shape in shapes.items():
            arr = np.asarray(getattr(self, name))
            if arr.shape != shape:
                raise InvalidSolutionData(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise InvalidSolutionData(f"{name} has non-finite entries")

    def env(self, ctx: PhaseContext) -> dict[str, float]:
        env = {f"x[{i}]": float(self.x[i]) for i in range(ctx.n)}
        env.update({f"y[{a}]": float(self.y[a]) for a in range(ctx.m)})
        env.update({f"p[{i},{a}]": float(self.p[i, a]) for i in range(ctx.n) for a in range(ctx.m)})
        return env

    def vertical_rates(self, ctx: PhaseContext) -> np.ndarray:
        """``rates[v, k] = d z^v / dx^k`` in the order of ``ctx.vertical``."""
        rows = [self.dy[:, a] for a in range(ctx.m)]
        rows += [self.dp[:, i, a] for i in range(ctx.n) for a in range(ctx.m)]
        return np.array(rows, dtype=float)


def _numeric_accumulate(out: dict, key, value: float) -> None:
    out[key] = out.get(key, 0.0) + value


def equation_of_motion_residual(
    F: HorizontalForm,
    sol: Callable[[np.ndarray], FieldSample],
    model,
    points: Iterable[Sequence[float]],
) -> np.ndarray:
    """Per-point max-norm of ``total_d F - {H w, F} - d^hor F`` on a sampled solution.

    ``model`` must provide ``hamiltonian_poly(ctx)``.  Components of the
    Hamiltonian one-form fixed by the polysymplectic equation come from the
    engine; the undetermined ones take the values ``dz^v/dx^k`` of the
    solution.
    """
    ctx = F.ctx
    _check_degree(F)
    Xt = hamiltonian_multivector(HorizontalForm.volume(ctx, model.hamiltonian_poly(ctx)))
    dv = vertical_differential(F)
    explicit = {key: {k: val.diff(ctx.x_names[k]) for k in range(ctx.n)} for key, val in F.coeffs.items()}
    residuals = []
    for x in points:
        sample = sol(np.asarray(x, dtype=float))
        sample.validate(ctx.n, ctx.m)
        env = sample.env(ctx)
        rates = sample.vertical_rates(ctx)
        free = {(v, k): rates[v, k] for v in range(len(ctx.vertical)) for k in range(ctx.n)}
        xnum = Xt.representative(env, free)
        total, bracket, dhor = {}, {}, {}
        for (v, key), coeff in dv.terms.items():
            c = float(coeff(env))
            for k in range(ctx.n):
                s, merged = _merge((k,), key)
                if s:
                    _numeric_accumulate(total, merged, s * rates[v, k] * c)
                    _numeric_accumulate(bracket, merged, s * xnum[(v, k)] * c)
        for key, partials in explicit.items():
            for k, d in partials.items():
                s, merged = _merge((k,), key)
                if s and not d.is_zero():
                    val = s * float(d(env))
                    _numeric_accumulate(total, merged, val)
                    _numeric_accumulate(dhor, merged, val)
        keys = set(total) | set(bracket) | set(dhor)
        res = [total.get(k, 0.0) - bracket.get(k, 0.0) - dhor.get(k, 0.0) for k in keys]
        residuals.append(max((abs(r) for r in res), default=0.0))
    return np.array(residuals)


def n_components(ctx: PhaseContext, degree: int) -> int:
    return comb(ctx.n, degree)
