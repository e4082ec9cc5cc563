"""Spacetime Clifford algebra with complex coefficients.

Blades are encoded as bitmasks over the generators ``gamma_0 .. gamma_{n-1}``;
a multivector stores a dense complex vector of length ``2**n``.  The
generators obey ``gamma_i gamma_j + gamma_j gamma_i = 2 g_ij``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceFailure, InvalidParameter, MetricMismatch

MAX_DIM = 6


@dataclass(frozen=True)
class Metric:
    """Diagonal spacetime metric; index 0 is time."""

    n: int
    diag: tuple[int, ...] = ()

    def __post_init__(self):
        if not 1 <= self.n <= MAX_DIM:
            raise InvalidParameter(f"dimension must be in 1..{MAX_DIM}, got {self.n}")
        diag = tuple(self.diag) if self.diag else (1,) + (-1,) * (self.n - 1)
        if len(diag) != self.n or any(s not in (1, -1) for s in diag):
            raise InvalidParameter(f"metric diagonal must be {self.n} entries of +1/-1, got {diag}")
        object.__setattr__(self, "diag", tuple(int(s) for s in diag))

    @classmethod
    def minkowski(cls, n: int) -> "Metric":
        return cls(n)

    @classmethod
    def euclidean(cls, n: int) -> "Metric":
        return cls(n, (1,) * n)

    @property
    def sigma(self) -> int:
        """Sign of det(g)."""
        return math.prod(self.diag)

    def raise_index(self, i: int) -> int:
        # diagonal metric with +-1 entries is its own inverse
        return self.diag[i]


def _reorder_sign(a: int, b: int) -> int:
    """Sign from sorting the concatenated generator list of blades ``a`` and ``b``."""
    a >>= 1
    swaps = 0
    while a:
        swaps += bin(a & b).count("1")
        a >>= 1
    return -1 if swaps & 1 else 1


@lru_cache(maxsize=None)
def _product_table(metric: Metric) -> tuple[np.ndarray, np.ndarray]:
    size = 1 << metric.n
    index = np.empty((size, size), dtype=np.intp)
    sign = np.empty((size, size), dtype=np.int64)
    for a in range(size):
        for b in range(size):
            s = _reorder_sign(a, b)
            common = a & b
            for i in range(metric.n):
                if common >> i & 1:
                    s *= metric.diag[i]
            index[a, b] = a ^ b
            sign[a, b] = s
    index.setflags(write=False)
    sign.setflags(write=False)
    return index, sign


def blade_mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def blade_grade(mask: int) -> int:
    return bin(mask).count("1")


class Multivector:
    """Element of the Clifford algebra of ``metric`` with complex coefficients."""

    __slots__ = ("metric", "coeffs")
    __array_ufunc__ = None  # make numpy scalars defer to our __rmul__

    def __init__(self, metric: Metric, coeffs=None):
        self.metric = metric
        size = 1 << metric.n
        if coeffs is None:
            arr = np.zeros(size, dtype=complex)
        else:
            arr = np.array(coeffs, dtype=complex)
            if arr.shape != (size,):
                raise ValueError(f"expected {size} coefficients, got shape {arr.shape}")
        arr.setflags(write=False)
        self.coeffs = arr

    # -- constructors -------------------------------------------------------
    @classmethod
    def scalar(cls, metric: Metric, value: complex = 1.0) -> "Multivector":
        c = np.zeros(1 << metric.n, dtype=complex)
        c[0] = value
        return cls(metric, c)

    @classmethod
    def blade(cls, metric: Metric, indices: Sequence[int], value: complex = 1.0) -> "Multivector":
        """The (sorted) blade ``gamma_{i1} gamma_{i2} ...`` times ``value``; indices must be distinct."""
        if len(set(indices)) != len(indices):
            raise ValueError("blade indices must be distinct")
        out = cls.scalar(metric, value)
        for i in indices:
            out = out * cls.gamma(metric, i)
        return out

    @classmethod
    def gamma(cls, metric: Metric, i: int) -> "Multivector":
        c = np.zeros(1 << metric.n, dtype=complex)
        c[1 << i] = 1.0
        return cls(metric, c)

    @classmethod
    def gamma_upper(cls, metric: Metric, i: int) -> "Multivector":
        return cls.gamma(metric, i) * metric.raise_index(i)

    @classmethod
    def vector(cls, metric: Metric, components: Sequence[complex]) -> "Multivector":
        """``sum_i components[i] * gamma_i``."""
        c = np.zeros(1 << metric.n, dtype=complex)
        for i, v in enumerate(components):
            c[1 << i] = v
        return cls(metric, c)

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: "Multivector") -> None:
        if other.metric != self.metric:
            raise MetricMismatch(f"{self.metric} vs {other.metric}")

    def __add__(self, other):
        if isinstance(other, Multivector):
            self._check(other)
            return Multivector(self.metric, self.coeffs + other.coeffs)
        return self + Multivector.scalar(self.metric, other)

    __radd__ = __add__

    def __neg__(self):
        return Multivector(self.metric, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        return Multivector(self.metric, self.coeffs * other)

    def __rmul__(self, other):
        return Multivector(self.metric, other * self.coeffs)

    def __truediv__(self, other):
        return Multivector(self.metric, self.coeffs / other)

    def __pow__(self, k: int):
        out = Multivector.scalar(self.metric)
        for _ in range(k):
            out = out * self
        return out

    # -- inspection ---------------------------------------------------------
    def __getitem__(self, indices) -> complex:
        if isinstance(indices, int):
            indices = (indices,)
        return self.coeffs[blade_mask(indices)]

    def grade(self, k: int) -> "Multivector":
        keep = np.array([blade_grade(b) == k for b in range(len(self.coeffs))])
        return Multivector(self.metric, np.where(keep, self.coeffs, 0))

    @property
    def scalar_part(self) -> complex:
        return complex(self.coeffs[0])

    def vector_part(self) -> np.ndarray:
        """Coefficients ``v^i`` of ``gamma_i``."""
        return np.array([self.coeffs[1 << i] for i in range(self.metric.n)])

    def norm_max(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def isclose(self, other, atol: float = 1e-12) -> bool:
        if not isinstance(other, Multivector):
            other = Multivector.scalar(self.metric, other)
        self._check(other)
        return bool(np.all(np.abs(self.coeffs - other.coeffs) <= atol))

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            other = Multivector.scalar(self.metric, other)
        return self.metric == other.metric and bool(np.array_equal(self.coeffs, other.coeffs))

    __hash__ = None

    def __repr__(self):
        terms = []
        for b, c in enumerate(self.coeffs):
            if c != 0:
                name = "".join(f"g{i}" for i in range(self.metric.n) if b >> i & 1) or "1"
                terms.append(f"({c:.6g})*{name}")
        return "Multivector(" + (" + ".join(terms) or "0") + ")"


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    a._check(b)
    index, sign = _product_table(a.metric)
    out = np.zeros_like(a.coeffs)
    nz_a = np.flatnonzero(a.coeffs)
    nz_b = np.flatnonzero(b.coeffs)
    if nz_a.size and nz_b.size:
        prod = np.outer(a.coeffs[nz_a], b.coeffs[nz_b]) * sign[np.ix_(nz_a, nz_b)]
        np.add.at(out, index[np.ix_(nz_a, nz_b)].ravel(), prod.ravel())
    return Multivector(a.metric, out)


def anticommutator(a: Multivector, b: Multivector) -> Multivector:
    return a * b + b * a


def commutator(a: Multivector, b: Multivector) -> Multivector:
    return a * b - b * a


def gamma_top(metric: Metric) -> Multivector:
    """``gamma = i^{n(n-1)/2} sigma^{1/2} gamma_0 ... gamma_{n-1}``, normalised so gamma^2 = 1."""
    n = metric.n
    prefactor = 1j ** (n * (n - 1) // 2)
    if metric.sigma < 0:
        prefactor *= 1j
    return Multivector.blade(metric, range(n), prefactor)


@dataclass(frozen=True)
class OperatorPair:
    """Clifford realisation of the polymomentum operators and volume-element forms.

    ``p_hat[i] = kappa gamma^i gamma`` and ``omega_hat[j] = gamma gamma_j / kappa``.
    """

    metric: Metric
    kappa: float
    p_hat: tuple[Multivector, ...]
    omega_hat: tuple[Multivector, ...]

    def composition(self, i: int, j: int) -> Multivector:
        return self.p_hat[i] * self.omega_hat[j]

    def commutator(self, i: int, j: int) -> Multivector:
        return commutator(self.p_hat[i], self.omega_hat[j])

    def symmetrized(self, i: int, j: int) -> Multivector:
        return anticommutator(self.p_hat[i], self.omega_hat[j]) / 2


def operator_pair(metric: Metric, kappa: float) -> OperatorPair:
    if not kappa > 0 or not math.isfinite(kappa):
        raise InvalidParameter(f"kappa must be a positive real, got {kappa}")
    g = gamma_top(metric)
    p_hat = tuple(kappa * (Multivector.gamma_upper(metric, i) * g) for i in range(metric.n))
    omega_hat = tuple((g * Multivector.gamma(metric, j)) / kappa for j in range(metric.n))
    return OperatorPair(metric, float(kappa), p_hat, omega_hat)


def composition_report(pair: OperatorPair, atol: float = 1e-12) -> list[dict]:
    """Check every ``p_hat^i o omega_hat_j`` against ``delta^i_j`` in three readings.

    ``full`` compares the whole multivector product, ``scalar`` only its
    scalar part and ``symmetrized`` the anticommutator over two.  The
    commutator entry tests the vanishing of ``[p_hat^i, omega_hat_j]``.
    """
    rows = []
    n = pair.metric.n
    for i in range(n):
        for j in range(n):
            delta = 1.0 if i == j else 0.0
            prod = pair.composition(i, j)
            rows.append(
                {
                    "i": i,
                    "j": j,
                    "full": prod.isclose(delta, atol),
                    "scalar": abs(prod.scalar_part - delta) <= atol,
                    "symmetrized": pair.symmetrized(i, j).isclose(delta, atol),
                    "commutator": pair.commutator(i, j).isclose(0.0, atol),
                }
            )
    return rows


def mv_exp(a: Multivector, tol: float = 1e-15, max_terms: int = 200) -> Multivector:
    """Exponential by power series, with scaling and squaring for large arguments.

    The series for ``a / 2**s`` is summed until the next term falls below
    ``tol`` (max-coefficient norm); the result is squared ``s`` times.
    """
    if not tol > 0:
        raise InvalidParameter("tol must be positive")
    norm = a.norm_max() * (1 << a.metric.n)
    s = max(0, math.ceil(math.log2(norm))) if norm > 1 else 0
    x = a / (2**s)
    term = Multivector.scalar(a.metric)
    total = term
    for k in range(1, max_terms):
        term = term * x / k
        total = total + term
        if term.norm_max() < tol * max(1.0, total.norm_max()):
            break
    else:
        raise ConvergenceFailure(f"exponential series did not converge in {max_terms} terms")
    for _ in range(s):
        total = total * total
    return total
