"""Function representations on the field axis y.

``SpectralFunction`` expands in normalised Hermite functions of width ``l``::

    f(y) = sum_n c_n h_n(y / l) / sqrt(l)

so the coefficient vector is an orthonormal coordinate and multiplication
by y or differentiation act through exact ladder relations.
``GridFunction`` holds samples on a uniform grid and differentiates with
central stencils of selectable order.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from ..errors import InvalidDomain, InvalidParameter


def hermite_functions(nmax: int, xi) -> np.ndarray:
    """Rows ``h_0 .. h_nmax`` evaluated at ``xi`` by the stable three-term recurrence."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty((nmax + 1,) + xi.shape)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * xi**2)
    if nmax >= 1:
        out[1] = np.sqrt(2.0) * xi * out[0]
    for k in range(1, nmax):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * xi * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def _xi_times(c: np.ndarray) -> np.ndarray:
    # xi h_n = sqrt((n+1)/2) h_{n+1} + sqrt(n/2) h_{n-1}
    n = np.arange(len(c))
    out = np.zeros(len(c) + 1, dtype=c.dtype)
    out[1:] += np.sqrt((n + 1) / 2) * c
    out[:-2] += np.sqrt(n[1:] / 2) * c[1:]
    return out


def _d_xi(c: np.ndarray) -> np.ndarray:
    # h_n' = sqrt(n/2) h_{n-1} - sqrt((n+1)/2) h_{n+1}
    n = np.arange(len(c))
    out = np.zeros(len(c) + 1, dtype=c.dtype)
    out[1:] -= np.sqrt((n + 1) / 2) * c
    out[:-2] += np.sqrt(n[1:] / 2) * c[1:]
    return out


def ladder_matrices(size: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated square matrices of ``xi`` and ``d/dxi``; exact on columns < size - 1."""
    n = np.arange(1, size)
    off = np.sqrt(n / 2)
    X = np.diag(off, 1) + np.diag(off, -1)
    D = np.diag(off, 1) - np.diag(off, -1)
    return X, D


@dataclass(frozen=True)
class SpectralFunction:
    coeffs: np.ndarray
    width: float = 1.0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs))
        c = c.astype(complex if np.iscomplexobj(c) else float)
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise InvalidParameter("spectral coefficients must be a finite 1-d array")
        if not self.width > 0:
            raise InvalidParameter(f"width must be positive, got {self.width}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "width", float(self.width))

    @classmethod
    def basis(cls, n: int, width: float = 1.0) -> "SpectralFunction":
        c = np.zeros(n + 1)
        c[n] = 1.0
        return cls(c, width)

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        H = hermite_functions(len(self.coeffs) - 1, y / self.width)
        return np.tensordot(self.coeffs, H, axes=1) / np.sqrt(self.width)

    def _check(self, other: "SpectralFunction") -> None:
        if not np.isclose(self.width, other.width, rtol=1e-14, atol=0):
            raise InvalidDomain(f"spectral widths differ: {self.width} vs {other.width}")

    def __add__(self, other: "SpectralFunction") -> "SpectralFunction":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        size = max(len(a), len(b))
        out = np.zeros(size, dtype=np.result_type(a, b))
        out[: len(a)] += a
        out[: len(b)] += b
        return SpectralFunction(out, self.width)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, c) -> "SpectralFunction":
        return SpectralFunction(self.coeffs * c, self.width)

    __rmul__ = __mul__

    def derivative(self) -> "SpectralFunction":
        return SpectralFunction(_d_xi(self.coeffs) / self.width, self.width)

    def times_y(self) -> "SpectralFunction":
        return SpectralFunction(_xi_times(self.coeffs) * self.width, self.width)

    def times_poly(self, ascending) -> "SpectralFunction":
        """Multiply by ``sum_j a_j y^j`` (Horner, exact)."""
        ascending = list(ascending)
        if not ascending:
            return SpectralFunction(np.zeros(1), self.width)
        acc = SpectralFunction(self.coeffs * ascending[-1], self.width)
        for a in reversed(ascending[:-1]):
            acc = acc.times_y() + self * a
        return acc

    def norm(self) -> float:
        """Unweighted L2 norm on the y axis."""
        return float(np.linalg.norm(self.coeffs))

    def trimmed(self, tol: float = 0.0) -> "SpectralFunction":
        nz = np.flatnonzero(np.abs(self.coeffs) > tol)
        keep = nz[-1] + 1 if nz.size else 1
        return SpectralFunction(self.coeffs[:keep], self.width)


@lru_cache(maxsize=None)
def central_weights(order: int) -> np.ndarray:
    """Second-derivative weights on offsets ``-r..r`` with ``r = order // 2`` (unit spacing)."""
    if order < 2 or order % 2:
        raise InvalidParameter(f"stencil order must be an even integer >= 2, got {order}")
    r = order // 2
    offsets = np.arange(-r, r + 1, dtype=float)
    A = np.vander(offsets, increasing=True).T
    rhs = np.zeros(2 * r + 1)
    rhs[2] = factorial(2)
    w = np.linalg.solve(A, rhs)
    w.setflags(write=False)
    return w


@dataclass(frozen=True)
class GridFunction:
    """Samples on a uniform y grid."""

    y: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        v = np.asarray(self.values)
        if y.ndim != 1 or v.shape != y.shape:
            raise InvalidDomain(f"grid and values shapes differ: {y.shape} vs {v.shape}")
        if len(y) < 3:
            raise InvalidDomain("need at least 3 grid points")
        steps = np.diff(y)
        if not np.all(steps > 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise InvalidDomain("grid must be uniform and increasing")
        if not np.all(np.isfinite(v)):
            raise InvalidDomain("non-finite grid values")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "values", v)

    @property
    def h(self) -> float:
        return float(self.y[1] - self.y[0])

    def second_derivative(self, order: int = 4) -> "GridFunction":
        """Central differences on the interior; ``order // 2`` points are lost at each end."""
        w = central_weights(order)
        r = len(w) // 2
        if len(self.y) < 2 * r + 1:
            raise InvalidDomain(f"grid of {len(self.y)} points too short for a {order}th-order stencil")
        v = self.values
        size = len(v) - 2 * r
        acc = sum(wj * v[j : j + size] for j, wj in enumerate(w))
        return GridFunction(self.y[r : len(v) - r], acc / self.h**2)

    def restrict(self, y_sub: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.y, y_sub)
        return self.values[idx]
