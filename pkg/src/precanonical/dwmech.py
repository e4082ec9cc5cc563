"""Classical De Donder-Weyl mechanics of scalar fields.

The built-in model is ``L = 1/2 g^{ij} d_i y^a d_j y^a - V(y)`` with a
diagonal metric, for which ``p^i_a = g^{ij} d_j y^a`` and
``H = 1/2 g_ij p^i_a p^j_a + V(y)``.  Everything here evaluates residuals of
supplied solutions; nothing integrates the field equations.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .clifford import Metric
from .errors import InvalidParameter, InvalidSolutionData
from .gradedforms import FieldSample, PhaseContext
from .poly import Poly


@dataclass(frozen=True)
class ScalarModel:
    metric: Metric
    m: int = 1
    potential: Poly = field(default_factory=Poly)

    def __post_init__(self):
        allowed = {f"y[{a}]" for a in range(self.m)}
        extra = self.potential.variables() - allowed
        if extra:
            raise InvalidParameter(f"potential may depend only on {sorted(allowed)}, found {sorted(extra)}")

    @classmethod
    def free(cls, metric: Metric, masses: Sequence[float] = (1.0,)) -> "ScalarModel":
        """``V = sum_a 1/2 M_a^2 (y^a)^2`` with ``M_a`` in inverse-length units."""
        V = Poly()
        for a, M in enumerate(masses):
            V = V + Poly.var(f"y[{a}]", 2) * (Fraction(M).limit_denominator(10**12) ** 2 / 2)
        return cls(metric, len(masses), V)

    @property
    def n(self) -> int:
        return self.metric.n

    @cached_property
    def context(self) -> PhaseContext:
        return PhaseContext(self.n, self.m)

    @cached_property
    def _dV(self) -> tuple[Poly, ...]:
        return tuple(self.potential.diff(f"y[{a}]") for a in range(self.m))

    def _yenv(self, y) -> dict:
        return {f"y[{a}]": float(y[a]) for a in range(self.m)}

    def V(self, y) -> float:
        return float(self.potential(self._yenv(y)))

    def dV(self, y) -> np.ndarray:
        env = self._yenv(y)
        return np.array([float(d(env)) for d in self._dV])

    def hamiltonian_poly(self, ctx: PhaseContext | None = None) -> Poly:
        ctx = self.context if ctx is None else ctx
        H = self.potential
        for i in range(self.n):
            for a in range(self.m):
                H = H + ctx.p(i, a) ** 2 * Fraction(self.metric.diag[i], 2)
        return H

    def lagrangian(self, jp: "JetPoint") -> float:
        g = np.array(self.metric.diag, dtype=float)
        return 0.5 * float(np.sum(g[:, None] * jp.dy**2)) - self.V(jp.y)


@dataclass(frozen=True)
class JetPoint:
    """First jet of the field at a point: ``dy[i, a] = d_i y^a``."""

    x: np.ndarray
    y: np.ndarray
    dy: np.ndarray

    def __post_init__(self):
        for name in ("x", "y", "dy"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise InvalidSolutionData(f"non-finite entries in {name}")
            object.__setattr__(self, name, arr)


def polymomenta(model: ScalarModel, jp: JetPoint) -> np.ndarray:
    """``p[i, a] = dL / d(d_i y^a)``."""
    if jp.dy.shape != (model.n, model.m):
        raise InvalidSolutionData(f"jet has shape {jp.dy.shape}, expected {(model.n, model.m)}")
    g = np.array(model.metric.diag, dtype=float)
    return g[:, None] * jp.dy


def dw_hamiltonian(model: ScalarModel, y, p) -> float:
    g = np.array(model.metric.diag, dtype=float)
    p = np.asarray(p, dtype=float)
    return 0.5 * float(np.sum(g[:, None] * p**2)) + model.V(y)


# -- solution samplers --------------------------------------------------------
Sampler = Callable[[np.ndarray], FieldSample]


def sample_from_jets(model: ScalarModel, x, y, dy, ddy) -> FieldSample:
    """Build a phase-space sample from ``y``, ``dy[k, a]`` and ``ddy[k, i, a] = d_k d_i y^a``."""
    g = np.array(model.metric.diag, dtype=float)
    dy = np.asarray(dy, dtype=float)
    ddy = np.asarray(ddy, dtype=float)
    return FieldSample(
        x=np.asarray(x, dtype=float),
        y=np.asarray(y, dtype=float),
        dy=dy,
        p=g[:, None] * dy,
        dp=g[None, :, None] * ddy,
    )


@dataclass(frozen=True)
class PlaneWave:
    """``y^a = A_a cos(K^a_mu x^mu)`` with analytic derivatives.

    ``covectors[a]`` is ``K^a``; it solves the free field equation iff
    ``g^{mu nu} K_mu K_nu = M_a^2``.
    """

    model: ScalarModel
    amplitudes: np.ndarray
    covectors: np.ndarray

    def __call__(self, x) -> FieldSample:
        x = np.asarray(x, dtype=float)
        K = np.asarray(self.covectors, dtype=float)
        A = np.asarray(self.amplitudes, dtype=float)
        phase = K @ x
        y = A * np.cos(phase)
        dy = (-A * np.sin(phase))[None, :] * K.T
        ddy = (-A * np.cos(phase))[None, None, :] * np.einsum("ak,ai->kia", K, K)
        return sample_from_jets(self.model, x, y, dy, ddy)

    def field(self, x) -> np.ndarray:
        return np.asarray(self.amplitudes) * np.cos(np.asarray(self.covectors) @ np.asarray(x, dtype=float))


def klein_gordon_covector(mass: float, k_spatial: Sequence[float]) -> np.ndarray:
    """On-shell covector ``(omega, -k)`` for a Minkowski metric with ``omega^2 - k^2 = mass^2``."""
    k = np.asarray(k_spatial, dtype=float)
    omega = np.sqrt(mass**2 + float(np.sum(k**2)))
    return np.concatenate([[omega], -k])


def free_plane_wave(model: ScalarModel, masses: Sequence[float], k_spatial, amplitudes=None) -> PlaneWave:
    ks = np.atleast_2d(np.asarray(k_spatial, dtype=float))
    if ks.shape[0] == 1 and model.m > 1:
        ks = np.repeat(ks, model.m, axis=0)
    K = np.array([klein_gordon_covector(M, k) for M, k in zip(masses, ks)])
    A = np.ones(model.m) if amplitudes is None else np.asarray(amplitudes, dtype=float)
    return PlaneWave(model, A, K)


def finite_difference_sampler(model: ScalarModel, field_fn: Callable[[np.ndarray], np.ndarray], h: float = 1e-5) -> Sampler:
    """Sampler whose first and second derivatives come from central differences of ``field_fn``."""
    n = model.n

    def sample(x):
        x = np.asarray(x, dtype=float)
        E = np.eye(n) * h
        y0 = np.asarray(field_fn(x), dtype=float)
        dy = np.array([(field_fn(x + E[k]) - field_fn(x - E[k])) / (2 * h) for k in range(n)])
        ddy = np.empty((n, n, model.m))
        for k in range(n):
            for i in range(n):
                if i == k:
                    ddy[k, i] = (field_fn(x + E[k]) - 2 * y0 + field_fn(x - E[k])) / h**2
                else:
                    ddy[k, i] = (
                        field_fn(x + E[k] + E[i]) - field_fn(x + E[k] - E[i])
                        - field_fn(x - E[k] + E[i]) + field_fn(x - E[k] - E[i])
                    ) / (4 * h * h)
        return sample_from_jets(model, x, y0, dy, ddy)

    return sample


# -- residuals ------------------------------------------------------------------
@dataclass(frozen=True)
class DWResidual:
    """Per-point residuals of the two families of DW canonical equations."""

    divergence: np.ndarray  # max_a |d_i p^i_a + dH/dy^a|
    gradient: np.ndarray  # max_{i,a} |d_i y^a - dH/dp^i_a|

    @property
    def max_divergence(self) -> float:
        return float(np.max(self.divergence, initial=0.0))

    @property
    def max_gradient(self) -> float:
        return float(np.max(self.gradient, initial=0.0))

    def max(self) -> float:
        return max(self.max_divergence, self.max_gradient)


def dw_equations_residual(model: ScalarModel, sampler: Sampler, points: Iterable) -> DWResidual:
    g = np.array(model.metric.diag, dtype=float)
    div, grad = [], []
    for x in points:
        s = sampler(np.asarray(x, dtype=float))
        s.validate(model.n, model.m)
        trace = np.einsum("iia->a", s.dp)
        div.append(float(np.max(np.abs(trace + model.dV(s.y)))))
        grad.append(float(np.max(np.abs(s.dy - g[:, None] * s.p))))
    return DWResidual(np.array(div), np.array(grad))


@dataclass
class HJFunctions:
    """The n functions ``S^i(x, y)`` of the DW Hamilton-Jacobi equation.

    ``S(x, y)`` returns an array of shape (n,).  Optional analytic partials:
    ``dS_dx(x, y)[i, k] = d_k S^i`` and ``dS_dy(x, y)[i, a] = dS^i/dy^a``;
    missing ones fall back to central differences with step ``h``.
    """

    S: Callable
    dS_dx: Callable | None = None
    dS_dy: Callable | None = None
    h: float = 1e-5

    def divergence(self, x, y) -> float:
        if self.dS_dx is not None:
            return float(np.trace(np.asarray(self.dS_dx(x, y), dtype=float)))
        total = 0.0
        for k in range(len(x)):
            e = np.zeros(len(x))
            e[k] = self.h
            total += (self.S(x + e, y)[k] - self.S(x - e, y)[k]) / (2 * self.h)
        return float(total)

    def field_gradient(self, x, y) -> np.ndarray:
        if self.dS_dy is not None:
            return np.asarray(self.dS_dy(x, y), dtype=float)
        cols = []
        for a in range(len(y)):
            e = np.zeros(len(y))
            e[a] = self.h
            cols.append((np.asarray(self.S(x, y + e)) - np.asarray(self.S(x, y - e))) / (2 * self.h))
        return np.array(cols).T


def dwhj_values(model: ScalarModel, hj: HJFunctions, points: Iterable) -> np.ndarray:
    """Signed ``d_i S^i + H(y, p^i_a = dS^i/dy^a)`` at each ``(x, y)`` point."""
    out = []
    for x, y in points:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if x.shape != (model.n,) or y.shape != (model.m,):
            raise InvalidSolutionData(f"point shapes {x.shape}, {y.shape} do not match the model")
        p = hj.field_gradient(x, y)
        val = hj.divergence(x, y) + dw_hamiltonian(model, y, p)
        if not np.isfinite(val):
            raise InvalidSolutionData(f"non-finite HJ residual at x={x}, y={y}")
        out.append(val)
    return np.array(out)


def dwhj_residual(model: ScalarModel, hj: HJFunctions, points: Iterable) -> np.ndarray:
    return np.abs(dwhj_values(model, hj, points))


def oscillator_action(omega: float) -> HJFunctions:
    """``S(t, y) = -omega y^2 tan(omega t) / 2`` solves the n = 1 oscillator HJ equation."""

    def S(x, y):
        return np.array([-0.5 * omega * y[0] ** 2 * np.tan(omega * x[0])])

    def dS_dx(x, y):
        return np.array([[-0.5 * omega**2 * y[0] ** 2 / np.cos(omega * x[0]) ** 2]])

    def dS_dy(x, y):
        return np.array([[-omega * y[0] * np.tan(omega * x[0])]])

    return HJFunctions(S, dS_dx, dS_dy)


def free_masses(model: ScalarModel) -> np.ndarray:
    """``M_a`` from a potential of the form ``sum_a 1/2 M_a^2 (y^a)^2``."""
    expected = {((f"y[{a}]", 2),) for a in range(model.m)}
    terms = dict(model.potential.items())
    if not set(terms) <= expected:
        raise InvalidParameter("potential is not a sum of independent mass terms")
    return np.array([np.sqrt(2 * float(terms.get(((f"y[{a}]", 2),), 0))) for a in range(model.m)])


def reference_hj_solution(model: ScalarModel) -> HJFunctions:
    """A closed-form solution of the DW HJ equation for free fields.

    n = 1: ``S = -sum_a M_a (y^a)^2 tan(M_a t) / 2``.  n >= 2: the static
    ``S^s = sum_a M_a (y^a)^2 / 2`` along the first spatial direction s with
    ``g_ss = -1``.
    """
    M = free_masses(model)
    n = model.n
    if n == 1:
        if model.metric.diag[0] != 1:
            raise InvalidParameter("the oscillator action needs g_00 = +1")

        def S(x, y):
            return np.array([-0.5 * float(np.sum(M * y**2 * np.tan(M * x[0])))])

        def dS_dx(x, y):
            return np.array([[-0.5 * float(np.sum(M**2 * y**2 / np.cos(M * x[0]) ** 2))]])

        def dS_dy(x, y):
            return (-M * y * np.tan(M * x[0]))[None, :]

        return HJFunctions(S, dS_dx, dS_dy)
    negative = [i for i in range(n) if model.metric.diag[i] < 0]
    if not negative:
        raise InvalidParameter("the static solution needs a direction with g_ss = -1")
    s = negative[0]

    def S(x, y):
        out = np.zeros(n)
        out[s] = 0.5 * float(np.sum(M * y**2))
        return out

    def dS_dy(x, y):
        out = np.zeros((n, model.m))
        out[s] = M * y
        return out

    return HJFunctions(S, lambda x, y: np.zeros((n, n)), dS_dy)


# -- tabulated solutions ---------------------------------------------------------
def _columns(n: int, m: int, second: bool) -> list[str]:
    cols = [f"x{i}" for i in range(n)] + [f"y{a}" for a in range(m)]
    cols += [f"dy{k}_{a}" for k in range(n) for a in range(m)]
    if second:
        cols += [f"ddy{k}_{i}_{a}" for k in range(n) for i in range(n) for a in range(m)]
    return cols


@dataclass
class TabulatedSolution:
    """A solution known at a finite set of points, usable as a sampler on those points."""

    model: ScalarModel
    samples: dict = field(default_factory=dict)

    @property
    def points(self) -> list[np.ndarray]:
        return [np.array(k) for k in self.samples]

    def __call__(self, x) -> FieldSample:
        key = tuple(float(v) for v in np.asarray(x, dtype=float))
        try:
            return self.samples[key]
        except KeyError:
            raise InvalidSolutionData(f"no tabulated sample at x={key}") from None


def write_solution_csv(path, model: ScalarModel, sampler: Sampler, points: Iterable, second: bool = True) -> None:
    n, m = model.n, model.m
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_columns(n, m, second))
        for x in points:
            s = sampler(np.asarray(x, dtype=float))
            ddy = s.dp * np.array(model.metric.diag, dtype=float)[None, :, None]
            row = list(s.x) + list(s.y) + list(s.dy.ravel())
            if second:
                row += list(ddy.ravel())
            w.writerow([repr(float(v)) for v in row])


def load_solution_csv(path, model: ScalarModel) -> TabulatedSolution:
    """Read a tabulated solution.

    Columns: ``x{i}``, ``y{a}``, ``dy{k}_{a}`` and optionally ``ddy{k}_{i}_{a}``.
    Without second derivatives the points must form a regular grid; they are
    then obtained by second-order differences of the ``dy`` columns.
    """
    n, m = model.n, model.m
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            rows = list(reader)
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise InvalidSolutionData(f"cannot read {path}: {exc}") from exc
    first = _columns(n, m, False)
    if f"x{n}" in header or f"y{m}" in header:
        raise InvalidSolutionData(f"{path}: columns describe a larger model than n={n}, m={m}")
    missing = [c for c in first if c not in header]
    if missing:
        raise InvalidSolutionData(f"{path}: missing columns {missing}")
    second = _columns(n, m, True)[len(first):]
    has_second = all(c in header for c in second)
    cols = first + (second if has_second else [])
    try:
        data = np.array([[float(r[c]) for c in cols] for r in rows], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidSolutionData(f"{path}: non-numeric entry ({exc})") from exc
    if data.size == 0:
        raise InvalidSolutionData(f"{path}: no data rows")
    if not np.all(np.isfinite(data)):
        raise InvalidSolutionData(f"{path}: non-finite entries")
    X, Y = data[:, :n], data[:, n:n + m]
    DY = data[:, n + m:n + m + n * m].reshape(-1, n, m)
    if has_second:
        DDY = data[:, n + m + n * m:].reshape(-1, n, n, m)
    else:
        DDY = _grid_second_derivatives(X, DY, path)
    sol = TabulatedSolution(model)
    for x, y, dy, ddy in zip(X, Y, DY, DDY):
        key = tuple(float(v) for v in x)
        if key in sol.samples:
            raise InvalidSolutionData(f"{path}: duplicate point {key}")
        sol.samples[key] = sample_from_jets(model, x, y, dy, ddy)
    return sol


def _grid_second_derivatives(X: np.ndarray, DY: np.ndarray, path) -> np.ndarray:
    n = X.shape[1]
    axes = [np.unique(X[:, k]) for k in range(n)]
    shape = tuple(len(a) for a in axes)
    if int(np.prod(shape)) != len(X) or any(len(a) < 3 for a in axes):
        raise InvalidSolutionData(f"{path}: no ddy columns and the points are not a full regular grid")
    for a in axes:
        steps = np.diff(a)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise InvalidSolutionData(f"{path}: grid spacing is not uniform")
    order = np.lexsort(X.T[::-1])
    grid_dy = DY[order].reshape(shape + DY.shape[1:])
    ddy = np.empty(grid_dy.shape[:-2] + (n, n, DY.shape[2]))
    for k in range(n):
        ddy[..., k, :, :] = np.gradient(grid_dy, axes[k], axis=k, edge_order=2)
    flat = ddy.reshape((-1,) + ddy.shape[n:])
    out = np.empty_like(flat)
    out[order] = flat
    return out
