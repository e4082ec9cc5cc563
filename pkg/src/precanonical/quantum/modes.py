"""Separated solutions of the covariant Schroedinger equation and their checks.

A wave function is truncated to ``Psi = psi + psi^i gamma_i``.  Modes are
``psi = phi(x) f_N(y)`` with ``phi = exp(i K.x)``, ``K = branch (omega, -k)``
and ``psi_i = (i hbar kappa / chi_N) d_i phi f_N``.  Points are rows
``(x^0, ..., x^{n-1}, y)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..clifford import Metric, Multivector
from ..errors import InvalidDomain, InvalidParameter, InvalidSolutionData, TachyonicMode
from .eigen import apply_dw_hamiltonian, eigensolve
from .model import QuantumModel
from .spectral import SpectralFunction


# -- modes ----------------------------------------------------------------------
@dataclass(frozen=True)
class ModeSolution:
    model: QuantumModel
    N: int
    k: tuple[float, ...]
    chi: float
    omega: float
    f: SpectralFunction
    branch: int = 1

    @property
    def covector(self) -> np.ndarray:
        """``K_mu`` with ``d_mu phi = i K_mu phi``."""
        return self.branch * np.concatenate([[self.omega], -np.asarray(self.k, dtype=float)])

    def dispersion_defect(self) -> float:
        """``g^{mu nu} K_mu K_nu - chi^2 / (hbar kappa)^2``."""
        g = np.array(self.model.metric.diag, dtype=float)
        K = self.covector
        return float(np.sum(g * K**2) - (self.chi / self.model.hk) ** 2)

    @property
    def vector_ratio(self) -> complex:
        """``i hbar kappa / chi``, the map from ``d_i phi`` to ``phi_i``."""
        return 1j * self.model.hk / self.chi


def _spatial_k(model: QuantumModel, k) -> tuple[float, ...]:
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.shape != (model.n - 1,):
        raise InvalidParameter(f"need {model.n - 1} spatial wavenumbers, got {k.shape}")
    if not np.all(np.isfinite(k)):
        raise InvalidParameter("wavenumbers must be finite")
    return tuple(float(v) for v in k)


def mode_from_eigenpair(model: QuantumModel, N: int, chi: float, f: SpectralFunction, k=(), branch: int = 1) -> ModeSolution:
    if branch not in (1, -1):
        raise InvalidParameter("branch must be +1 or -1")
    if chi == 0:
        raise InvalidParameter("chi = 0 gives no vector components")
    k = _spatial_k(model, k if model.n > 1 else ())
    g = model.metric.diag
    rest = (chi / model.hk) ** 2 - sum(g[i + 1] * k[i] ** 2 for i in range(len(k)))
    omega_sq = rest / g[0]
    if omega_sq < 0:
        raise TachyonicMode(f"omega^2 = {omega_sq:.6g} < 0 for k = {k}")
    return ModeSolution(model, N, k, float(chi), math.sqrt(omega_sq), f, branch)


def assemble_mode(model: QuantumModel, N: int, k=0.0, branch: int = 1) -> ModeSolution:
    """Mode with Hermite index N and spatial wavenumber(s) k."""
    if model.n == 1:
        k = ()
    pair = eigensolve(model, N)[N]
    return mode_from_eigenpair(model, N, pair.chi, pair.f, k, branch)


# -- wave functions -------------------------------------------------------------
def _split(model: QuantumModel, points) -> tuple[np.ndarray, np.ndarray]:
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[1] != model.n + 1:
        raise InvalidDomain(f"points need {model.n + 1} coordinates (x..., y), got {P.shape[1]}")
    if not np.all(np.isfinite(P)):
        raise InvalidDomain("non-finite evaluation points")
    return P[:, :-1], P[:, -1]


class WaveComponents:
    """``Psi = psi + psi^i gamma_i``; subclasses supply the scalar data."""

    model: QuantumModel


@dataclass(frozen=True)
class ModeSuperposition(WaveComponents):
    """Finite sum ``sum_j c_j Psi_j`` of separated modes (spectral domain: N x k)."""

    model: QuantumModel
    terms: tuple[tuple[complex, ModeSolution], ...]

    def __post_init__(self):
        for c, mode in self.terms:
            if mode.model.metric != self.model.metric or mode.model.hk != self.model.hk:
                raise InvalidDomain("all modes must share the metric, hbar and kappa")
            if not np.isfinite(c):
                raise InvalidParameter("non-finite superposition coefficient")

    @classmethod
    def single(cls, mode: ModeSolution, coeff: complex = 1.0) -> "ModeSuperposition":
        return cls(mode.model, ((complex(coeff), mode),))

    @classmethod
    def zero(cls, model: QuantumModel) -> "ModeSuperposition":
        return cls(model, ())

    def __add__(self, other: "ModeSuperposition") -> "ModeSuperposition":
        return ModeSuperposition(self.model, self.terms + other.terms)

    def scaled(self, c: complex) -> "ModeSuperposition":
        return ModeSuperposition(self.model, tuple((c * a, m) for a, m in self.terms))

    # every evaluator returns (scalar (P,), lower vector (P, n)) or derivatives thereof
    def _accumulate(self, points, profile, factor):
        X, Y = _split(self.model, points)
        n = self.model.n
        psi = np.zeros(len(Y), dtype=complex)
        vec = np.zeros((len(Y), n), dtype=complex)
        for c, mode in self.terms:
            K = mode.covector
            phi = np.exp(1j * (X @ K))
            base = c * phi * profile(mode)(Y)
            s, v = factor(mode, K)
            psi += s * base
            vec += np.outer(base, v)
        return psi, vec

    @staticmethod
    def _vector(mode: ModeSolution, K):
        # psi_i / psi
        return mode.vector_ratio * 1j * K

    def values(self, points):
        return self._accumulate(points, lambda m: m.f, lambda m, K: (1.0, self._vector(m, K)))

    def derivative(self, points, mu: int):
        """``d_mu psi`` and ``d_mu psi_i`` for a spacetime index mu."""
        return self._accumulate(points, lambda m: m.f, lambda m, K: (1j * K[mu], 1j * K[mu] * self._vector(m, K)))

    def y_derivative(self, points):
        return self._accumulate(points, lambda m: m.f.derivative(), lambda m, K: (1.0, self._vector(m, K)))

    def hamiltonian(self, points, power: int = 1):
        """``H^power`` applied to every component, exactly in the spectral basis."""

        def profile(mode):
            f = mode.f
            for _ in range(power):
                f = apply_dw_hamiltonian(self.model, f)
            return f

        return self._accumulate(points, profile, lambda m, K: (1.0, self._vector(m, K)))

    def box(self, points):
        """``g^{mu nu} d_mu d_nu psi`` of the scalar part."""
        g = np.array(self.model.metric.diag, dtype=float)
        psi, _ = self._accumulate(points, lambda m: m.f, lambda m, K: (-float(np.sum(g * K**2)), 0.0 * K))
        return psi


def raise_vector(metric: Metric, lower: np.ndarray) -> np.ndarray:
    return lower * np.array(metric.diag, dtype=float)


def to_multivector(metric: Metric, psi: complex, lower: Sequence[complex]) -> Multivector:
    """``psi + psi^i gamma_i`` with ``psi^i = g^{ii} psi_i``."""
    upper = raise_vector(metric, np.asarray(lower))
    return Multivector.vector(metric, upper) + psi


def from_multivector(mv: Multivector, atol: float = 0.0) -> tuple[complex, np.ndarray]:
    """Inverse of ``to_multivector``; higher grades are rejected."""
    rest = mv - mv.grade(0) - mv.grade(1)
    if rest.norm_max() > atol:
        raise InvalidParameter("wave functions are truncated to scalar + vector parts")
    lower = raise_vector(mv.metric, mv.vector_part())
    return mv.scalar_part, lower


# -- residuals ------------------------------------------------------------------
@dataclass(frozen=True)
class SchrodingerResidual:
    scalar: np.ndarray  # |i hbar kappa d_i psi^i - H psi|
    vector: np.ndarray  # max_i |i hbar kappa d_i psi - H psi_i|

    def max(self) -> float:
        return float(max(np.max(self.scalar, initial=0.0), np.max(self.vector, initial=0.0)))


def _require_analytic(Psi) -> None:
    if not isinstance(Psi, ModeSuperposition):
        raise InvalidDomain("residuals need analytic derivatives; use a ModeSuperposition")


def component_residuals(model: QuantumModel, Psi: ModeSuperposition, points):
    """Signed residuals of the component system: scalar (P,) and lower-index vector (P, n)."""
    _require_analytic(Psi)
    n = model.n
    g = np.array(model.metric.diag, dtype=float)
    Hpsi, Hvec = Psi.hamiltonian(points)
    div = np.zeros(len(Hpsi), dtype=complex)
    grad = np.zeros((len(Hpsi), n), dtype=complex)
    for mu in range(n):
        d_psi, d_vec = Psi.derivative(points, mu)
        div += g[mu] * d_vec[:, mu]
        grad[:, mu] = d_psi
    ihk = 1j * model.hk
    return ihk * div - Hpsi, ihk * grad - Hvec


def schrodinger_residual(model: QuantumModel, Psi: ModeSuperposition, points) -> SchrodingerResidual:
    rs, rv = component_residuals(model, Psi, points)
    return SchrodingerResidual(np.abs(rs), np.max(np.abs(rv), axis=1, initial=0.0))


def gamma_form_residual(model: QuantumModel, Psi: ModeSuperposition, points) -> list[Multivector]:
    """``i hbar kappa gamma^mu d_mu Psi - H Psi`` as a Clifford element at each point."""
    _require_analytic(Psi)
    metric = model.metric
    n = model.n
    Hpsi, Hvec = Psi.hamiltonian(points)
    derivs = [Psi.derivative(points, mu) for mu in range(n)]
    out = []
    for p in range(len(Hpsi)):
        acc = -to_multivector(metric, Hpsi[p], Hvec[p])
        for mu in range(n):
            dPsi = to_multivector(metric, derivs[mu][0][p], derivs[mu][1][p])
            acc = acc + (1j * model.hk) * (Multivector.gamma_upper(metric, mu) * dPsi)
        out.append(acc)
    return out


def gamma_form_agreement(model: QuantumModel, Psi: ModeSuperposition, points) -> dict:
    """Compare the Clifford residual with the component residuals point by point.

    The scalar part must equal the scalar residual and the ``gamma_i``
    coefficient the raised vector residual.  The bivector part
    ``i hbar kappa d_i psi^j gamma^i ^ gamma_j`` is reported separately; it
    vanishes when ``psi_i`` is a gradient, as it is for every mode.
    """
    rs, rv = component_residuals(model, Psi, points)
    mvs = gamma_form_residual(model, Psi, points)
    up = raise_vector(model.metric, rv)
    scalar = max((abs(mv.scalar_part - s) for mv, s in zip(mvs, rs)), default=0.0)
    vector = max((float(np.max(np.abs(mv.vector_part() - u))) for mv, u in zip(mvs, up)), default=0.0)
    higher = max((sum((mv.grade(k) for k in range(2, model.n + 1)), Multivector(model.metric)).norm_max() for mv in mvs), default=0.0)
    return {"scalar": float(scalar), "vector": float(vector), "higher_grades": float(higher)}


def standard_schrodinger_residual(model: QuantumModel, Psi: ModeSuperposition, points) -> np.ndarray:
    """``|i hbar kappa d_t psi - H psi|``: the n = 1 reading of the covariant equation.

    For n = 1 the covariant operator is ``i hbar kappa gamma_0 d_t - H``; on
    amplitudes with ``gamma_0 Psi = Psi`` it acts as the ordinary
    Schroedinger operator with hbar replaced by ``hbar kappa``.
    """
    _require_analytic(Psi)
    if model.n != 1:
        raise InvalidDomain("the standard Schroedinger form is the n = 1 case")
    d_psi, _ = Psi.derivative(points, 0)
    Hpsi, _ = Psi.hamiltonian(points)
    return np.abs(1j * model.hk * d_psi - Hpsi)


def second_order_residual(model: QuantumModel, Psi: ModeSuperposition, points) -> np.ndarray:
    """``|hbar^2 box psi + kappa^-2 H^2 psi|`` for the scalar part."""
    _require_analytic(Psi)
    H2, _ = Psi.hamiltonian(points, power=2)
    return np.abs(model.hbar**2 * Psi.box(points) + H2 / model.kappa**2)


def kappa_cancellation(model: QuantumModel, N: int, k, lam: float) -> dict:
    """Differences in the space-time data of a mode under ``kappa -> lam kappa`` at fixed m."""
    a = assemble_mode(model, N, k)
    b = assemble_mode(model.with_kappa(model.kappa * lam), N, k)
    return {
        "omega": abs(a.omega - b.omega),
        "vector_ratio": abs(a.vector_ratio - b.vector_ratio),
        "chi_scaling": abs(b.chi - lam * a.chi),
    }


# -- grids ----------------------------------------------------------------------
@dataclass(frozen=True)
class GridWave(WaveComponents):
    """Components sampled on a tensor grid over ``(x^0, ..., x^{n-1}, y)``."""

    model: QuantumModel
    axes: tuple[np.ndarray, ...]
    psi: np.ndarray
    lower: np.ndarray  # shape (n,) + grid shape

    def __post_init__(self):
        shape = tuple(len(a) for a in self.axes)
        if len(self.axes) != self.model.n + 1:
            raise InvalidDomain(f"need {self.model.n + 1} axes, got {len(self.axes)}")
        if self.psi.shape != shape or self.lower.shape != (self.model.n,) + shape:
            raise InvalidDomain("component arrays do not match the grid")
        for a in self.axes:
            steps = np.diff(a)
            if len(a) < 2 or not np.all(steps > 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
                raise InvalidDomain("grid axes must be uniform and increasing")
        if not (np.all(np.isfinite(self.psi)) and np.all(np.isfinite(self.lower))):
            raise InvalidDomain("non-finite grid components")

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple(float(a[1] - a[0]) for a in self.axes)

    def l2_norm(self) -> float:
        """Unweighted discrete L2 norm of all components; not a physical inner product."""
        cell = math.prod(self.spacings)
        total = np.sum(np.abs(self.psi) ** 2) + np.sum(np.abs(self.lower) ** 2)
        return float(np.sqrt(total * cell))


def sample_on_grid(Psi: ModeSuperposition, axes: Sequence[np.ndarray]) -> GridWave:
    axes = tuple(np.asarray(a, dtype=float) for a in axes)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    psi, vec = Psi.values(pts)
    shape = mesh[0].shape
    return GridWave(Psi.model, axes, psi.reshape(shape), np.moveaxis(vec, 1, 0).reshape((Psi.model.n,) + shape))


def conservation_field(model: QuantumModel, grid: GridWave) -> np.ndarray:
    """Discrete ``d_i J^i - (i hbar kappa / 2) d_y A`` with second-order central differences.

    ``J^i = conj(psi) psi^i + psi conj(psi^i)`` and
    ``A = conj(psi) <->d_y psi + conj(psi^i) <->d_y psi_i``.
    Returned on interior nodes (two layers trimmed on every axis).
    """
    n = model.n
    if any(len(a) < 5 for a in grid.axes):
        raise InvalidDomain("conservation check needs at least 5 points per axis")
    h = grid.spacings
    psi, lower = grid.psi, grid.lower
    upper = raise_vector(model.metric, np.moveaxis(lower, 0, -1))
    upper = np.moveaxis(upper, -1, 0)
    div = np.zeros(psi.shape)
    for i in range(n):
        J = 2.0 * np.real(np.conj(psi) * upper[i])
        div += np.gradient(J, h[i], axis=i, edge_order=2)

    def antisym(a, b):
        db = np.gradient(b, h[n], axis=n, edge_order=2)
        da = np.gradient(a, h[n], axis=n, edge_order=2)
        return np.conj(a) * db - np.conj(da) * b

    A = antisym(psi, psi)
    for i in range(n):
        A = A + np.conj(upper[i]) * np.gradient(lower[i], h[n], axis=n, edge_order=2) - np.conj(
            np.gradient(upper[i], h[n], axis=n, edge_order=2)
        ) * lower[i]
    rhs = 0.5j * model.hk * np.gradient(A, h[n], axis=n, edge_order=2)
    res = div - rhs
    inner = tuple(slice(2, -2) for _ in range(n + 1))
    return res[inner]


@dataclass(frozen=True)
class ConvergenceStudy:
    spacings: list[float]
    residuals: list[float]

    @property
    def orders(self) -> list[float]:
        r = self.residuals
        return [math.log2(r[i] / r[i + 1]) for i in range(len(r) - 1)]

    @property
    def order(self) -> float:
        return self.orders[-1]

    def to_json(self, op: str = "conservation") -> list[dict]:
        return [
            {"op": op, "grid": h, "residual": r, "order": (None if i == 0 else self.orders[i - 1])}
            for i, (h, r) in enumerate(zip(self.spacings, self.residuals))
        ]


def conservation_residual(
    model: QuantumModel,
    Psi: ModeSuperposition,
    lows: Sequence[float],
    highs: Sequence[float],
    base_points: int = 11,
    levels: int = 4,
) -> ConvergenceStudy:
    """Residual of the conservation law on nested grids refined by factor 2.

    The max-norm is taken over nodes of the coarsest grid (two layers in
    from its boundary) so every level is compared on the same points.
    """
    if base_points < 5:
        raise InvalidDomain("conservation check needs at least 5 points per axis")
    if levels < 2:
        raise InvalidParameter("need at least two refinement levels for an order estimate")
    hs, rs = [], []
    for lev in range(levels):
        pts = (base_points - 1) * 2**lev + 1
        axes = [np.linspace(lo, hi, pts) for lo, hi in zip(lows, highs)]
        res = conservation_field(model, sample_on_grid(Psi, axes))
        stride = 2**lev
        # interior array index j corresponds to grid node j + 2
        first = 2 * stride - 2
        coarse = res[tuple(slice(first, res.shape[d] - first, stride) for d in range(res.ndim))]
        hs.append(float(axes[0][1] - axes[0][0]))
        rs.append(float(np.max(np.abs(coarse))))
    return ConvergenceStudy(hs, rs)


# -- columnar files ---------------------------------------------------------------
def _wave_columns(n: int) -> list[str]:
    coords = ["t"] + [f"x{i}" for i in range(1, n)] + ["y"]
    comps = ["psi"] + [f"psi_{i}" for i in range(n)]
    return coords + [f"{part}_{c}" for c in comps for part in ("re", "im")]


def write_wave_csv(path, grid: GridWave) -> None:
    n = grid.model.n
    mesh = np.meshgrid(*grid.axes, indexing="ij")
    cols = [m.ravel() for m in mesh]
    for comp in [grid.psi] + [grid.lower[i] for i in range(n)]:
        cols += [comp.real.ravel(), comp.imag.ravel()]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_wave_columns(n))
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])


def load_wave_csv(path, model: QuantumModel) -> GridWave:
    n = model.n
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except (OSError, ValueError) as exc:
        raise InvalidSolutionData(f"cannot read {path}: {exc}") from exc
    names = list(data.dtype.names or ())
    if names != _wave_columns(n):
        raise InvalidSolutionData(f"{path}: expected columns {_wave_columns(n)}, found {names}")
    table = np.stack([np.atleast_1d(data[c]) for c in names], axis=1)
    if not np.all(np.isfinite(table)):
        raise InvalidSolutionData(f"{path}: non-finite entries")
    axes = [np.unique(table[:, d]) for d in range(n + 1)]
    shape = tuple(len(a) for a in axes)
    if math.prod(shape) != len(table):
        raise InvalidSolutionData(f"{path}: rows do not form a full grid")
    order = np.lexsort(table[:, : n + 1].T[::-1])
    table = table[order]
    comp = [table[:, n + 1 + 2 * j] + 1j * table[:, n + 2 + 2 * j] for j in range(n + 1)]
    psi = comp[0].reshape(shape)
    lower = np.stack([c.reshape(shape) for c in comp[1:]])
    return GridWave(model, tuple(axes), psi, lower)
