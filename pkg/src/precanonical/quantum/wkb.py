"""Quasiclassical Ansatz ``Psi = R exp(i S^mu gamma_mu / hbar kappa)``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..clifford import Metric, Multivector, mv_exp
from ..dwmech import HJFunctions, dwhj_values
from ..errors import DecompositionFailure, InvalidDomain, SingularHJNorm
from .modes import ModeSuperposition, assemble_mode, raise_vector, to_multivector
from .model import QuantumModel


@dataclass
class WKBData:
    """HJ functions ``S^mu(x, y)`` (upper index) and amplitude ``R(x, y) > 0``.

    Optional analytic derivatives: ``dS_dx(x, y)[i, k] = d_k S^i``,
    ``dS_dy(x, y)[i] = dS^i/dy`` and ``R_yy(x, y)``; missing ones use
    central differences with step ``h``.
    """

    S: Callable
    R: Callable
    dS_dx: Callable | None = None
    dS_dy: Callable | None = None
    R_yy: Callable | None = None
    h: float = 1e-4

    def _hj(self) -> HJFunctions:
        def S(x, y):
            return np.asarray(self.S(x, float(y[0])), dtype=float)

        dS_dx = None if self.dS_dx is None else (lambda x, y: self.dS_dx(x, float(y[0])))
        dS_dy = None if self.dS_dy is None else (lambda x, y: np.asarray(self.dS_dy(x, float(y[0])))[:, None])
        return HJFunctions(S, dS_dx, dS_dy, self.h)

    def gradient(self, x, y) -> np.ndarray:
        return self._hj().field_gradient(x, np.array([y]))[:, 0]

    def jacobian(self, x, y) -> np.ndarray:
        if self.dS_dx is not None:
            return np.asarray(self.dS_dx(x, y), dtype=float)
        cols = []
        for k in range(len(x)):
            e = np.zeros(len(x))
            e[k] = self.h
            cols.append((np.asarray(self.S(x + e, y)) - np.asarray(self.S(x - e, y))) / (2 * self.h))
        return np.array(cols).T

    def laplacian_ratio(self, x, y) -> float:
        """``R_yy / R``."""
        R = float(self.R(x, y))
        if not R > 0:
            raise InvalidDomain(f"R must be positive, got {R} at x={x}, y={y}")
        if self.R_yy is not None:
            return float(self.R_yy(x, y)) / R
        h = self.h
        return (float(self.R(x, y + h)) - 2 * R + float(self.R(x, y - h))) / (h * h * R)


@dataclass(frozen=True)
class WKBResidual:
    main: np.ndarray
    side1: np.ndarray
    side2: np.ndarray
    classical: np.ndarray  # signed DW HJ residual without the quantum term
    quantum: np.ndarray  # signed -1/2 (hbar kappa)^2 R_yy / R


def _points(model: QuantumModel, points):
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[1] != model.n + 1:
        raise InvalidDomain(f"points need {model.n + 1} coordinates (x..., y)")
    return [(row[:-1], float(row[-1])) for row in P]


def hj_norm(metric: Metric, S: np.ndarray) -> float:
    """``|S| = sqrt(|S_i S^i|)``."""
    g = np.array(metric.diag, dtype=float)
    return math.sqrt(abs(float(np.sum(g * S**2))))


def wkb_residual(model: QuantumModel, w: WKBData, points, side_conditions: bool = True) -> WKBResidual:
    """Residuals of the quasiclassical DW HJ equation and its two side conditions.

    ``main = |d_mu S^mu + 1/2 d_y S^mu d_y S_mu + V - 1/2 (hbar kappa)^2 R_yy / R|``,
    ``side1 = |d_i S^i - (S^i / |S|) d_i |S||`` and
    ``side2 = |d_y S^i d_y S_i - d_i S^i|``.
    """
    pts = _points(model, points)
    g = np.array(model.metric.diag, dtype=float)
    classical = dwhj_values(model.scalar_model(), w._hj(), [(x, np.array([y])) for x, y in pts])
    quantum = np.array([-0.5 * model.hk**2 * w.laplacian_ratio(x, y) for x, y in pts])
    side1, side2 = [], []
    if side_conditions:
        for x, y in pts:
            S = np.asarray(w.S(x, y), dtype=float)
            J = w.jacobian(x, y)
            div = float(np.trace(J))
            q = float(np.sum(g * S**2))
            norm = math.sqrt(abs(q))
            if norm == 0:
                raise SingularHJNorm(f"|S| = 0 at x={x}, y={y}")
            # d_i |S| = sign(q) S_j d_i S^j / |S|
            d_norm = math.copysign(1.0, q) * (g * S) @ J / norm
            side1.append(abs(div - float(S @ d_norm) / norm))
            dy = w.gradient(x, y)
            side2.append(abs(float(np.sum(g * dy**2)) - div))
    return WKBResidual(
        np.abs(classical + quantum),
        np.array(side1),
        np.array(side2),
        classical,
        quantum,
    )


@dataclass(frozen=True)
class SweepResult:
    hbar_kappa: np.ndarray
    main: np.ndarray  # max-norm of the full residual
    classical: np.ndarray  # max-norm of the classical residual
    quantum: np.ndarray  # max-norm of the quantum-potential contribution

    @property
    def exponent(self) -> float:
        slope, _ = np.polyfit(np.log(self.hbar_kappa), np.log(self.quantum), 1)
        return float(slope)


def hbar_kappa_sweep(model: QuantumModel, w: WKBData, points, kappas: Sequence[float]) -> SweepResult:
    """Evaluate the residual at fixed (S, R) for several kappa at fixed hbar and V."""
    hk, main, cl, qu = [], [], [], []
    for kappa in kappas:
        mk = model.with_kappa(kappa)
        r = wkb_residual(mk, w, points, side_conditions=False)
        hk.append(mk.hk)
        main.append(float(np.max(r.main)))
        cl.append(float(np.max(np.abs(r.classical))))
        qu.append(float(np.max(np.abs(r.quantum))))
    return SweepResult(np.array(hk), np.array(main), np.array(cl), np.array(qu))


# -- extraction -----------------------------------------------------------------
@dataclass(frozen=True)
class WKBExtraction:
    """Pointwise ``(R, S^mu)`` recovered from a wave function."""

    metric: Metric
    hbar_kappa: float
    points: np.ndarray
    R: np.ndarray
    S: np.ndarray  # (P, n), upper index

    def reassemble(self) -> list[Multivector]:
        out = []
        for R, S in zip(self.R, self.S):
            u = Multivector.vector(self.metric, S)
            out.append(R * mv_exp(u * (1j / self.hbar_kappa)))
        return out

    def round_trip_error(self, Psi) -> float:
        psi, lower = Psi.values(self.points)
        err = 0.0
        for mv, s, v in zip(self.reassemble(), psi, lower):
            err = max(err, (mv - to_multivector(self.metric, s, v)).norm_max())
        return err


def decompose(metric: Metric, hbar_kappa: float, psi: complex, upper: np.ndarray, rtol: float = 1e-10):
    """``(R, S)`` with ``psi + upper^mu gamma_mu = R exp(i S^mu gamma_mu / hbar kappa)``.

    Requires a real scalar part and an imaginary vector part.  The timelike,
    spacelike and null cases of ``S.S`` take the cos, cosh and linear
    branches of the exponential.  In the spacelike case R comes from
    ``psi^2 - v.v`` and loses about ``cosh^2`` of the rapidity in relative
    accuracy.
    """
    g = np.array(metric.diag, dtype=float)
    upper = np.asarray(upper, dtype=complex)
    scale = max(abs(psi), float(np.max(np.abs(upper), initial=0.0)))
    if scale == 0:
        raise DecompositionFailure("Psi = 0 has no polar form")
    if abs(psi.imag) > rtol * scale or np.any(np.abs(upper.real) > rtol * scale):
        raise DecompositionFailure("needs a real scalar part and an imaginary vector part")
    s = psi.real
    w = upper.imag
    ww = float(np.sum(g * w**2))
    w2 = float(np.sum(w**2))
    if w2 <= (rtol * scale) ** 2:
        if s > 0:
            return s, np.zeros(metric.n)
        timelike = [i for i in range(metric.n) if g[i] > 0]
        if not timelike:
            raise DecompositionFailure("negative scalar needs a timelike direction")
        S = np.zeros(metric.n)
        S[timelike[0]] = math.pi * hbar_kappa
        return -s, S
    if ww > rtol * w2:
        root = math.sqrt(ww)
        R = math.sqrt(s * s + ww)
        theta = math.atan2(root, s)
        return R, hbar_kappa * theta * w / root
    if ww < -rtol * w2:
        root = math.sqrt(-ww)
        if not s > root:
            raise DecompositionFailure(f"spacelike exponent needs psi > sqrt(-v.v): {s} vs {root}")
        R = math.sqrt(s * s - root * root)
        theta = math.atanh(root / s)
        return R, hbar_kappa * theta * w / root
    if not s > 0:
        raise DecompositionFailure("null exponent needs a positive scalar part")
    return s, hbar_kappa * w / s


def extract_wkb(model: QuantumModel, Psi, points, rtol: float = 1e-10) -> WKBExtraction:
    P = np.atleast_2d(np.asarray(points, dtype=float))
    psi, lower = Psi.values(P)
    upper = raise_vector(model.metric, lower)
    Rs, Ss = [], []
    for j in range(len(P)):
        try:
            R, S = decompose(model.metric, model.hk, complex(psi[j]), upper[j], rtol)
        except DecompositionFailure as exc:
            raise DecompositionFailure(f"at point {P[j]}: {exc}") from None
        Rs.append(R)
        Ss.append(S)
    return WKBExtraction(model.metric, model.hk, P, np.array(Rs), np.array(Ss))


def standing_ground_state(model: QuantumModel) -> ModeSuperposition:
    """``(Psi_+ + Psi_-) / 2`` at N = 0, k = 0, equal to ``f_0 exp(-i omega_0 t gamma_0)``."""
    plus = assemble_mode(model, 0, 0.0, branch=1)
    minus = assemble_mode(model, 0, 0.0, branch=-1)
    return ModeSuperposition(model, ((0.5, plus), (0.5, minus)))


def ground_state_wkb(model: QuantumModel) -> WKBData:
    """Analytic ``S = (-chi_0 t, 0, ...)`` and ``R = f_0`` of the standing ground state."""
    mode = assemble_mode(model, 0, 0.0)
    chi, f, n = mode.chi, mode.f, model.n
    fpp = f.derivative().derivative()

    def S(x, y):
        out = np.zeros(n)
        out[0] = -chi * x[0]
        return out

    def dS_dx(x, y):
        J = np.zeros((n, n))
        J[0, 0] = -chi
        return J

    return WKBData(
        S=S,
        R=lambda x, y: float(f(y)),
        dS_dx=dS_dx,
        dS_dy=lambda x, y: np.zeros(n),
        R_yy=lambda x, y: float(fpp(y)),
    )
