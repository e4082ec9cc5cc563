"""The DW Hamiltonian operator on the field axis and its spectrum."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..errors import ConvergenceFailure, InvalidDomain, InvalidParameter
from .model import QuantumModel
from .spectral import GridFunction, SpectralFunction, central_weights, ladder_matrices


def apply_dw_hamiltonian(model: QuantumModel, f, order: int = 4):
    """``H f = -1/2 hbar^2 kappa^2 f'' + V f``.

    Spectral input gives an exact spectral result.  Grid input gives values
    on the interior nodes left by the stencil.
    """
    c = 0.5 * model.hk**2
    if isinstance(f, SpectralFunction):
        return f.derivative().derivative() * (-c) + f.times_poly(model.v_coeffs)
    if isinstance(f, GridFunction):
        d2 = f.second_derivative(order)
        return GridFunction(d2.y, -c * d2.values + model.V(d2.y) * f.restrict(d2.y))
    raise InvalidDomain(f"cannot apply the Hamiltonian to {type(f).__name__}")


@dataclass(frozen=True)
class Eigenpair:
    chi: float
    f: SpectralFunction | GridFunction
    residual: float = 0.0


def natural_width(model: QuantumModel) -> float:
    """Length scale used for the Hermite basis.

    Harmonic potentials use the exact oscillator width; otherwise the leading
    even-degree term ``c y^d`` sets ``(hbar^2 kappa^2 / 2c)^(1 / (d + 2))``.
    """
    osc = model.oscillator_parameters()
    if osc is not None:
        return osc[0]
    v = model.v_coeffs
    d = len(v) - 1
    if d < 2 or d % 2 or not v[-1] > 0:
        raise ConvergenceFailure("potential is not confining; the Hermite basis cannot converge")
    return (model.hk**2 / (2 * v[-1])) ** (1.0 / (d + 2))


def _galerkin_matrix(model: QuantumModel, K: int, width: float) -> np.ndarray:
    d = max(len(model.v_coeffs) - 1, 2)
    X, D = ladder_matrices(K + d + 1)
    H = -0.5 * model.hk**2 / width**2 * (D @ D)
    P = np.eye(len(X))
    for a in model.v_coeffs:
        H = H + a * P
        P = P @ (X * width)
    # the truncated ladders are exact on the leading K x K block
    return H[:K, :K]


def _standard_sign(c: np.ndarray) -> np.ndarray:
    j = int(np.argmax(np.abs(c)))
    return c if c[j] > 0 else -c


def eigensolve(
    model: QuantumModel,
    N_max: int,
    tol: float = 1e-8,
    basis: int | None = None,
    max_basis: int = 1024,
) -> list[Eigenpair]:
    """Lowest ``N_max + 1`` eigenpairs by Galerkin projection on Hermite functions.

    Each eigenfunction is certified by the exact residual ``||H f - chi f||``
    (f normalised in L2); the basis is doubled until every residual is below
    ``tol``.
    """
    if N_max < 0:
        raise InvalidParameter("N_max must be >= 0")
    width = natural_width(model)
    K = basis or max(2 * (N_max + 1), 32)
    while K <= max_basis:
        H = _galerkin_matrix(model, K, width)
        chis, vecs = scipy.linalg.eigh(H, subset_by_index=[0, N_max])
        out = []
        for chi, v in zip(chis, vecs.T):
            f = SpectralFunction(_standard_sign(v), width)
            r = (apply_dw_hamiltonian(model, f) - f * chi).norm()
            out.append(Eigenpair(float(chi), f, r))
        if max(e.residual for e in out) < tol:
            return out
        K *= 2
    worst = max(e.residual for e in out)
    raise ConvergenceFailure(f"eigen-residual {worst:.3e} above {tol:g} with {K // 2} basis functions")


def oscillator_spectrum(model: QuantumModel, N_max: int) -> list[float]:
    """Closed-form ``chi_N`` for a harmonic potential (``kappa m (N + 1/2)`` for the free field)."""
    osc = model.oscillator_parameters()
    if osc is None:
        raise InvalidParameter("closed-form spectrum needs a pure c y^2 potential")
    return [osc[1] * (N + 0.5) for N in range(N_max + 1)]


def oscillator_eigenfunction(model: QuantumModel, N: int) -> SpectralFunction:
    osc = model.oscillator_parameters()
    if osc is None:
        raise InvalidParameter("closed-form eigenfunctions need a pure c y^2 potential")
    return SpectralFunction.basis(N, osc[0])


def dirichlet_matrix(model: QuantumModel, y: np.ndarray, order: int = 4) -> np.ndarray:
    """Dense FD matrix of H on interior nodes ``y`` with walls one step beyond each end.

    Ghost values past a wall are odd reflections, which keeps the wide
    stencils consistent with the Dirichlet condition.
    """
    P = len(y)
    h = y[1] - y[0]
    w = central_weights(order)
    r = len(w) // 2
    A = np.zeros((P, P))
    for i in range(P):
        for s, ws in zip(range(-r, r + 1), w):
            j = i + s
            if 0 <= j < P:
                A[i, j] += ws
            elif j < -1:
                A[i, -2 - j] -= ws
            elif j > P:
                A[i, 2 * P - j] -= ws
    return -0.5 * model.hk**2 / h**2 * A + np.diag(model.V(y))


def fd_eigensolve(
    model: QuantumModel,
    N_max: int,
    points: int = 2000,
    half_width: float | None = None,
    order: int = 4,
) -> list[Eigenpair]:
    """Dense finite-difference diagonalisation on ``[-L, L]`` with Dirichlet walls.

    The default ``L`` places the walls six widths beyond the outermost
    classical turning point.
    """
    if N_max < 0 or N_max >= points:
        raise InvalidParameter("need 0 <= N_max < points")
    if half_width is None:
        ell = natural_width(model)
        half_width = ell * (math.sqrt(2 * N_max + 1) + 6)
    h = 2 * half_width / (points + 1)
    y = -half_width + h * np.arange(1, points + 1)
    A = dirichlet_matrix(model, y, order)
    chis, vecs = scipy.linalg.eigh(A, subset_by_index=[0, N_max])
    out = []
    for chi, v in zip(chis, vecs.T):
        v = _standard_sign(v) / math.sqrt(h)
        out.append(Eigenpair(float(chi), GridFunction(y, v)))
    return out


def box_spectrum(model: QuantumModel, length: float, N_max: int) -> list[float]:
    """``1/2 (hbar kappa pi (N + 1) / length)^2`` for V = 0 between hard walls."""
    return [0.5 * (model.hk * math.pi * (N + 1) / length) ** 2 for N in range(N_max + 1)]
