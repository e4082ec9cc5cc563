from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from ..clifford import Metric
from ..dwmech import ScalarModel
from ..errors import InvalidParameter
from ..poly import Poly

Y = "y[0]"


def _exact(value: float) -> Fraction:
    return Fraction(value) if isinstance(value, int) else Fraction.from_float(float(value))


@dataclass(frozen=True)
class QuantumModel:
    """A single real scalar field quantised in the y representation.

    ``potential=None`` selects the free-field ``V = 1/2 (m/hbar)^2 y^2``.
    """

    metric: Metric = field(default_factory=lambda: Metric(2))
    m: float = 1.0
    hbar: float = 1.0
    kappa: float = 1.0
    potential: Poly | None = None

    def __post_init__(self):
        for name in ("m", "hbar", "kappa"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidParameter(f"{name} must be a positive finite number, got {v!r}")
        if self.potential is None:
            V = Poly.var(Y, 2) * (_exact(self.m) ** 2 / _exact(self.hbar) ** 2 / 2)
            object.__setattr__(self, "potential", V)
        else:
            V = Poly.coerce(self.potential)
            extra = V.variables() - {Y}
            if extra:
                raise InvalidParameter(f"potential may only depend on {Y}, found {sorted(extra)}")
            object.__setattr__(self, "potential", V)

    @property
    def n(self) -> int:
        return self.metric.n

    @cached_property
    def v_coeffs(self) -> np.ndarray:
        """Ascending float coefficients of V(y)."""
        return np.array([float(c) for c in self.potential.univariate_coeffs(Y)])

    def V(self, y) -> np.ndarray:
        return np.polynomial.polynomial.polyval(np.asarray(y, dtype=float), self.v_coeffs)

    @property
    def hk(self) -> float:
        return self.hbar * self.kappa

    @cached_property
    def is_free(self) -> bool:
        """True when V is exactly the default free-field potential."""
        return self.potential == QuantumModel(self.metric, self.m, self.hbar, self.kappa).potential

    def oscillator_parameters(self) -> tuple[float, float] | None:
        """``(width, quantum)`` for a pure ``c y^2`` potential with c > 0, else None.

        ``-1/2 (hbar kappa)^2 f'' + c y^2 f = chi f`` has ``chi_N = hbar kappa sqrt(2c) (N + 1/2)``
        and eigenfunctions of width ``(hbar^2 kappa^2 / 2c)^(1/4)``.
        """
        v = self.v_coeffs
        if len(v) != 3 or v[0] != 0 or v[1] != 0 or not v[2] > 0:
            return None
        c = v[2]
        return (self.hk**2 / (2 * c)) ** 0.25, self.hk * math.sqrt(2 * c)

    def with_kappa(self, kappa: float) -> "QuantumModel":
        pot = None if self.is_free else self.potential
        return QuantumModel(self.metric, self.m, self.hbar, kappa, pot)

    def scalar_model(self) -> ScalarModel:
        """The classical DW model with the same metric and potential."""
        return ScalarModel(self.metric, 1, self.potential)
