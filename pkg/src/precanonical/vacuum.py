"""Composed precanonical vacuum amplitude against the functional Schroedinger vacuum.

Both vacua are Gaussians ``exp(-c(k) |y~(k)|^2)`` per spatial Fourier mode.
The functional picture gives ``c = omega_k / (2 V hbar)`` with
``omega_k = sqrt(m^2/hbar^2 + k^2)``; the product of precanonical ground
states gives ``c = m Q / (2 (2 pi)^(n-1) V hbar^2 kappa)``, which reduces to
``m / (2 V hbar^2)`` once ``kappa = Q / (2 pi)^(n-1)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable

from .errors import InvalidParameter


@dataclass(frozen=True)
class CutoffConfig:
    Q: float = 2 * math.pi
    Vbox: float = 1.0
    n: int = 2
    hbar: float = 1.0
    m: float = 1.0

    def __post_init__(self):
        for name in ("Q", "Vbox", "hbar", "m"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidParameter(f"{name} must be a positive finite number, got {v!r}")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise InvalidParameter(f"n must be a positive integer, got {self.n!r}")


def kappa_from_cutoff(cfg: CutoffConfig) -> float:
    return cfg.Q / (2 * math.pi) ** (cfg.n - 1)


def functional_coeff(cfg: CutoffConfig, k: float) -> float:
    omega = math.hypot(cfg.m / cfg.hbar, k)
    return omega / (2 * cfg.Vbox * cfg.hbar)


def composed_coeff(cfg: CutoffConfig, kappa: float | None = None) -> float:
    """Per-mode coefficient of the composed amplitude; ``kappa`` defaults to the identified value."""
    if kappa is None:
        kappa = kappa_from_cutoff(cfg)
    if not kappa > 0:
        raise InvalidParameter(f"kappa must be positive, got {kappa}")
    # m Q / (2 (2 pi)^(n-1) V hbar^2 kappa), grouped so the identified case cancels exactly
    return cfg.m / (2 * cfg.Vbox * cfg.hbar**2) * (kappa_from_cutoff(cfg) / kappa)


@dataclass(frozen=True)
class ModeCoefficients:
    k: float
    functional_coeff: float
    composed_coeff: float

    @property
    def ratio(self) -> float:
        """composed / functional = (m / hbar) / omega_k when kappa is identified."""
        return self.composed_coeff / self.functional_coeff


def compare(cfg: CutoffConfig, k_list: Iterable[float], kappa: float | None = None) -> list[ModeCoefficients]:
    composed = composed_coeff(cfg, kappa)
    return [ModeCoefficients(float(k), functional_coeff(cfg, k), composed) for k in k_list]


def long_wave_deviation(cfg: CutoffConfig, k: float) -> float:
    """Leading small-k deviation ``hbar^2 k^2 / 2 m^2`` of the ratio from one."""
    return (cfg.hbar * k / cfg.m) ** 2 / 2


def write_csv(path, rows: Iterable[ModeCoefficients]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "functional_coeff", "composed_coeff", "ratio"])
        for r in rows:
            w.writerow([repr(r.k), repr(r.functional_coeff), repr(r.composed_coeff), repr(r.ratio)])
