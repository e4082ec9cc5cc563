import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from precanonical.errors import InvalidParameter
from precanonical.vacuum import (
    CutoffConfig,
    compare,
    composed_coeff,
    kappa_from_cutoff,
    long_wave_deviation,
    write_csv,
)

u = sympy.Symbol("u", positive=True)
# independent closed form: ratio = (m/hbar) / sqrt(m^2/hbar^2 + k^2) with u = hbar k / m
RATIO = sympy.lambdify(u, 1 / sympy.sqrt(1 + u**2))


def test_ratio_is_one_at_zero():
    assert compare(CutoffConfig(), [0.0])[0].ratio == 1.0


@given(st.floats(0.1, 50), st.integers(1, 4), st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.1, 5))
def test_ratio_at_zero_any_cutoff(Q, n, V, hbar, m):
    cfg = CutoffConfig(Q, V, n, hbar, m)
    assert kappa_from_cutoff(cfg) == pytest.approx(Q / (2 * math.pi) ** (n - 1))
    assert compare(cfg, [0.0])[0].ratio == pytest.approx(1.0, abs=1e-15)
    assert compare(cfg, [0.0], kappa=2 * kappa_from_cutoff(cfg))[0].ratio == pytest.approx(0.5, abs=1e-15)


def test_long_wave_band():
    cfg = CutoffConfig(m=2.0, hbar=0.5)
    ks = np.linspace(0, 0.01 * cfg.m / cfg.hbar, 101)
    rows = compare(cfg, ks)
    assert max(abs(r.ratio - 1) for r in rows) <= 5.1e-5
    for r in rows:
        assert r.ratio == pytest.approx(RATIO(cfg.hbar * r.k / cfg.m), rel=1e-14)


def test_leading_order_deviation():
    series = sympy.series(1 / sympy.sqrt(1 + u**2), u, 0, 4).removeO()
    assert sympy.simplify(series - (1 - u**2 / 2)) == 0
    cfg = CutoffConfig()
    for k in np.linspace(1e-3, 0.1, 25):
        dev = 1 - compare(cfg, [k])[0].ratio
        assert abs(dev / long_wave_deviation(cfg, k) - 1) < 0.05


def test_composed_coefficient_is_k_independent():
    cfg = CutoffConfig(n=3)
    rows = compare(cfg, [0.0, 1.0, 5.0])
    assert len({r.composed_coeff for r in rows}) == 1
    assert rows[0].composed_coeff == composed_coeff(cfg)


def test_csv(tmp_path):
    path = tmp_path / "v.csv"
    write_csv(path, compare(CutoffConfig(), [0.0, 0.5]))
    lines = path.read_text().splitlines()
    assert lines[0] == "k,functional_coeff,composed_coeff,ratio" and len(lines) == 3


@pytest.mark.parametrize("kw", [{"Q": 0.0}, {"Vbox": -1.0}, {"n": 0}, {"m": float("inf")}])
def test_invalid(kw):
    with pytest.raises(InvalidParameter):
        CutoffConfig(**kw)


def test_invalid_kappa():
    with pytest.raises(InvalidParameter):
        composed_coeff(CutoffConfig(), kappa=0.0)
