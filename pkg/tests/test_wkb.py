import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from precanonical.clifford import Metric, Multivector, mv_exp
from precanonical.dwmech import dwhj_values, reference_hj_solution
from precanonical.errors import DecompositionFailure, InvalidDomain, SingularHJNorm
from precanonical.quantum import (
    ModeSuperposition,
    QuantumModel,
    WKBData,
    assemble_mode,
    decompose,
    extract_wkb,
    ground_state_wkb,
    hbar_kappa_sweep,
    standing_ground_state,
    wkb_residual,
)

PTS = np.column_stack([np.linspace(0.1, 0.9, 6), np.linspace(-0.4, 0.7, 6), np.linspace(-1.5, 1.5, 6)])


def static_data(model):
    hj = reference_hj_solution(model.scalar_model())
    return hj, lambda R, R_yy=None: WKBData(
        S=lambda x, y: hj.S(x, np.array([y])),
        R=R,
        dS_dx=lambda x, y: np.zeros((model.n, model.n)),
        dS_dy=lambda x, y: hj.dS_dy(x, np.array([y]))[:, 0],
        R_yy=R_yy,
    )


@pytest.mark.parametrize("kappa", [0.3, 1.0, 4.0])
def test_constant_amplitude_gives_classical_residual(kappa):
    model = QuantumModel(kappa=kappa)
    # an S that does not solve the HJ equation, so the classical part is nonzero
    w = WKBData(S=lambda x, y: np.array([x[0] * y, y**3 + x[1]]), R=lambda x, y: 2.5)
    r = wkb_residual(model, w, PTS, side_conditions=False)
    pts = [(p[:-1], np.array([p[-1]])) for p in PTS]
    classical = np.abs(dwhj_values(model.scalar_model(), w._hj(), pts))
    assert np.array_equal(r.main, classical)
    assert np.all(r.quantum == 0)
    assert classical.max() > 1e-2


def test_quantum_potential_matches_sympy():
    a = 0.7
    y = sympy.Symbol("y")
    R = sympy.exp(-a * y**2)
    ratio = sympy.lambdify(y, sympy.simplify(sympy.diff(R, y, 2) / R))
    model = QuantumModel(hbar=0.8, kappa=1.5)
    _, make = static_data(model)
    w = make(lambda x, yy: math.exp(-a * yy * yy))
    r = wkb_residual(model, w, PTS, side_conditions=False)
    want = -0.5 * model.hk**2 * np.array([ratio(p[-1]) for p in PTS])
    assert np.allclose(r.quantum, want, rtol=1e-6, atol=1e-8)
    # S solves the classical equation, so the whole residual is the quantum term
    assert np.allclose(r.main, np.abs(want), rtol=1e-6, atol=1e-8)


def test_sweep_exponent_is_two():
    model = QuantumModel()
    _, make = static_data(model)
    w = make(lambda x, y: math.exp(-0.5 * y * y), lambda x, y: (y * y - 1) * math.exp(-0.5 * y * y))
    sweep = hbar_kappa_sweep(model, w, PTS, [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0])
    assert abs(sweep.exponent - 2.0) < 0.02
    assert np.allclose(sweep.classical, 0, atol=1e-14)


def test_ground_state_solves_quasiclassical_equation():
    model = QuantumModel(Metric(2), 1.2, 0.9, 1.6)
    w = ground_state_wkb(model)
    pts = PTS + np.array([0.0, 0.0, 0.0])
    r = wkb_residual(model, w, pts)
    assert r.main.max() < 1e-12
    assert r.side1.max() < 1e-12
    # side condition 2 is reported, not asserted: here it equals chi_0
    chi0 = assemble_mode(model, 0).chi
    assert np.allclose(r.side2, chi0)


def test_singular_norm_flagged():
    model = QuantumModel()
    w = ground_state_wkb(model)
    with pytest.raises(SingularHJNorm):
        wkb_residual(model, w, np.array([[0.0, 0.3, 0.5]]))


def test_nonpositive_amplitude():
    model = QuantumModel()
    w = WKBData(S=lambda x, y: np.zeros(2), R=lambda x, y: -1.0)
    with pytest.raises(InvalidDomain):
        wkb_residual(model, w, PTS, side_conditions=False)


def test_standing_wave_round_trip():
    model = QuantumModel(Metric(2), 1.0, 1.0, 1.3)
    Psi = standing_ground_state(model)
    ext = extract_wkb(model, Psi, PTS)
    assert ext.round_trip_error(Psi) < 1e-12
    w = ground_state_wkb(model)
    for p, S, R in zip(PTS, ext.S, ext.R):
        assert R == pytest.approx(w.R(p[:-1], p[-1]), rel=1e-12)


def test_traveling_mode_has_no_polar_form():
    model = QuantumModel()
    with pytest.raises(DecompositionFailure):
        extract_wkb(model, ModeSuperposition.single(assemble_mode(model, 0, 0.5)), PTS)


vectors = st.lists(st.floats(-2, 2), min_size=2, max_size=2)


@given(st.floats(0.1, 3), vectors, st.floats(0.2, 3.0))
def test_decompose_inverts_exponential(R, S, hk):
    g = Metric(2)
    S = np.array(S)
    ss = S[0] ** 2 - S[1] ** 2
    if abs(ss) < 1e-6 or (ss > 0 and math.sqrt(ss) / hk >= math.pi):
        return  # null directions and wrapped angles are covered separately
    if ss < 0 and math.sqrt(-ss) / hk > 6:
        return  # recovering R loses cosh^2(theta) in relative accuracy
    mv = R * mv_exp(Multivector.vector(g, S) * (1j / hk))
    psi = mv.scalar_part
    upper = mv.vector_part()
    R2, S2 = decompose(g, hk, psi, upper)
    assert R2 == pytest.approx(R, rel=1e-9)
    assert np.allclose(S2, S, atol=1e-8 * (1 + np.abs(S).max()))


def test_decompose_special_cases():
    g = Metric(2)
    assert decompose(g, 1.0, 2.0 + 0j, np.zeros(2)) == (2.0, pytest.approx(np.zeros(2)))
    R, S = decompose(g, 1.0, -2.0 + 0j, np.zeros(2))
    assert R == 2.0 and np.allclose(S, [math.pi, 0])
    R, S = decompose(g, 1.0, 1.0 + 0j, np.array([0.5j, 0.5j]))
    assert R == 1.0 and np.allclose(S, [0.5, 0.5])
    for bad in [(0j, np.zeros(2)), (1j, np.zeros(2)), (1 + 0j, np.array([1.0, 0])), (0.5 + 0j, np.array([0, 1j]))]:
        with pytest.raises(DecompositionFailure):
            decompose(g, 1.0, *bad)
