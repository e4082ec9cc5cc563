import numpy as np
import pytest
from hypothesis import given, strategies as st

from precanonical.clifford import Metric, Multivector
from precanonical.errors import InvalidDomain, InvalidParameter, InvalidSolutionData, TachyonicMode
from precanonical.poly import Poly
from precanonical.quantum import (
    ModeSuperposition,
    QuantumModel,
    assemble_mode,
    conservation_field,
    conservation_residual,
    from_multivector,
    gamma_form_agreement,
    kappa_cancellation,
    load_wave_csv,
    sample_on_grid,
    schrodinger_residual,
    second_order_residual,
    standard_schrodinger_residual,
    to_multivector,
    write_wave_csv,
)

QUARTIC = Poly.var("y[0]", 2) / 2 + Poly.var("y[0]", 4) / 10


def points(n, count=8, seed=0):
    rng = np.random.default_rng(seed)
    return np.column_stack([rng.uniform(-1, 1, (count, n)), rng.uniform(-2, 2, count)])


def fd_residual(model, Psi, P, h=1e-3):
    """Component residuals from central differences of the sampled values only."""
    n = model.n
    g = np.array(model.metric.diag, dtype=float)
    psi, vec = Psi.values(P)

    def shifted(d, s):
        Q = P.copy()
        Q[:, d] += s
        return Psi.values(Q)

    div = np.zeros(len(P), dtype=complex)
    grad = np.zeros((len(P), n), dtype=complex)
    for mu in range(n):
        (pp, vp), (pm, vm) = shifted(mu, h), shifted(mu, -h)
        div += g[mu] * (vp[:, mu] - vm[:, mu]) / (2 * h)
        grad[:, mu] = (pp - pm) / (2 * h)
    (pp, vp), (pm, vm) = shifted(n, h), shifted(n, -h)
    c = 0.5 * model.hk**2
    V = model.V(P[:, -1])
    Hpsi = -c * (pp - 2 * psi + pm) / h**2 + V * psi
    Hvec = -c * (vp - 2 * vec + vm) / h**2 + V[:, None] * vec
    ihk = 1j * model.hk
    return np.abs(ihk * div - Hpsi), np.abs(ihk * grad - Hvec).max(axis=1)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("potential", [None, QUARTIC])
def test_modes_solve_component_system(n, potential):
    model = QuantumModel(Metric(n), 1.3, 0.8, 1.7, potential)
    for N in (0, 1, 3):
        for branch in (1, -1):
            mode = assemble_mode(model, N, [0.6, -0.2][: n - 1], branch)
            Psi = ModeSuperposition.single(mode)
            P = points(n, seed=N)
            assert schrodinger_residual(model, Psi, P).max() < 1e-8
            s, v = fd_residual(model, Psi, P)
            assert max(s.max(), v.max()) < 1e-4


def test_fd_oracle_detects_wrong_frequency():
    model = QuantumModel()
    mode = assemble_mode(model, 1, 0.5)
    from dataclasses import replace

    bad = ModeSuperposition.single(replace(mode, omega=mode.omega * 1.05))
    s, _ = fd_residual(model, bad, points(2))
    assert s.max() > 1e-2
    assert schrodinger_residual(model, bad, points(2)).max() > 1e-2


@given(st.floats(-3, 3), st.floats(0.2, 4.0), st.floats(0.2, 4.0))
def test_ground_state_dispersion(k, m, hbar):
    model = QuantumModel(Metric(2), m, hbar, 1.0)
    mode = assemble_mode(model, 0, k)
    assert abs((mode.omega**2 - k**2) / (m / (2 * hbar)) ** 2 - 1) < 1e-12
    assert abs(mode.dispersion_defect()) < 1e-9 * (1 + mode.omega**2)


def test_tachyonic_mode():
    model = QuantumModel(Metric(2, (-1, -1)))
    with pytest.raises(TachyonicMode):
        assemble_mode(model, 0, 0.0)


def test_gamma_form_matches_components():
    model = QuantumModel(Metric(3), potential=QUARTIC)
    Psi = ModeSuperposition.single(assemble_mode(model, 2, [0.4, 0.1])) + ModeSuperposition.single(
        assemble_mode(model, 0, [-0.3, 0.2]), 0.5j
    )
    agree = gamma_form_agreement(model, Psi, points(3))
    assert agree["scalar"] < 1e-12 and agree["vector"] < 1e-12 and agree["higher_grades"] < 1e-12


@pytest.mark.parametrize("potential", [None, QUARTIC])
def test_one_dimensional_reduction(potential):
    model = QuantumModel(Metric(1), 1.0, 1.0, 1.4, potential)
    mode = assemble_mode(model, 2, branch=-1)
    Psi = ModeSuperposition.single(mode)
    P = points(1)
    psi, vec = Psi.values(P)
    # gamma_0 Psi = Psi on this branch
    for s, v in zip(psi, vec):
        mv = to_multivector(model.metric, s, v)
        assert (Multivector.gamma(model.metric, 0) * mv).isclose(mv, atol=1e-12)
    assert standard_schrodinger_residual(model, Psi, P).max() < 1e-8


@pytest.mark.parametrize("n", [1, 2, 3])
def test_second_order_consequence(n):
    model = QuantumModel(Metric(n), 0.9, 1.2, 2.0)
    Psi = ModeSuperposition.single(assemble_mode(model, 1, [0.5, 0.3][: n - 1])) + ModeSuperposition.single(
        assemble_mode(model, 4, [-0.2, 0.7][: n - 1]), 0.3
    )
    assert second_order_residual(model, Psi, points(n)).max() < 1e-8


def test_kappa_cancels_in_spacetime_data():
    out = kappa_cancellation(QuantumModel(), 3, 0.7, 5.0)
    assert max(out.values()) < 1e-10


def test_multivector_round_trip():
    g = Metric(3)
    psi, lower = 0.3 - 1j, np.array([1.0, 2j, -0.5])
    s, v = from_multivector(to_multivector(g, psi, lower))
    assert s == psi and np.allclose(v, lower)
    with pytest.raises(InvalidParameter):
        from_multivector(Multivector.blade(g, (0, 1)))


def test_conservation_converges_at_second_order():
    model = QuantumModel()
    Psi = ModeSuperposition.single(assemble_mode(model, 0, 0.8)) + ModeSuperposition.single(
        assemble_mode(model, 1, -0.4), 0.7j
    )
    study = conservation_residual(model, Psi, (0, 0, -1), (1, 1, 1), base_points=11, levels=4)
    assert len(study.orders) == 3
    assert all(abs(o - 2) < 0.1 for o in study.orders)


def test_single_mode_current_is_exactly_conserved():
    model = QuantumModel()
    Psi = ModeSuperposition.single(assemble_mode(model, 2, 0.5))
    axes = [np.linspace(0, 1, 9), np.linspace(0, 1, 9), np.linspace(-1, 1, 9)]
    assert np.max(np.abs(conservation_field(model, sample_on_grid(Psi, axes)))) < 1e-12


def test_wave_csv_round_trip(tmp_path):
    model = QuantumModel()
    Psi = ModeSuperposition.single(assemble_mode(model, 1, 0.3))
    grid = sample_on_grid(Psi, [np.linspace(0, 1, 4), np.linspace(0, 1, 3), np.linspace(-1, 1, 5)])
    path = tmp_path / "wave.csv"
    write_wave_csv(path, grid)
    back = load_wave_csv(path, model)
    assert np.allclose(back.psi, grid.psi, atol=1e-15) and np.allclose(back.lower, grid.lower, atol=1e-15)
    assert back.l2_norm() == pytest.approx(grid.l2_norm())
    text = path.read_text().splitlines()
    path.write_text("\n".join(text[:-1]) + "\n")
    with pytest.raises(InvalidSolutionData):
        load_wave_csv(path, model)


def test_domain_errors():
    model = QuantumModel()
    Psi = ModeSuperposition.single(assemble_mode(model, 0, 0.0))
    with pytest.raises(InvalidDomain):
        Psi.values(np.zeros((3, 2)))
    with pytest.raises(InvalidDomain):
        ModeSuperposition(model, ((1.0, assemble_mode(model.with_kappa(2.0), 0, 0.0)),))
    with pytest.raises(InvalidDomain):
        conservation_field(model, sample_on_grid(Psi, [np.linspace(0, 1, 4)] * 3))
