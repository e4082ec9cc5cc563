import numpy as np
import pytest
from hypothesis import given, strategies as st

from precanonical.clifford import Metric
from precanonical.dwmech import (
    HJFunctions,
    JetPoint,
    PlaneWave,
    ScalarModel,
    dw_equations_residual,
    dwhj_residual,
    finite_difference_sampler,
    free_plane_wave,
    load_solution_csv,
    oscillator_action,
    polymomenta,
    reference_hj_solution,
    write_solution_csv,
)
from precanonical.errors import InvalidParameter, InvalidSolutionData
from precanonical.gradedforms import FieldSample, HorizontalForm, equation_of_motion_residual
from precanonical.poly import Poly

PTS = np.random.default_rng(3).uniform(-1, 1, size=(12, 3))


@given(
    st.lists(st.floats(-2, 2), min_size=2, max_size=2),
    st.floats(0.1, 3.0),
)
def test_plane_wave_solves_dw_equations(k, mass):
    model = ScalarModel.free(Metric(3), [mass])
    wave = free_plane_wave(model, [mass], k)
    assert dw_equations_residual(model, wave, PTS).max() < 1e-10


def test_two_fields():
    model = ScalarModel.free(Metric(2), [1.0, 2.5])
    wave = free_plane_wave(model, [1.0, 2.5], [[0.3], [-1.1]], amplitudes=[1.0, 0.4])
    assert dw_equations_residual(model, wave, PTS[:, :2]).max() < 1e-10


def test_wrong_dispersion_is_detected():
    model = ScalarModel.free(Metric(2), [1.0])
    wave = PlaneWave(model, np.array([1.0]), np.array([[1.0, -0.7]]))
    assert dw_equations_residual(model, wave, PTS[:, :2]).max_divergence > 1e-2


def test_finite_difference_sampler_agrees_with_analytic():
    model = ScalarModel.free(Metric(2), [1.0])
    wave = free_plane_wave(model, [1.0], [0.7])
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        fd = finite_difference_sampler(model, wave.field, h)
        errs.append(dw_equations_residual(model, fd, PTS[:, :2]).max())
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 2) < 0.1)


def test_polymomenta_follow_metric():
    model = ScalarModel.free(Metric(2), [1.0])
    jp = JetPoint(np.zeros(2), np.array([0.3]), np.array([[2.0], [5.0]]))
    assert np.array_equal(polymomenta(model, jp), np.array([[2.0], [-5.0]]))


@pytest.mark.parametrize("label", ["y", "p"])
def test_equation_of_motion_forms(label):
    model = ScalarModel.free(Metric(3), [1.3])
    ctx = model.context
    wave = free_plane_wave(model, [1.3], [0.2, -0.9])
    F = (
        HorizontalForm.scalar(ctx, ctx.y(0))
        if label == "y"
        else HorizontalForm.from_omega(ctx, {i: ctx.p(i, 0) for i in range(3)})
    )
    assert equation_of_motion_residual(F, wave, model, PTS).max() < 1e-10
    if label == "y":
        # the y equation ties p to dy; break that relation
        def bad(x):
            s = wave(x)
            return FieldSample(s.x, s.y, s.dy, s.p * 1.2, s.dp)
    else:
        bad = PlaneWave(model, wave.amplitudes, wave.covectors * 1.2)
    assert equation_of_motion_residual(F, bad, model, PTS).max() > 1e-2


@given(st.floats(0.2, 3.0), st.floats(-1.0, 1.0), st.floats(-3, 3))
def test_oscillator_action(omega, t, y):
    model = ScalarModel.free(Metric(1), [omega])
    assert dwhj_residual(model, oscillator_action(omega), [(np.array([t / omega]), np.array([y]))])[0] < 1e-9 * (1 + y * y)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_reference_hj_solution(n):
    model = ScalarModel.free(Metric(n), [0.8, 1.7])
    hj = reference_hj_solution(model)
    rng = np.random.default_rng(n)
    pts = [(rng.uniform(-0.5, 0.5, n), rng.uniform(-2, 2, 2)) for _ in range(10)]
    assert dwhj_residual(model, hj, pts).max() < 1e-12
    # the same functions without analytic partials agree to difference accuracy
    fd = HJFunctions(hj.S)
    assert dwhj_residual(model, fd, pts).max() < 1e-6


def test_hj_negative_control():
    model = ScalarModel.free(Metric(1), [1.0])
    assert dwhj_residual(model, oscillator_action(1.3), [(np.array([0.4]), np.array([1.0]))])[0] > 1e-2


def test_reference_needs_free_field():
    model = ScalarModel(Metric(2), 1, Poly.var("y[0]", 4))
    with pytest.raises(InvalidParameter):
        reference_hj_solution(model)


def _grid(n):
    axes = [np.linspace(0, 1, 5)] + [np.linspace(-1, 1, 5)] * (n - 1)
    return np.array(np.meshgrid(*axes, indexing="ij")).reshape(n, -1).T


@pytest.mark.parametrize("second", [True, False])
def test_csv_round_trip(tmp_path, second):
    model = ScalarModel.free(Metric(2), [1.0])
    wave = free_plane_wave(model, [1.0], [0.7])
    path = tmp_path / "w.csv"
    write_solution_csv(path, model, wave, _grid(2), second=second)
    sol = load_solution_csv(path, model)
    res = dw_equations_residual(model, sol, sol.points).max()
    if second:
        assert res < 1e-10
    else:
        # five points per axis: second-order differences are coarse but finite
        assert 0 < res < 0.5


def test_bundled_fixture():
    from precanonical.config import default_solution

    model = ScalarModel.free(Metric(2), [1.0])
    sol = load_solution_csv(default_solution(), model)
    assert len(sol.points) == 25
    assert dw_equations_residual(model, sol, sol.points).max() < 1e-10


@pytest.mark.parametrize(
    "text",
    [
        "x0,x1,y0\n0,0,1\n",
        "x0,x1,y0,dy0_0,dy1_0\n0,0,abc,0,0\n",
        "x0,x1,y0,dy0_0,dy1_0\n0,0,nan,0,0\n",
        "x0,x1,y0,dy0_0,dy1_0\n",
        "x0,x1,x2,y0,dy0_0,dy1_0\n0,0,0,0,0,0\n",
    ],
)
def test_corrupt_csv(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(InvalidSolutionData):
        load_solution_csv(path, ScalarModel.free(Metric(2), [1.0]))


def test_missing_point_in_table(tmp_path):
    model = ScalarModel.free(Metric(2), [1.0])
    path = tmp_path / "w.csv"
    write_solution_csv(path, model, free_plane_wave(model, [1.0], [0.0]), _grid(2))
    with pytest.raises(InvalidSolutionData):
        load_solution_csv(path, model)(np.array([0.123, 0.0]))
