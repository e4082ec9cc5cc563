import itertools

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from precanonical.dwmech import ScalarModel, free_plane_wave
from precanonical.clifford import Metric
from precanonical.gradedforms import (
    HorizontalForm,
    PhaseContext,
    back_substitution,
    bracket_kernel_variation,
    canonical_bracket_table,
    graded_antisymmetry_check,
    graded_bracket,
    hamiltonian_multivector,
    random_hamiltonian_form,
    well_defined_degree_pairs,
)
from precanonical.errors import NotHamiltonian, UndefinedBracketDegree, UnsupportedDegree
from precanonical.poly import Poly
from precanonical.gradedforms import equation_of_motion_residual

CONFIGS = [(n, m) for n in (1, 2, 3) for m in (1, 2)]


def sym(p: Poly):
    expr = sympy.Integer(0)
    for mono, c in p.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for v, e in mono:
            term *= sympy.Symbol(v) ** e
        expr += term
    return expr


def classical_poisson(F, G, m):
    """``sum_a dF/dp_a dG/dy^a - dF/dy^a dG/dp_a`` (so that ``{p, y} = 1``)."""
    out = 0
    for a in range(m):
        y, p = sympy.Symbol(f"y[{a}]"), sympy.Symbol(f"p[0,{a}]")
        out += sympy.diff(F, p) * sympy.diff(G, y) - sympy.diff(F, y) * sympy.diff(G, p)
    return sympy.expand(out)


@pytest.mark.parametrize("n,m", CONFIGS)
def test_canonical_table_exact(n, m):
    table = canonical_bracket_table(PhaseContext(n, m))
    assert len(table) == m * m + n * n * m * m + n * m * m
    assert all(ident.holds for ident in table)


def test_mechanics_table():
    (ident,) = canonical_bracket_table(PhaseContext(1, 1))[:1]
    assert ident.lhs == HorizontalForm.scalar(PhaseContext(1, 1), 1)


@pytest.mark.parametrize("m", [1, 2])
def test_mechanics_limit_matches_poisson_oracle(m):
    ctx = PhaseContext(1, m)
    rng = np.random.default_rng(11 + m)
    for _ in range(60):
        F = random_hamiltonian_form(ctx, 0, rng, 3)
        G = random_hamiltonian_form(ctx, 0, rng, 3)
        got = graded_bracket(F, G).coeffs.get((), Poly())
        assert sympy.expand(sym(got) - classical_poisson(sym(F.coeffs[()]), sym(G.coeffs[()]), m)) == 0


@pytest.mark.parametrize("n,m", CONFIGS)
def test_graded_antisymmetry(n, m):
    ctx = PhaseContext(n, m)
    rng = np.random.default_rng(100 * n + m)
    pairs = well_defined_degree_pairs(ctx)
    for k in range(50):
        r, s = pairs[k % len(pairs)]
        F1 = random_hamiltonian_form(ctx, r, rng)
        F2 = random_hamiltonian_form(ctx, s, rng)
        assert graded_antisymmetry_check(F1, F2)


@pytest.mark.parametrize("n,m", CONFIGS)
def test_well_defined_pairs_are_kernel_independent(n, m):
    ctx = PhaseContext(n, m)
    rng = np.random.default_rng(7 * n + m)
    for r, s in well_defined_degree_pairs(ctx):
        for _ in range(3):
            F1 = random_hamiltonian_form(ctx, r, rng)
            F2 = random_hamiltonian_form(ctx, s, rng)
            assert all(v.is_zero() for v in bracket_kernel_variation(F1, F2))


def test_zero_form_with_top_form_depends_on_kernel():
    ctx = PhaseContext(2, 1)
    F1 = HorizontalForm.scalar(ctx, ctx.y(0))
    F2 = HorizontalForm.volume(ctx, ctx.p(0, 0) * ctx.p(1, 0))
    assert any(not v.is_zero() for v in bracket_kernel_variation(F1, F2))


@pytest.mark.parametrize("n,m", CONFIGS)
def test_back_substitution_vanishes(n, m):
    ctx = PhaseContext(n, m)
    rng = np.random.default_rng(n + 10 * m)
    for q in sorted({0, n - 1, n}):
        for _ in range(3):
            assert back_substitution(random_hamiltonian_form(ctx, q, rng)) == {}


def test_non_hamiltonian_form_rejected():
    ctx = PhaseContext(2, 1)
    F = HorizontalForm.from_omega(ctx, {0: ctx.p(0, 0) ** 2})
    with pytest.raises(NotHamiltonian):
        hamiltonian_multivector(F)


def test_degree_errors():
    ctx = PhaseContext(3, 1)
    with pytest.raises(UnsupportedDegree):
        hamiltonian_multivector(HorizontalForm(ctx, 1, {(0,): ctx.y(0)}))
    with pytest.raises(UndefinedBracketDegree):
        graded_bracket(HorizontalForm.scalar(ctx, ctx.y(0)), HorizontalForm.scalar(ctx, ctx.p(0, 0)))


@given(st.integers(0, 2**32 - 1))
def test_bracket_bilinear(seed):
    ctx = PhaseContext(2, 1)
    rng = np.random.default_rng(seed)
    A, B = (random_hamiltonian_form(ctx, 1, rng) for _ in range(2))
    C = random_hamiltonian_form(ctx, 0, rng)
    assert graded_bracket(A + B * 3, C) == graded_bracket(A, C) + graded_bracket(B, C) * 3


def test_equation_of_motion_on_plane_wave():
    model = ScalarModel.free(Metric(2), [1.0])
    wave = free_plane_wave(model, [1.0], [0.7])
    ctx = model.context
    pts = np.random.default_rng(0).uniform(-1, 1, size=(10, 2))
    for F in (HorizontalForm.scalar(ctx, ctx.y(0)), HorizontalForm.from_omega(ctx, {i: ctx.p(i, 0) for i in range(2)})):
        assert equation_of_motion_residual(F, wave, model, pts).max() < 1e-10
