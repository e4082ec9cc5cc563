import itertools
from functools import reduce

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from precanonical.clifford import (
    Metric,
    Multivector,
    anticommutator,
    composition_report,
    gamma_top,
    mv_exp,
    operator_pair,
)
from precanonical.errors import InvalidParameter, MetricMismatch

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0 + 0j, -1.0])
I2 = np.eye(2, dtype=complex)


def jordan_wigner(metric: Metric) -> list[np.ndarray]:
    """Matrix generators with G_i G_j + G_j G_i = 2 g_ij, faithful for every n."""
    n_even = metric.n + metric.n % 2
    q = n_even // 2
    gens = []
    for k in range(n_even):
        j, which = divmod(k, 2)
        ops = [Z] * j + [X if which == 0 else Y] + [I2] * (q - j - 1)
        gens.append(reduce(np.kron, ops))
    return [G * (1 if s > 0 else 1j) for G, s in zip(gens, metric.diag)]


def to_matrix(mv: Multivector, gens) -> np.ndarray:
    dim = gens[0].shape[0]
    out = np.zeros((dim, dim), dtype=complex)
    for b, c in enumerate(mv.coeffs):
        if c:
            M = np.eye(dim, dtype=complex)
            for i in range(mv.metric.n):
                if b >> i & 1:
                    M = M @ gens[i]
            out += c * M
    return out


metrics = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.sampled_from([1, -1]), min_size=n, max_size=n).map(lambda d: Metric(n, tuple(d)))
)


def random_mv(metric, rng, scale=1.0):
    size = 1 << metric.n
    return Multivector(metric, scale * (rng.normal(size=size) + 1j * rng.normal(size=size)))


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("signature", ["minkowski", "euclidean"])
def test_anticommutator_exact(n, signature):
    g = Metric.minkowski(n) if signature == "minkowski" else Metric.euclidean(n)
    for i, j in itertools.product(range(n), repeat=2):
        ac = anticommutator(Multivector.gamma(g, i), Multivector.gamma(g, j))
        assert ac == Multivector.scalar(g, 2 * g.diag[i] if i == j else 0)


@given(metrics, st.integers(0, 2**32 - 1))
def test_product_matches_matrix_oracle(metric, seed):
    rng = np.random.default_rng(seed)
    gens = jordan_wigner(metric)
    a, b = random_mv(metric, rng), random_mv(metric, rng)
    assert np.allclose(to_matrix(a * b, gens), to_matrix(a, gens) @ to_matrix(b, gens), atol=1e-12)


@given(metrics, st.integers(0, 2**32 - 1))
def test_associative(metric, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_mv(metric, rng) for _ in range(3))
    assert ((a * b) * c).isclose(a * (b * c), atol=1e-11)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("signature", ["minkowski", "euclidean"])
def test_pseudoscalar_squares_to_one(n, signature):
    g = Metric.minkowski(n) if signature == "minkowski" else Metric.euclidean(n)
    gam = gamma_top(g)
    assert (gam * gam).isclose(1.0, atol=1e-14)


@given(metrics, st.integers(0, 2**32 - 1), st.floats(0.05, 3.0))
def test_exponential_matches_expm(metric, seed, scale):
    rng = np.random.default_rng(seed)
    a = random_mv(metric, rng, scale / (1 << metric.n))
    gens = jordan_wigner(metric)
    want = scipy.linalg.expm(to_matrix(a, gens))
    assert np.allclose(to_matrix(mv_exp(a), gens), want, atol=1e-10 * max(1.0, np.abs(want).max()))


def test_exponential_of_timelike_vector():
    g = Metric(2)
    theta = 0.83
    e = mv_exp(Multivector.gamma(g, 0) * (1j * theta))
    assert e.isclose(Multivector.scalar(g, np.cos(theta)) + Multivector.gamma(g, 0) * (1j * np.sin(theta)), atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_operator_pair_readings(n):
    rows = composition_report(operator_pair(Metric(n), 2.5))
    for r in rows:
        # the scalar part and the symmetrised product give delta for every (i, j)
        assert r["scalar"] and r["symmetrized"]
        # the full product and the commutator are exact on the diagonal only
        assert r["full"] == r["commutator"] == (r["i"] == r["j"])


def test_off_diagonal_product_is_a_bivector():
    pair = operator_pair(Metric(3), 1.3)
    prod = pair.composition(0, 1)
    assert prod.grade(2).isclose(prod)
    assert prod.isclose(Multivector.gamma_upper(Metric(3), 0) * Multivector.gamma(Metric(3), 1))


def test_kappa_cancels_in_composition():
    a = operator_pair(Metric(2), 1.0)
    b = operator_pair(Metric(2), 7.0)
    for i, j in itertools.product(range(2), repeat=2):
        assert a.composition(i, j).isclose(b.composition(i, j), atol=1e-14)


def test_errors():
    with pytest.raises(MetricMismatch):
        Multivector.gamma(Metric(2), 0) * Multivector.gamma(Metric(3), 0)
    with pytest.raises(InvalidParameter):
        operator_pair(Metric(2), 0.0)
    with pytest.raises(InvalidParameter):
        Metric(2, (1, 2))
