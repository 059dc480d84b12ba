import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entropic_tradeoff import (
    DensityMatrix,
    Distribution,
    Povm,
    SharpObservable,
    ValidationError,
    born_rule,
    random_density_matrix,
    random_povm,
    random_pure_state,
    random_sharp_observable,
    random_unitary,
    sharp_to_povm,
)
from entropic_tradeoff.core import DimensionMismatchError, as_hermitian, psd_sqrt

from conftest import KET0, PLUS


def test_born_rule_examples(zproj):
    np.testing.assert_allclose(born_rule(DensityMatrix.maximally_mixed(2), zproj).probabilities, [0.5, 0.5])
    np.testing.assert_allclose(born_rule(DensityMatrix.from_vector(KET0), zproj).probabilities, [1, 0])
    np.testing.assert_allclose(born_rule(DensityMatrix.from_vector(PLUS), zproj).probabilities, [0.5, 0.5], atol=1e-15)


def test_born_rule_dimension_mismatch(zproj):
    with pytest.raises(DimensionMismatchError):
        born_rule(DensityMatrix.maximally_mixed(3), zproj)


def test_sharp_to_povm_z_and_x(Z, X):
    pz = sharp_to_povm(Z)
    assert pz.outcomes == (1, -1)
    np.testing.assert_allclose(pz.effects, [np.diag([1, 0]), np.diag([0, 1])])
    px = sharp_to_povm(X)
    np.testing.assert_allclose(px.effects[0], np.full((2, 2), 0.5))
    np.testing.assert_allclose(px.effects[1], [[0.5, -0.5], [-0.5, 0.5]])


def test_sharp_to_povm_diagonal_qutrit():
    obs = SharpObservable.from_matrix(np.diag([0.3, -1.0, 2.0]))
    povm = sharp_to_povm(obs)
    assert povm.outcomes == (2.0, 0.3, -1.0)
    for e in povm.effects:
        assert np.count_nonzero(np.abs(e) > 1e-12) == 1
        assert np.isclose(np.trace(e), 1)


def test_degenerate_observable_rejected():
    with pytest.raises(ValidationError, match="degenerate"):
        SharpObservable.from_matrix(np.diag([1.0, 1.0, 2.0]))
    with pytest.raises(ValidationError):
        SharpObservable((1, 1), np.stack([np.diag([1, 0]), np.diag([0, 1])]))


@pytest.mark.parametrize("seed", range(5))
def test_eigendecomposition_round_trip(seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    h = g + g.conj().T
    obs = SharpObservable.from_matrix(h)
    np.testing.assert_allclose(obs.matrix, h, atol=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_sharp_effects_idempotent(seed):
    for e in sharp_to_povm(random_sharp_observable(4, seed)).effects:
        assert np.max(np.abs(e @ e - e)) <= 1e-9


def test_random_pure_state_deterministic_and_pure():
    a, b = random_pure_state(2, 17), random_pure_state(2, 17)
    np.testing.assert_array_equal(a.matrix, b.matrix)
    for seed in range(20):
        rho = random_pure_state(3, seed)
        assert abs(np.trace(rho.matrix).real - 1) <= 1e-10
        assert abs(rho.purity() - 1) <= 1e-10


def test_random_pure_state_haar_mean():
    # Monte-Carlo: the Haar average of |psi><psi| is 1/d
    rng = np.random.default_rng(2024)
    mean = sum(random_pure_state(2, rng).matrix for _ in range(10_000)) / 10_000
    assert np.max(np.abs(mean - np.eye(2) / 2)) < 0.02


def test_random_povm_examples():
    single = random_povm(3, 1, seed=4)
    np.testing.assert_allclose(single.effects[0], np.eye(3), atol=1e-12)
    a, b = random_povm(2, 5, seed=9), random_povm(2, 5, seed=9)
    np.testing.assert_array_equal(a.effects, b.effects)
    assert len(a) == 5


def test_povm_rejects_incomplete():
    with pytest.raises(ValidationError) as info:
        Povm((0, 1), 0.9 * np.stack([np.diag([1, 0]), np.diag([0, 1])]))
    assert info.value.check == "completeness"
    assert info.value.residual == pytest.approx(0.1)


def test_povm_rejects_negative_effect():
    with pytest.raises(ValidationError) as info:
        Povm((0, 1), np.stack([np.diag([1.5, 0]), np.diag([-0.5, 1])]))
    assert info.value.check == "psd"


def test_density_matrix_validation():
    with pytest.raises(ValidationError, match="trace"):
        DensityMatrix(np.eye(2))
    with pytest.raises(ValidationError, match="Hermitian"):
        DensityMatrix(np.array([[0.5, 0.1], [0.3, 0.5]]))
    with pytest.raises(ValidationError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError, match="non-finite"):
        as_hermitian(np.array([[np.nan, 0], [0, 1]]))


def test_values_are_immutable():
    rho = random_pure_state(2, 0)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 2


def test_distribution_clamps_tiny_negatives():
    d = Distribution(("a", "b"), [-5e-13, 1 + 5e-13])
    np.testing.assert_array_equal(d.probabilities, [0.0, 1.0])
    with pytest.raises(ValidationError):
        Distribution(("a", "b"), [-1e-9, 1 + 1e-9])
    with pytest.raises(ValidationError):
        Distribution(("a", "b"), [0.5, 0.6])


def test_random_unitary_is_unitary():
    u = random_unitary(4, 1)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-12)


def test_psd_sqrt_clamps_rounding():
    m = np.diag([1.0, -5e-11])
    np.testing.assert_allclose(psd_sqrt(m), np.diag([1.0, 0.0]))
    with pytest.raises(ValidationError):
        psd_sqrt(np.diag([1.0, -1e-3]))


@settings(max_examples=60, deadline=None)
@given(dim=st.integers(2, 4), n=st.integers(1, 6), s1=st.integers(0, 2**31), s2=st.integers(0, 2**31))
def test_born_rule_normalized(dim, n, s1, s2):
    p = born_rule(random_density_matrix(dim, s1), random_povm(dim, n, s2))
    assert abs(p.probabilities.sum() - 1) <= 1e-10
