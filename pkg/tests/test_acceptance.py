"""Exit criteria, one test each. Run with ``pytest tests/test_acceptance.py``."""

import math
import time

import numpy as np
import pytest

from entropic_tradeoff import (
    DensityMatrix,
    Distribution,
    Flavor,
    MinimaxConfig,
    PairFunctional,
    SharpObservable,
    born_rule,
    calibration_tradeoff,
    divergence_pair,
    explicit_qubit_biobservable,
    luders_instrument,
    marginals,
    master_joint,
    max_over_states,
    min_over_biobservables,
    mutual_information,
    overlap_and_bounds,
    pauli_observable,
    random_density_matrix,
    random_povm,
    random_sharp_observable,
    sequential_biobservable,
    sequential_output_distribution,
    sharp_to_povm,
)
from entropic_tradeoff.core import PAULI
from entropic_tradeoff.measurement import adjoint_apply, apply_outcome_map, biobservable_from_grid

from test_measurement import random_instrument, random_matrix

Z, X, Y = (pauli_observable(n) for n in "ZXY")
SQ2 = math.sqrt(2)


def bloch_grid_oracle(a_ops, m1, b_ops, m2, n=1000):
    """Max over a theta x phi Bloch grid of the divergence total, from Pauli expansions.

    ``a_ops``/``b_ops`` are the target projectors, ``m1``/``m2`` the marginal
    effects, all 2x2. Written without the library's probability or entropy code.
    """
    theta = np.linspace(0.0, math.pi, n)
    phi = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    t, p = np.meshgrid(theta, phi, indexing="ij")
    r = np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1).reshape(-1, 3)

    def probs(ops):
        # Tr(rho E) = (Tr E + r . Tr(E sigma)) / 2
        coeffs = np.array([[np.trace(e @ PAULI[s]).real for s in "XYZ"] for e in ops])
        traces = np.array([np.trace(e).real for e in ops])
        return np.clip((traces[None, :] + r @ coeffs.T) / 2, 0.0, None)

    def kl_bits(pp, qq):
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(pp > 1e-15, pp * np.log2(pp / qq), 0.0)
        return terms.sum(axis=1)

    total = kl_bits(probs(a_ops), probs(m1)) + kl_bits(probs(b_ops), probs(m2))
    return float(np.max(total))


def test_duality_suite(criterion):
    start = time.perf_counter()
    worst = 0.0
    for seed in range(100):
        dim = 2 if seed < 50 else 3
        inst = random_instrument(dim, 3, seed)
        f, g = random_matrix(dim, 10_000 + seed), random_matrix(dim, 20_000 + seed)
        for x in inst.outcomes:
            lhs = np.trace(apply_outcome_map(inst, x, f) @ g)
            rhs = np.trace(f @ adjoint_apply(inst, x, g))
            worst = max(worst, abs(lhs - rhs))
    elapsed = time.perf_counter() - start
    criterion(f"max residual {worst:.2e} (tol 1e-10), {elapsed:.2f}s (limit 5s)")
    assert worst <= 1e-10
    assert elapsed < 5


def test_sequential_equal_input_equivalence(criterion):
    start = time.perf_counter()
    worst = 0.0
    for seed in range(100):
        dim = 2 if seed % 2 == 0 else 3
        inst = random_instrument(dim, 3, seed)
        povm = random_povm(dim, 4, 5000 + seed)
        rho = random_density_matrix(dim, 9000 + seed)
        p_tilde = sequential_output_distribution(inst, povm, rho).probabilities
        pulled = born_rule(rho, marginals(sequential_biobservable(inst, povm))[1]).probabilities
        worst = max(worst, float(np.max(np.abs(p_tilde - pulled))))
    elapsed = time.perf_counter() - start
    criterion(f"max residual {worst:.2e} (tol 1e-10), {elapsed:.2f}s (limit 5s)")
    assert worst <= 1e-10
    assert elapsed < 5


def test_saturation_case(criterion):
    start = time.perf_counter()
    m = sequential_biobservable(luders_instrument(sharp_to_povm(Z)), sharp_to_povm(X))
    tv = calibration_tradeoff(Z, X, m)
    bounds = overlap_and_bounds(Z, X)
    elapsed = time.perf_counter() - start
    criterion(f"N={tv.error_term:.3e}, D={tv.disturbance_term:.15f}, -log2 c={bounds.mu_bound:.15f}, {elapsed:.3f}s")
    assert abs(tv.error_term) <= 1e-12
    assert abs(tv.disturbance_term - 1.0) <= 1e-12
    assert abs(bounds.c - 0.5) <= 1e-12
    assert abs(tv.total - bounds.mu_bound) <= 1e-12
    assert elapsed < 1


def test_bound_fuzz(criterion):
    start = time.perf_counter()
    bounds = overlap_and_bounds(Z, X)
    mu_violations = excl_violations = 0
    min_total, max_info = math.inf, -math.inf
    for seed in range(1000):
        m = biobservable_from_grid(Z.eigenvalues, X.eigenvalues, random_povm(2, 4, seed))
        total = calibration_tradeoff(Z, X, m).total
        m1, m2 = marginals(m)
        info = mutual_information(master_joint(Distribution.uniform(Z.eigenvalues), Z, m1)) + mutual_information(
            master_joint(Distribution.uniform(X.eigenvalues), X, m2)
        )
        min_total, max_info = min(min_total, total), max(max_info, info)
        mu_violations += total < 1.0 - 1e-9
        excl_violations += info > bounds.exclusion_bound + 1e-9
    elapsed = time.perf_counter() - start
    criterion(
        f"min N+D {min_total:.6f} (>= 1 - 1e-9), max I+I {max_info:.6f} (<= {bounds.exclusion_bound:.6f} + 1e-9), "
        f"violations {mu_violations}+{excl_violations}, {elapsed:.1f}s (limit 60s)"
    )
    assert mu_violations == 0 and excl_violations == 0
    assert elapsed < 60


@pytest.mark.parametrize("targets", ["XY", "ZX"])
def test_explicit_qubit_biobservable(criterion, targets):
    start = time.perf_counter()
    a, b = pauli_observable(targets[0]), pauli_observable(targets[1])
    m = explicit_qubit_biobservable() if targets == "XY" else explicit_qubit_biobservable(a, b)
    m1, m2 = marginals(m)
    sa, sb = PAULI[targets[0]], PAULI[targets[1]]
    marg_err = max(
        float(np.max(np.abs(m1.effects[k] - (np.eye(2) + s * sa / SQ2) / 2)))
        + float(np.max(np.abs(m2.effects[k] - (np.eye(2) + s * sb / SQ2) / 2)))
        for k, s in enumerate((1, -1))
    )
    _, value = max_over_states(PairFunctional(a, b, m, Flavor.RELATIVE_ENTROPY), 2)
    oracle = bloch_grid_oracle(a.projectors, m1.effects, b.projectors, m2.effects)
    elapsed = time.perf_counter() - start
    criterion(f"marginal err {marg_err:.1e}, max-over-states {value:.6f} vs 1e6-grid {oracle:.6f}, {elapsed:.1f}s")
    assert marg_err <= 1e-12
    assert abs(value - oracle) <= 1e-3
    assert elapsed < 120


@pytest.mark.slow
def test_minimax_sanity_zx(criterion):
    start = time.perf_counter()
    config = MinimaxConfig(seed=2026)
    first = min_over_biobservables(Z, X, Flavor.RELATIVE_ENTROPY, config)
    second = min_over_biobservables(Z, X, Flavor.RELATIVE_ENTROPY, config)
    explicit = max_over_states(PairFunctional(Z, X, explicit_qubit_biobservable(Z, X)), 2)[1]
    m1, m2 = marginals(first.argmin_biobservable)
    oracle = bloch_grid_oracle(Z.projectors, m1.effects, X.projectors, m2.effects)
    values = [v for _, v in first.trace]
    monotone = all(b <= a for a, b in zip(values, values[1:]))
    identical = (
        first.value == second.value
        and first.trace == second.trace
        and np.array_equal(first.argmin_biobservable.effects, second.argmin_biobservable.effects)
    )
    elapsed = time.perf_counter() - start
    criterion(
        f"optimizer {first.value:.6f} vs explicit {explicit:.6f} (tol 5e-2), grid at argmin {oracle:.6f}, "
        f"monotone={monotone}, reproducible={identical}, {elapsed:.0f}s (limit 600s)"
    )
    assert abs(first.value - explicit) <= 5e-2
    assert first.value >= oracle - 1e-3
    assert monotone
    assert identical
    assert elapsed < 600


@pytest.mark.slow
def test_commuting_degeneracy(criterion):
    start = time.perf_counter()
    cases = [
        (Z, SharpObservable.from_basis(np.eye(2)[:, ::-1], ("up", "down"))),
        (SharpObservable.from_matrix(np.diag([1.0, 0.0, -1.0])), SharpObservable.from_basis(np.eye(3)[:, [2, 0, 1]], (5, 6, 7))),
    ]
    values = []
    for a, b in cases:
        config = MinimaxConfig(n_povm_restarts=1, max_iterations=200 if a.dim == 2 else 30, seed=11)
        values.append(min_over_biobservables(a, b, Flavor.RELATIVE_ENTROPY, config).value)
    elapsed = time.perf_counter() - start
    criterion(f"minimax values d=2: {values[0]:.2e}, d=3: {values[1]:.2e} (<= 1e-6), {elapsed:.0f}s (limit 300s)")
    assert max(values) <= 1e-6
    assert elapsed < 300


def test_convexity_in_state(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = -math.inf
    pairs = [(Z, X), (random_sharp_observable(3, 1), random_sharp_observable(3, 2))]
    for trial in range(200):
        a, b = pairs[trial % 2]
        m = biobservable_from_grid(a.eigenvalues, b.eigenvalues, random_povm(a.dim, a.dim * b.dim, 300 + trial))
        r1, r2 = random_density_matrix(a.dim, 2 * trial), random_density_matrix(a.dim, 2 * trial + 1)
        lam = float(rng.random())
        mix = DensityMatrix(lam * r1.matrix + (1 - lam) * r2.matrix)
        lhs = divergence_pair(mix, a, b, m).total
        rhs = lam * divergence_pair(r1, a, b, m).total + (1 - lam) * divergence_pair(r2, a, b, m).total
        worst = max(worst, lhs - rhs)
    elapsed = time.perf_counter() - start
    criterion(f"max (mix - chord) {worst:.2e} (<= 1e-9), {elapsed:.2f}s (limit 10s)")
    assert worst <= 1e-9
    assert elapsed < 10
