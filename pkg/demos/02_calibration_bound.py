"""Calibration error and disturbance against the overlap bound.

For each bi-observable the conditional-entropy error N and disturbance D are
computed on uniform eigenstate ensembles and compared with -log2 c.
"""

from entropic_tradeoff import (
    biobservable_from_grid,
    calibration_tradeoff,
    commuting_biobservable,
    explicit_qubit_biobservable,
    luders_instrument,
    overlap_and_bounds,
    pauli_observable,
    random_povm,
    sequential_biobservable,
    sharp_to_povm,
)

Z, X = pauli_observable("Z"), pauli_observable("X")
bounds = overlap_and_bounds(Z, X)
print(f"c = {bounds.c:.3f}, bound -log2 c = {bounds.mu_bound:.3f} bit\n")

candidates = {
    "measure Z, then X": sequential_biobservable(luders_instrument(sharp_to_povm(Z)), sharp_to_povm(X)),
    "measure X first, then Z": sequential_biobservable(
        luders_instrument(sharp_to_povm(X)), sharp_to_povm(Z)
    ),
    "unsharp joint measurement": explicit_qubit_biobservable(Z, X),
    "trivial product (Z, Z)": commuting_biobservable(sharp_to_povm(Z), sharp_to_povm(Z)),
}
for seed in range(3):
    candidates[f"random POVM #{seed}"] = biobservable_from_grid(Z.eigenvalues, X.eigenvalues, random_povm(2, 4, seed))

print(f"{'bi-observable':38s} {'N':>7s} {'D':>7s} {'N+D':>7s}")
for name, m in candidates.items():
    tv = calibration_tradeoff(Z, X, m)
    print(f"{name:38s} {tv.error_term:7.4f} {tv.disturbance_term:7.4f} {tv.total:7.4f}")
