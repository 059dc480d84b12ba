"""Minimax search for the relative-entropy tradeoff of Z and X.

The optimizer starts from the sequential Lüders bi-observable and should land
near the unsharp candidate with marginals (1 ± Z/sqrt2)/2 and (1 ± X/sqrt2)/2.
A reduced budget keeps the run short; the full default takes about a minute.
"""

import numpy as np

from entropic_tradeoff import (
    Flavor,
    MinimaxConfig,
    PairFunctional,
    explicit_qubit_biobservable,
    marginals,
    max_over_states,
    min_over_biobservables,
    pauli_observable,
)

Z, X = pauli_observable("Z"), pauli_observable("X")

_, explicit = max_over_states(PairFunctional(Z, X, explicit_qubit_biobservable(Z, X)), 2)
print(f"explicit candidate, worst case over states: {explicit:.5f} bit")

config = MinimaxConfig(n_povm_restarts=1, max_iterations=400, seed=1)
result = min_over_biobservables(Z, X, Flavor.RELATIVE_ENTROPY, config)
print(f"optimizer value: {result.value:.5f} bit after {result.iterations} iterations (converged={result.converged})")
for it, v in result.trace[:: max(1, len(result.trace) // 8)]:
    print(f"  iteration {it:5d}: {v:.5f}")

m1, m2 = marginals(result.argmin_biobservable)
print("M1(+1) =\n", m1.effects[0].round(3))
print("M2(+1) =\n", m2.effects[0].round(3))
r = result.argmax_state.matrix
print("worst-case Bloch vector:", np.round([2 * r[0, 1].real, -2 * r[0, 1].imag, (r[0, 0] - r[1, 1]).real], 3))
