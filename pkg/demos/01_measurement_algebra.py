"""Instruments, their adjoints, and the bi-observable of a sequential measurement.

Measure Z with a Lüders instrument, then X. The joint statistics are the
bi-observable M(x, y) = I_x*[B(y)], and its second marginal reproduces the
distribution of X measured after the disturbance.
"""

import numpy as np

from entropic_tradeoff import (
    DensityMatrix,
    apply_instrument,
    born_rule,
    luders_instrument,
    marginals,
    pauli_observable,
    sequential_biobservable,
    sequential_output_distribution,
    sharp_to_povm,
)

Z, X = pauli_observable("Z"), pauli_observable("X")
inst = luders_instrument(sharp_to_povm(Z))
rho = DensityMatrix.from_vector(np.array([np.cos(0.3), np.exp(0.7j) * np.sin(0.3)]))

out = apply_instrument(inst, rho)
print("Z outcome probabilities:", out.distribution.probabilities.round(6))
print("post-measurement state (coherences removed):\n", out.total.matrix.round(6))

m = sequential_biobservable(inst, sharp_to_povm(X))
m1, m2 = marginals(m)
direct = sequential_output_distribution(inst, sharp_to_povm(X), rho)
pulled = born_rule(rho, m2)
print("X after Z, Schrödinger picture:", direct.probabilities.round(12))
print("X after Z, via M2           :", pulled.probabilities.round(12))
print("M1 equals the Z projectors:", np.allclose(m1.effects, sharp_to_povm(Z).effects))
print("M2 is trivial (1/2 each):", np.allclose(m2.effects, np.eye(2) / 2))
