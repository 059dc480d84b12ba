"""Entropic error-disturbance tradeoff for quantum measurements."""

from ._settings import get_log_base, get_tolerance, override, set_log_base, set_tolerance
from .core import (
    DensityMatrix,
    DimensionMismatchError,
    Distribution,
    Povm,
    SharpObservable,
    ValidationError,
    born_rule,
    pauli_observable,
    random_density_matrix,
    random_povm,
    random_pure_state,
    random_sharp_observable,
    random_unitary,
    sharp_to_povm,
)
from .entropy import (
    JointDistribution,
    TradeoffBounds,
    conditional_entropy,
    master_joint,
    mutual_information,
    overlap_and_bounds,
    relative_entropy,
    shannon,
)
from .measurement import (
    BiObservable,
    Instrument,
    adjoint_apply,
    apply_instrument,
    biobservable_from_grid,
    commuting_biobservable,
    luders_instrument,
    marginals,
    sequential_biobservable,
    sequential_output_distribution,
)
from .tradeoff import (
    Flavor,
    MinimaxConfig,
    MinimaxResult,
    PairFunctional,
    TradeoffValue,
    calibration_tradeoff,
    conditional_pair,
    divergence_pair,
    explicit_qubit_biobservable,
    max_over_states,
    min_over_biobservables,
)

__version__ = "0.1.0"
