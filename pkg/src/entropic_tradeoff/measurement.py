"""Instruments in Kraus form, their adjoints, and bi-observables.

An instrument assigns to every outcome ``x`` a completely positive map
``I_x[rho] = sum_k K rho K^dagger``. Its Heisenberg-picture adjoint
``I_x*[G] = sum_k K^dagger G K`` pulls effects back through the measurement,
which is how a sequential measurement becomes a single joint POVM.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, NamedTuple, Sequence

import numpy as np

from ._settings import derived_tolerance, get_tolerance
from .core import (
    DensityMatrix,
    DimensionMismatchError,
    Distribution,
    Povm,
    ValidationError,
    _check_dim,
    _check_effects,
    _frozen,
    as_complex_matrix,
    as_hermitian,
    born_rule,
    psd_sqrt,
)

__all__ = [
    "Instrument",
    "InstrumentOutput",
    "BiObservable",
    "luders_instrument",
    "apply_outcome_map",
    "apply_instrument",
    "adjoint_apply",
    "sequential_biobservable",
    "sequential_output_distribution",
    "marginals",
    "commuting_biobservable",
]


@dataclass(frozen=True, eq=False)
class Instrument:
    """Outcome-indexed Kraus families whose total map is trace preserving.

    ``kraus[i]`` is an array of shape ``(k_i, d, d)`` holding the Kraus
    operators for ``outcomes[i]``.
    """

    outcomes: tuple
    kraus: tuple

    def __post_init__(self):
        outcomes = tuple(self.outcomes)
        if len(outcomes) != len(self.kraus) or not outcomes:
            raise ValidationError("need one nonempty Kraus family per outcome", check="shape")
        if len(set(outcomes)) != len(outcomes):
            raise ValidationError("outcome labels must be distinct", check="labels")
        families = []
        for label, ks in zip(outcomes, self.kraus):
            ks = np.asarray(ks, dtype=complex)
            if ks.ndim == 2:
                ks = ks[None]
            if ks.ndim != 3 or ks.shape[0] < 1:
                raise ValidationError(f"Kraus family for {label!r} must be (k, d, d)", check="shape")
            families.append(_frozen(np.stack([as_complex_matrix(k, "Kraus operator") for k in ks])))
        d = families[0].shape[-1]
        for f in families:
            _check_dim(d, f.shape[-1], "Kraus operators")
        total = sum(np.einsum("kji,kjl->il", f.conj(), f) for f in families)
        res = float(np.max(np.abs(total - np.eye(d))))
        if res > get_tolerance():
            raise ValidationError(
                f"instrument is not trace preserving (residual {res:.3g})", check="trace-preserving", residual=res
            )
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "kraus", tuple(families))

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[-1]

    def index(self, outcome: Hashable) -> int:
        try:
            return self.outcomes.index(outcome)
        except ValueError:
            raise ValidationError(f"unknown outcome {outcome!r}", check="outcome") from None

    def induced_povm(self) -> Povm:
        """The effects ``I_x*[1] = sum_k K^dagger K``."""
        return Povm(self.outcomes, np.stack([np.einsum("kji,kjl->il", f.conj(), f) for f in self.kraus]))

    @classmethod
    def identity(cls, dim: int) -> Instrument:
        """Single-outcome instrument that leaves every state untouched."""
        return cls((0,), (np.eye(dim, dtype=complex)[None],))


class InstrumentOutput(NamedTuple):
    states: np.ndarray  # unnormalized I_x[rho], shape (n, d, d)
    total: DensityMatrix
    distribution: Distribution


@dataclass(frozen=True, eq=False)
class BiObservable:
    """Joint POVM ``M(x, y)`` on a product outcome grid; ``effects`` has shape ``(nx, ny, d, d)``."""

    x_outcomes: tuple
    y_outcomes: tuple
    effects: np.ndarray

    def __post_init__(self):
        xs, ys = tuple(self.x_outcomes), tuple(self.y_outcomes)
        e = np.asarray(self.effects, dtype=complex)
        if e.ndim != 4 or e.shape[:2] != (len(xs), len(ys)) or e.shape[2] != e.shape[3]:
            raise ValidationError(f"effects shape {e.shape} does not match a {len(xs)}x{len(ys)} grid", check="shape")
        if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            raise ValidationError("outcome labels must be distinct", check="labels")
        flat = np.stack([as_hermitian(m, "bi-observable effect") for m in e.reshape(-1, *e.shape[2:])])
        _check_effects(flat)
        object.__setattr__(self, "x_outcomes", xs)
        object.__setattr__(self, "y_outcomes", ys)
        object.__setattr__(self, "effects", _frozen(flat.reshape(e.shape)))

    @property
    def dim(self) -> int:
        return self.effects.shape[-1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.effects.shape[:2]

    def marginals(self) -> tuple[Povm, Povm]:
        return marginals(self)

    def as_povm(self) -> Povm:
        """Flatten to an ordinary POVM with ``(x, y)`` tuple labels."""
        labels = [(x, y) for x in self.x_outcomes for y in self.y_outcomes]
        return Povm(labels, self.effects.reshape(-1, self.dim, self.dim))


def luders_instrument(povm: Povm) -> Instrument:
    """Lüders instrument: a single Kraus operator ``sqrt(A(x))`` per outcome."""
    return Instrument(povm.outcomes, tuple(psd_sqrt(e)[None] for e in povm.effects))


def apply_outcome_map(inst: Instrument, outcome: Hashable, f) -> np.ndarray:
    """``I_x[F] = sum_k K F K^dagger`` for an arbitrary square matrix ``F``."""
    f = as_complex_matrix(f)
    _check_dim(inst.dim, f.shape[0], "apply_outcome_map")
    ks = inst.kraus[inst.index(outcome)]
    return np.einsum("kij,jl,kml->im", ks, f, ks.conj())


def apply_instrument(inst: Instrument, rho: DensityMatrix) -> InstrumentOutput:
    _check_dim(inst.dim, rho.dim, "apply_instrument")
    states = np.stack([np.einsum("kij,jl,kml->im", ks, rho.matrix, ks.conj()) for ks in inst.kraus])
    probs = np.trace(states, axis1=1, axis2=2).real
    return InstrumentOutput(states, DensityMatrix(states.sum(axis=0)), Distribution(inst.outcomes, probs))


def adjoint_apply(inst: Instrument, outcome: Hashable, g) -> np.ndarray:
    """Heisenberg-picture map ``I_x*[G] = sum_k K^dagger G K``.

    Satisfies ``Tr(I_x[F] G) = Tr(F I_x*[G])`` for all square ``F`` and ``G``.
    """
    g = as_complex_matrix(g)
    _check_dim(inst.dim, g.shape[0], "adjoint_apply")
    ks = inst.kraus[inst.index(outcome)]
    return np.einsum("kji,jl,klm->im", ks.conj(), g, ks)


def sequential_biobservable(first: Instrument, second: Povm) -> BiObservable:
    """Equal-input bi-observable ``M(x, y) = I_x*[B(y)]`` of measuring ``first`` then ``second``."""
    _check_dim(first.dim, second.dim, "sequential_biobservable")
    effects = np.stack([[adjoint_apply(first, x, b) for b in second.effects] for x in first.outcomes])
    return BiObservable(first.outcomes, second.outcomes, effects)


def sequential_output_distribution(first: Instrument, second: Povm, rho: DensityMatrix) -> Distribution:
    """Distribution of the second measurement, ``Tr(I[rho] B(y))``."""
    _check_dim(first.dim, second.dim, "sequential_output_distribution")
    return born_rule(apply_instrument(first, rho).total, second)


def marginals(m: BiObservable) -> tuple[Povm, Povm]:
    """``M1(x) = sum_y M(x, y)`` and ``M2(y) = sum_x M(x, y)``."""
    return Povm(m.x_outcomes, m.effects.sum(axis=1)), Povm(m.y_outcomes, m.effects.sum(axis=0))


def commuting_biobservable(a: Povm, b: Povm) -> BiObservable:
    """Product bi-observable ``M(x, y) = A(x) B(y)`` for pairwise commuting effects."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {b.dim}", check="dimension")
    prod = np.einsum("xij,yjk->xyik", a.effects, b.effects)
    rev = np.einsum("yij,xjk->xyik", b.effects, a.effects)
    res = float(np.max(np.abs(prod - rev)))
    if res > derived_tolerance():
        raise ValidationError(f"effects do not commute (residual {res:.3g})", check="commuting", residual=res)
    return BiObservable(a.outcomes, b.outcomes, 0.5 * (prod + rev))


def biobservable_from_grid(x_outcomes: Sequence[Hashable], y_outcomes: Sequence[Hashable], povm: Povm) -> BiObservable:
    """Reshape an ordinary POVM with ``nx * ny`` effects (row-major) into a bi-observable."""
    nx, ny = len(x_outcomes), len(y_outcomes)
    if len(povm) != nx * ny:
        raise ValidationError(f"POVM has {len(povm)} effects, grid needs {nx * ny}", check="shape")
    return BiObservable(x_outcomes, y_outcomes, povm.effects.reshape(nx, ny, povm.dim, povm.dim))
