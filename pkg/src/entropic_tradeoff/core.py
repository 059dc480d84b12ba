"""Dense matrix foundation: states, sharp observables, POVMs and distributions.

Matrices are plain ``numpy`` arrays of ``complex128``. The value types below
validate on construction and store read-only copies, so instances can be
shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from ._settings import CLAMP_BAND, derived_tolerance, get_tolerance

__all__ = [
    "ValidationError",
    "DimensionMismatchError",
    "as_complex_matrix",
    "as_hermitian",
    "psd_sqrt",
    "psd_inv_sqrt",
    "DensityMatrix",
    "SharpObservable",
    "Povm",
    "Distribution",
    "born_rule",
    "sharp_to_povm",
    "pauli_observable",
    "random_pure_state",
    "random_density_matrix",
    "random_povm",
    "random_unitary",
    "random_sharp_observable",
]

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class ValidationError(ValueError):
    """An invariant check failed.

    ``check`` names the violated invariant and ``residual`` holds the measured
    violation, when one applies.
    """

    def __init__(self, message: str, *, check: str | None = None, residual: float | None = None):
        super().__init__(message)
        self.check = check
        self.residual = residual


class DimensionMismatchError(ValidationError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def as_complex_matrix(data, name: str = "matrix") -> np.ndarray:
    """Return ``data`` as a square, finite ``complex128`` array (no copy guarantees)."""
    m = np.asarray(data, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {m.shape}", check="square")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries", check="finite")
    return m


def hermiticity_residual(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def as_hermitian(data, name: str = "matrix") -> np.ndarray:
    """Validate hermiticity to the construction tolerance and return the symmetrized matrix."""
    m = as_complex_matrix(data, name)
    res = hermiticity_residual(m)
    if res > get_tolerance():
        raise ValidationError(f"{name} is not Hermitian (residual {res:.3g})", check="hermitian", residual=res)
    return 0.5 * (m + m.conj().T)


def _check_dim(expected: int, got: int, what: str) -> None:
    if expected != got:
        raise DimensionMismatchError(f"dimension mismatch in {what}: {expected} vs {got}", check="dimension")


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """PSD square root via eigendecomposition.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero; anything more negative
    raises :class:`ValidationError`.
    """
    w, v = np.linalg.eigh(as_hermitian(m))
    if w[0] < -get_tolerance():
        raise ValidationError(f"matrix is not PSD (min eigenvalue {w[0]:.3g})", check="psd", residual=-float(w[0]))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def psd_inv_sqrt(m: np.ndarray, rcond: float = 1e-12) -> np.ndarray:
    w, v = np.linalg.eigh(as_hermitian(m))
    if w[0] <= rcond * max(w[-1], 0.0) or w[0] <= 0:
        raise np.linalg.LinAlgError("matrix is singular or not positive definite")
    return (v / np.sqrt(w)) @ v.conj().T


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A quantum state: Hermitian, PSD, unit trace."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_hermitian(self.matrix, "density matrix")
        tol = get_tolerance()
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > tol:
            raise ValidationError(f"trace is {tr!r}, expected 1", check="trace", residual=abs(tr - 1.0))
        wmin = float(np.linalg.eigvalsh(m)[0])
        if wmin < -tol:
            raise ValidationError(f"density matrix has eigenvalue {wmin:.3g}", check="psd", residual=-wmin)
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_vector(cls, psi) -> DensityMatrix:
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityMatrix:
        return cls(np.eye(dim, dtype=complex) / dim)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclass(frozen=True, eq=False)
class Distribution:
    """Finite probability distribution over labelled outcomes.

    Entries within ``CLAMP_BAND`` of [0, 1] are clamped into it; the total must
    be 1 to the construction tolerance.
    """

    outcomes: tuple
    probabilities: np.ndarray

    def __post_init__(self):
        outcomes = tuple(self.outcomes)
        p = np.asarray(self.probabilities, dtype=float).ravel()
        if len(outcomes) != p.size:
            raise ValidationError(f"{len(outcomes)} outcomes but {p.size} probabilities", check="shape")
        if len(set(outcomes)) != len(outcomes):
            raise ValidationError("outcome labels must be distinct", check="labels")
        if not np.all(np.isfinite(p)):
            raise ValidationError("non-finite probability", check="finite")
        lo, hi = float(p.min()), float(p.max())
        if lo < -CLAMP_BAND or hi > 1.0 + CLAMP_BAND:
            bad = max(-lo, hi - 1.0)
            raise ValidationError(f"probability outside [0, 1] by {bad:.3g}", check="range", residual=bad)
        p = np.clip(p, 0.0, 1.0)
        total = float(p.sum())
        if abs(total - 1.0) > get_tolerance():
            raise ValidationError(f"probabilities sum to {total!r}", check="normalization", residual=abs(total - 1.0))
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "probabilities", _frozen(p))

    def __len__(self) -> int:
        return len(self.outcomes)

    def __getitem__(self, outcome: Hashable) -> float:
        return float(self.probabilities[self.outcomes.index(outcome)])

    @classmethod
    def uniform(cls, outcomes: Sequence[Hashable]) -> Distribution:
        n = len(outcomes)
        return cls(tuple(outcomes), np.full(n, 1.0 / n))


@dataclass(frozen=True, eq=False)
class Povm:
    """Positive operator-valued measure with labelled effects, shape ``(n, d, d)``."""

    outcomes: tuple
    effects: np.ndarray

    def __post_init__(self):
        outcomes = tuple(self.outcomes)
        e = np.asarray(self.effects, dtype=complex)
        if e.ndim != 3 or e.shape[1] != e.shape[2] or e.shape[0] < 1:
            raise ValidationError(f"effects must have shape (n, d, d), got {e.shape}", check="shape")
        if len(outcomes) != e.shape[0]:
            raise ValidationError(f"{len(outcomes)} outcomes for {e.shape[0]} effects", check="shape")
        if len(set(outcomes)) != len(outcomes):
            raise ValidationError("outcome labels must be distinct", check="labels")
        effects = np.stack([as_hermitian(x, f"effect {k!r}") for k, x in zip(outcomes, e)])
        _check_effects(effects.reshape(-1, *effects.shape[-2:]))
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "effects", _frozen(effects))

    @property
    def dim(self) -> int:
        return self.effects.shape[-1]

    def __len__(self) -> int:
        return len(self.outcomes)

    def effect(self, outcome: Hashable) -> np.ndarray:
        return self.effects[self.outcomes.index(outcome)]


def _check_effects(effects: np.ndarray) -> None:
    """PSD and completeness checks shared by POVMs and bi-observables."""
    tol = get_tolerance()
    wmin = float(np.linalg.eigvalsh(effects)[:, 0].min())
    if wmin < -tol:
        raise ValidationError(f"effect has eigenvalue {wmin:.3g}", check="psd", residual=-wmin)
    d = effects.shape[-1]
    res = float(np.max(np.abs(effects.sum(axis=0) - np.eye(d))))
    if res > tol:
        raise ValidationError(
            f"effects do not sum to identity (residual {res:.3g})", check="completeness", residual=res
        )


@dataclass(frozen=True, eq=False)
class SharpObservable:
    """Nondegenerate observable given by distinct eigenvalues and rank-1 eigenprojectors."""

    eigenvalues: tuple
    projectors: np.ndarray

    def __post_init__(self):
        vals = tuple(self.eigenvalues)
        p = np.asarray(self.projectors, dtype=complex)
        if p.ndim != 3 or p.shape[1] != p.shape[2] or p.shape[0] != p.shape[1]:
            raise ValidationError(f"need d projectors of shape (d, d), got {p.shape}", check="shape")
        if len(vals) != p.shape[0]:
            raise ValidationError(f"{len(vals)} eigenvalues for {p.shape[0]} projectors", check="shape")
        if len(set(vals)) != len(vals):
            raise ValidationError("eigenvalues must be distinct (degenerate observable)", check="nondegenerate")
        p = np.stack([as_hermitian(x, "projector") for x in p])
        tol, dtol = get_tolerance(), derived_tolerance()
        for i, pi in enumerate(p):
            rank_res = abs(float(np.trace(pi).real) - 1.0)
            idem_res = float(np.max(np.abs(pi @ pi - pi)))
            if rank_res > tol or idem_res > dtol:
                raise ValidationError(
                    f"projector {i} is not a rank-1 projector", check="rank-one", residual=max(rank_res, idem_res)
                )
            for j in range(i):
                res = float(np.max(np.abs(pi @ p[j])))
                if res > tol:
                    raise ValidationError(f"projectors {j} and {i} are not orthogonal", check="orthogonal", residual=res)
        res = float(np.max(np.abs(p.sum(axis=0) - np.eye(p.shape[0]))))
        if res > tol:
            raise ValidationError("projectors do not sum to identity", check="completeness", residual=res)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "projectors", _frozen(p))

    @property
    def dim(self) -> int:
        return self.projectors.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Reconstruct ``sum_i lambda_i P_i`` (requires numeric eigenvalues)."""
        return np.einsum("i,ijk->jk", np.asarray(self.eigenvalues, dtype=float), self.projectors)

    @classmethod
    def from_basis(cls, vectors, eigenvalues: Sequence[Hashable] | None = None) -> SharpObservable:
        """Build from an orthonormal basis given as the columns of ``vectors``."""
        v = np.asarray(vectors, dtype=complex)
        d = v.shape[1]
        if eigenvalues is None:
            eigenvalues = tuple(range(d))
        return cls(tuple(eigenvalues), np.einsum("ik,jk->kij", v, v.conj()))

    @classmethod
    def from_matrix(cls, h) -> SharpObservable:
        """Spectral decomposition of a Hermitian matrix, eigenvalues in descending order.

        Raises :class:`ValidationError` when two eigenvalues are closer than the
        derived tolerance.
        """
        h = as_hermitian(h, "observable")
        w, v = np.linalg.eigh(h)
        w, v = w[::-1], v[:, ::-1]
        if w.size > 1 and float(np.min(-np.diff(w))) <= derived_tolerance():
            raise ValidationError("observable is degenerate", check="nondegenerate")
        return cls.from_basis(v, tuple(float(x) for x in w))


def pauli_observable(name: str) -> SharpObservable:
    """Qubit Pauli observable ``"X"``, ``"Y"`` or ``"Z"`` with outcomes (+1, -1)."""
    name = name.upper()
    if name == "Z":
        vecs = np.eye(2, dtype=complex)
    elif name == "X":
        vecs = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    elif name == "Y":
        vecs = np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2)
    else:
        raise ValueError(f"unknown Pauli preset {name!r}")
    return SharpObservable.from_basis(vecs, (1, -1))


def sharp_to_povm(obs: SharpObservable) -> Povm:
    return Povm(obs.eigenvalues, obs.projectors)


def born_rule(rho: DensityMatrix, povm: Povm) -> Distribution:
    """Outcome distribution ``p(x) = Tr[rho E(x)]``."""
    _check_dim(rho.dim, povm.dim, "born_rule")
    p = np.einsum("ij,nji->n", rho.matrix, povm.effects).real
    lo, hi = float(p.min()), float(p.max())
    if lo < -CLAMP_BAND or hi > 1.0 + CLAMP_BAND:
        bad = max(-lo, hi - 1.0)
        raise ValidationError(f"Born probability outside [0, 1] by {bad:.3g}", check="range", residual=bad)
    p = np.clip(p, 0.0, 1.0)
    total = p.sum()
    if abs(total - 1.0) > get_tolerance():
        raise ValidationError(f"Born probabilities sum to {total!r}", check="normalization", residual=abs(total - 1))
    return Distribution(povm.outcomes, p / total)


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_pure_state(dim: int, seed=None) -> DensityMatrix:
    """Haar-random pure state; deterministic for an integer ``seed``."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    return DensityMatrix.from_vector(_complex_gaussian(rng, dim))


def random_density_matrix(dim: int, seed=None, rank: int | None = None) -> DensityMatrix:
    """Random mixed state from the induced (Ginibre) measure."""
    rng = np.random.default_rng(seed)
    g = _complex_gaussian(rng, (dim, rank or dim))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def random_povm(dim: int, n_outcomes: int, seed=None, outcomes: Sequence[Hashable] | None = None) -> Povm:
    """Random full-rank POVM: ``E_k = T^{-1/2} G_k T^{-1/2}`` with ``G_k = A_k A_k^dagger``.

    A draw whose normalizer ``T = sum_k G_k`` is numerically singular is
    discarded; after 10 failed draws ``RuntimeError`` is raised.
    """
    if n_outcomes < 1:
        raise ValueError("n_outcomes must be >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(10):
        a = _complex_gaussian(rng, (n_outcomes, dim, dim))
        g = a @ a.conj().transpose(0, 2, 1)
        try:
            t = psd_inv_sqrt(g.sum(axis=0))
        except np.linalg.LinAlgError:
            continue
        effects = t @ g @ t
        effects = 0.5 * (effects + effects.conj().transpose(0, 2, 1))
        return Povm(tuple(outcomes) if outcomes is not None else tuple(range(n_outcomes)), effects)
    raise RuntimeError("could not draw a POVM with an invertible normalizer in 10 attempts")


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(_complex_gaussian(rng, (dim, dim)))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_sharp_observable(dim: int, seed=None) -> SharpObservable:
    """Observable with outcomes ``0..d-1`` and a Haar-random eigenbasis."""
    return SharpObservable.from_basis(random_unitary(dim, seed))
