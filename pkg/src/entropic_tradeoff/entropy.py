"""Classical information measures, the overlap constant and the entropic bounds.

All functions take an optional ``base`` for the logarithm; ``None`` uses the
process-wide setting (bits unless changed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._settings import LOG_ZERO, get_tolerance, resolve_base
from .core import (
    Distribution,
    Povm,
    SharpObservable,
    ValidationError,
    _check_dim,
    _frozen,
)

__all__ = [
    "JointDistribution",
    "TradeoffBounds",
    "shannon",
    "relative_entropy",
    "joint_entropy",
    "conditional_entropy",
    "mutual_information",
    "overlap_constant",
    "overlap_and_bounds",
    "master_joint",
]


def _probs(p) -> np.ndarray:
    return p.probabilities if isinstance(p, Distribution) else np.asarray(p, dtype=float)


def _plogp(p: np.ndarray) -> np.ndarray:
    """Elementwise ``p ln p`` with tiny entries treated as exact zeros."""
    out = np.zeros_like(p, dtype=float)
    mask = p > LOG_ZERO
    out[mask] = p[mask] * np.log(p[mask])
    return out


def shannon(p, base: float | None = None) -> float:
    """Shannon entropy ``-sum p log p``."""
    h = -float(_plogp(_probs(p)).sum())
    return (h if h > 0 else 0.0) / math.log(resolve_base(base))


def relative_entropy(p: Distribution, q: Distribution, base: float | None = None) -> float:
    """Kullback-Leibler divergence ``S(p||q)``; ``inf`` when ``p`` is not supported by ``q``."""
    if tuple(p.outcomes) != tuple(q.outcomes):
        raise ValidationError("relative entropy needs identical outcome sets", check="outcomes")
    pp, qq = p.probabilities, q.probabilities
    mask = pp > LOG_ZERO
    if np.any(qq[mask] <= LOG_ZERO):
        return math.inf
    s = float(np.sum(pp[mask] * (np.log(pp[mask]) - np.log(qq[mask]))))
    return (s if s > 0 else 0.0) / math.log(resolve_base(base))


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Joint probabilities ``p[a, m]``: rows are reference labels, columns measurement labels."""

    row_outcomes: tuple
    col_outcomes: tuple
    probabilities: np.ndarray

    def __post_init__(self):
        rows, cols = tuple(self.row_outcomes), tuple(self.col_outcomes)
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (len(rows), len(cols)):
            raise ValidationError(f"joint has shape {p.shape}, labels give {(len(rows), len(cols))}", check="shape")
        if not np.all(np.isfinite(p)):
            raise ValidationError("non-finite joint probability", check="finite")
        if p.min() < -get_tolerance():
            raise ValidationError("negative joint probability", check="range", residual=-float(p.min()))
        p = np.clip(p, 0.0, None)
        res = abs(float(p.sum()) - 1.0)
        if res > get_tolerance():
            raise ValidationError("joint probabilities do not sum to 1", check="normalization", residual=res)
        object.__setattr__(self, "row_outcomes", rows)
        object.__setattr__(self, "col_outcomes", cols)
        object.__setattr__(self, "probabilities", _frozen(p))

    def row_marginal(self) -> Distribution:
        return Distribution(self.row_outcomes, self.probabilities.sum(axis=1))

    def col_marginal(self) -> Distribution:
        return Distribution(self.col_outcomes, self.probabilities.sum(axis=0))


def joint_entropy(joint: JointDistribution, base: float | None = None) -> float:
    return shannon(joint.probabilities.ravel(), base)


def conditional_entropy(joint: JointDistribution, base: float | None = None) -> float:
    """``H(A|M) = -sum_{m,a} p(m, a) log p(a|m)``; columns with ``p(m) = 0`` contribute nothing."""
    p = joint.probabilities
    pm = p.sum(axis=0)
    mask = (p > LOG_ZERO) & (pm[None, :] > LOG_ZERO)
    cond = np.divide(p, pm[None, :], out=np.zeros_like(p), where=mask)
    h = -float(np.sum(p[mask] * np.log(cond[mask])))
    return (h if h > 0 else 0.0) / math.log(resolve_base(base))


def mutual_information(joint: JointDistribution, base: float | None = None) -> float:
    """``I(A:M) = H(A) - H(A|M)``, clipped at zero."""
    return max(shannon(joint.row_marginal(), base) - conditional_entropy(joint, base), 0.0)


@dataclass(frozen=True)
class TradeoffBounds:
    """Overlap constant with the uncertainty bound ``-log c`` and exclusion bound ``log(d^2 c)``."""

    c: float
    mu_bound: float
    exclusion_bound: float
    dim: int


def overlap_constant(a: SharpObservable, b: SharpObservable) -> float:
    """``c = max_{x,y} |<x|y>|^2`` via ``Tr(P_x Q_y)`` over all pairs."""
    _check_dim(a.dim, b.dim, "overlap_constant")
    overlaps = np.einsum("xij,yji->xy", a.projectors, b.projectors).real
    return float(min(overlaps.max(), 1.0))


def overlap_and_bounds(a: SharpObservable, b: SharpObservable, base: float | None = None) -> TradeoffBounds:
    c = overlap_constant(a, b)
    lb = math.log(resolve_base(base))
    return TradeoffBounds(c=c, mu_bound=-math.log(c) / lb, exclusion_bound=math.log(a.dim**2 * c) / lb, dim=a.dim)


def master_joint(input: Distribution, basis: SharpObservable, measurement: Povm) -> JointDistribution:
    """Joint ``p(a, m) = p(a) Tr(M_m |a><a|)`` for an ensemble diagonal in ``basis``."""
    _check_dim(basis.dim, measurement.dim, "master_joint")
    if tuple(input.outcomes) != tuple(basis.eigenvalues):
        raise ValidationError("input outcomes must match the basis labels", check="outcomes")
    likelihood = np.einsum("aij,mji->am", basis.projectors, measurement.effects).real
    likelihood = np.clip(likelihood, 0.0, None)
    return JointDistribution(basis.eigenvalues, measurement.outcomes, input.probabilities[:, None] * likelihood)
