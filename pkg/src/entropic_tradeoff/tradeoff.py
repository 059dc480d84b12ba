"""Error-plus-disturbance functionals and their mini-max estimation.

Two flavors compare the ideal distributions of sharp targets ``A`` and ``B``
with the marginals ``M1``, ``M2`` of a bi-observable:

* relative entropy: ``S(A^rho || M1^rho) + S(B^rho || M2^rho)``
* conditional entropy: ``H(A^rho | M1^rho) + H(B^rho | M2^rho)`` where the
  joint is ``p(x, x') = A^rho(x) Tr(M1(x') |x><x|)``.

The mini-max ``min_M max_rho`` is estimated numerically: the inner maximum
runs over pure states only (both functionals are convex in ``rho``), the outer
minimum is a restarted Nelder-Mead search over an unconstrained
parameterization of bi-observables.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from ._settings import LOG_ZERO, resolve_base
from .core import (
    DensityMatrix,
    Distribution,
    Povm,
    SharpObservable,
    ValidationError,
    _check_dim,
    born_rule,
    pauli_observable,
    psd_inv_sqrt,
    psd_sqrt,
    sharp_to_povm,
)
from .entropy import conditional_entropy, master_joint, relative_entropy
from .measurement import BiObservable, luders_instrument, sequential_biobservable

__all__ = [
    "Flavor",
    "TradeoffValue",
    "MinimaxConfig",
    "MinimaxResult",
    "PairFunctional",
    "divergence_pair",
    "conditional_pair",
    "calibration_tradeoff",
    "explicit_qubit_biobservable",
    "max_over_states",
    "min_over_biobservables",
    "PENALTY",
]

#: Stand-in for +inf inside the outer optimizer; never reported as a minimum.
PENALTY = 1e6


class Flavor(str, Enum):
    RELATIVE_ENTROPY = "relative-entropy"
    CONDITIONAL_ENTROPY = "conditional-entropy"


@dataclass(frozen=True)
class TradeoffValue:
    error_term: float
    disturbance_term: float
    flavor: Flavor
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", self.error_term + self.disturbance_term)


@dataclass(frozen=True)
class MinimaxConfig:
    """Search budget for :func:`max_over_states` and :func:`min_over_biobservables`.

    ``inner_grid_resolution`` is the number of polar angles of the qubit Bloch
    grid (twice as many azimuths); for ``d > 2`` its square is the number of
    random pure states screened before local ascent. ``max_iterations`` bounds
    the Nelder-Mead iterations of each outer restart.
    """

    n_state_restarts: int = 4
    n_povm_restarts: int = 3
    inner_grid_resolution: int = 24
    convergence_tol: float = 1e-6
    max_iterations: int = 2000
    seed: int = 0
    simplex_step: float = 0.1
    warm_start: bool = True

    def __post_init__(self):
        for name in ("n_state_restarts", "n_povm_restarts", "inner_grid_resolution", "max_iterations"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be > 0")
        if not self.simplex_step > 0:
            raise ValueError("simplex_step must be > 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class MinimaxResult:
    value: float
    argmin_biobservable: BiObservable
    argmax_state: DensityMatrix
    trace: tuple
    converged: bool
    n_evaluations: int
    flavor: Flavor
    seed: int

    @property
    def iterations(self) -> int:
        return self.trace[-1][0] if self.trace else 0


def _check_pair(a: SharpObservable, b: SharpObservable, m: BiObservable) -> None:
    _check_dim(a.dim, b.dim, "target observables")
    _check_dim(a.dim, m.dim, "bi-observable")
    if m.shape != (a.dim, b.dim):
        raise ValidationError(f"bi-observable grid {m.shape} does not match targets ({a.dim}, {b.dim})", check="shape")


def _align(labels: tuple, target: tuple) -> np.ndarray:
    """Index order that matches ``labels`` to ``target``: by label if the sets agree, else by position."""
    if set(labels) == set(target):
        return np.array([labels.index(t) for t in target])
    return np.arange(len(labels))


def _aligned_marginals(a: SharpObservable, b: SharpObservable, m: BiObservable) -> tuple[np.ndarray, np.ndarray]:
    _check_pair(a, b, m)
    m1 = m.effects.sum(axis=1)[_align(m.x_outcomes, a.eigenvalues)]
    m2 = m.effects.sum(axis=0)[_align(m.y_outcomes, b.eigenvalues)]
    return m1, m2


def divergence_pair(
    rho: DensityMatrix, a: SharpObservable, b: SharpObservable, m: BiObservable, base: float | None = None
) -> TradeoffValue:
    """Relative-entropy error ``S(A^rho||M1^rho)`` and disturbance ``S(B^rho||M2^rho)``.

    Marginal labels are matched to the target eigenvalues by label when the
    label sets coincide, otherwise by position. Support violations give
    ``inf`` terms.
    """
    m1, m2 = _aligned_marginals(a, b, m)
    _check_dim(a.dim, rho.dim, "state")
    err = relative_entropy(born_rule(rho, sharp_to_povm(a)), born_rule(rho, Povm(a.eigenvalues, m1)), base)
    dist = relative_entropy(born_rule(rho, sharp_to_povm(b)), born_rule(rho, Povm(b.eigenvalues, m2)), base)
    return TradeoffValue(err, dist, Flavor.RELATIVE_ENTROPY)


def _conditional_terms(pa: Distribution, pb: Distribution, a, b, m1, m2, base) -> TradeoffValue:
    err = conditional_entropy(master_joint(pa, a, Povm(a.eigenvalues, m1)), base)
    dist = conditional_entropy(master_joint(pb, b, Povm(b.eigenvalues, m2)), base)
    return TradeoffValue(err, dist, Flavor.CONDITIONAL_ENTROPY)


def conditional_pair(
    rho: DensityMatrix, a: SharpObservable, b: SharpObservable, m: BiObservable, base: float | None = None
) -> TradeoffValue:
    """Conditional-entropy error ``H(A^rho|M1^rho)`` and disturbance ``H(B^rho|M2^rho)``."""
    m1, m2 = _aligned_marginals(a, b, m)
    _check_dim(a.dim, rho.dim, "state")
    pa = born_rule(rho, sharp_to_povm(a))
    pb = born_rule(rho, sharp_to_povm(b))
    return _conditional_terms(pa, pb, a, b, m1, m2, base)


def calibration_tradeoff(
    a: SharpObservable, b: SharpObservable, m: BiObservable, base: float | None = None
) -> TradeoffValue:
    """Conditional-entropy pair on the uniform ensembles of the target eigenstates.

    The total is bounded below by ``-log c``.
    """
    m1, m2 = _aligned_marginals(a, b, m)
    return _conditional_terms(
        Distribution.uniform(a.eigenvalues), Distribution.uniform(b.eigenvalues), a, b, m1, m2, base
    )


def explicit_qubit_biobservable(a: SharpObservable | None = None, b: SharpObservable | None = None) -> BiObservable:
    """``M(x, y) = 1/4 [1 + x/sqrt(2) S_a + y/sqrt(2) S_b]`` for orthogonal qubit targets.

    ``S_a = P_a(first) - P_a(second)`` is the +/-1 operator of target ``a``;
    with no arguments the targets are Pauli X and Y. Outcome signs follow the
    position of each eigenvalue (first is +1).
    """
    a = pauli_observable("X") if a is None else a
    b = pauli_observable("Y") if b is None else b
    if a.dim != 2 or b.dim != 2:
        raise ValidationError("explicit bi-observable is defined for qubits only", check="dimension")
    sa = a.projectors[0] - a.projectors[1]
    sb = b.projectors[0] - b.projectors[1]
    res = abs(np.trace(sa @ sb).real) / 2
    if res > 1e-9:
        raise ValidationError("targets are not mutually orthogonal on the Bloch sphere", check="orthogonal", residual=res)
    signs = (1.0, -1.0)
    r = 1 / math.sqrt(2)
    effects = np.array([[(np.eye(2) + sx * r * sa + sy * r * sb) / 4 for sy in signs] for sx in signs])
    return BiObservable(a.eigenvalues, b.eigenvalues, effects)


class PairFunctional:
    """State functional ``rho -> TradeoffValue`` for fixed targets and bi-observable.

    Calling it runs the library path (:func:`divergence_pair` or
    :func:`conditional_pair`). :meth:`pure_totals` evaluates totals for a
    batch of pure states with vectorized arithmetic and is what the optimizers
    use.
    """

    def __init__(self, a: SharpObservable, b: SharpObservable, m: BiObservable, flavor=Flavor.RELATIVE_ENTROPY,
                 base: float | None = None):
        self.a, self.b, self.m = a, b, m
        self.flavor = Flavor(flavor)
        self.base = resolve_base(base)
        self._m1, self._m2 = _aligned_marginals(a, b, m)
        self._lik1 = np.clip(np.einsum("aij,mji->am", a.projectors, self._m1).real, 0, None)
        self._lik2 = np.clip(np.einsum("aij,mji->am", b.projectors, self._m2).real, 0, None)

    @property
    def dim(self) -> int:
        return self.a.dim

    def __call__(self, rho: DensityMatrix) -> TradeoffValue:
        if self.flavor is Flavor.RELATIVE_ENTROPY:
            return divergence_pair(rho, self.a, self.b, self.m, self.base)
        return conditional_pair(rho, self.a, self.b, self.m, self.base)

    def pure_totals(self, psis: np.ndarray) -> np.ndarray:
        """Totals for the pure states given as rows of ``psis`` (normalized)."""
        psis = np.atleast_2d(psis)

        def probs(ops):
            return np.clip(np.einsum("ni,xij,nj->nx", psis.conj(), ops, psis).real, 0.0, None)

        pa, pb = probs(self.a.projectors), probs(self.b.projectors)
        if self.flavor is Flavor.RELATIVE_ENTROPY:
            total = _batch_kl(pa, probs(self._m1)) + _batch_kl(pb, probs(self._m2))
        else:
            total = _batch_cond(pa, self._lik1) + _batch_cond(pb, self._lik2)
        return total / math.log(self.base)


def _batch_kl(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    live = p > LOG_ZERO
    bad = np.any(live & (q <= LOG_ZERO), axis=1)
    ok = live & (q > LOG_ZERO)
    terms = np.zeros_like(p)
    terms[ok] = p[ok] * (np.log(p[ok]) - np.log(q[ok]))
    out = np.clip(terms.sum(axis=1), 0.0, None)
    out[bad] = math.inf
    return out


def _batch_cond(p: np.ndarray, lik: np.ndarray) -> np.ndarray:
    joint = p[:, :, None] * lik[None, :, :]
    pm = joint.sum(axis=1, keepdims=True)
    ok = (joint > LOG_ZERO) & (pm > LOG_ZERO)
    terms = np.zeros_like(joint)
    ratio = np.divide(joint, pm, out=np.ones_like(joint), where=ok)
    terms[ok] = joint[ok] * np.log(ratio[ok])
    return np.clip(-terms.sum(axis=(1, 2)), 0.0, None)


def _total(v) -> float:
    return float(v.total if isinstance(v, TradeoffValue) else v)


def _bloch_grid(resolution: int) -> np.ndarray:
    theta = np.linspace(0.0, math.pi, resolution)
    phi = np.linspace(0.0, 2 * math.pi, 2 * resolution, endpoint=False)
    t, p = np.meshgrid(theta, phi, indexing="ij")
    t, p = t.ravel(), p.ravel()
    return np.stack([np.cos(t / 2), np.exp(1j * p) * np.sin(t / 2)], axis=1)


def _random_pure_batch(dim: int, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 0x5EED])
    v = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _diverse_top(cands: np.ndarray, vals: np.ndarray, first: int, k: int, max_fidelity: float = 0.8) -> list[int]:
    """``first`` plus the best remaining candidates that are not close to an already chosen one."""
    chosen = [first]
    for i in np.argsort(-vals, kind="stable"):
        if len(chosen) >= k:
            break
        fid = np.abs(cands[chosen].conj() @ cands[i]) ** 2
        if np.all(fid < max_fidelity) and np.isfinite(vals[i]):
            chosen.append(int(i))
    return chosen


def _bloch_vec(theta, phi) -> np.ndarray:
    theta, phi = np.asarray(theta), np.asarray(phi)
    return np.stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)


def _zoom_qubit(batch, psis: np.ndarray, spacing: float, levels: int = 10, width: int = 7):
    """Local grid search in (theta, phi) around each row of ``psis``, shrinking 3x per level.

    All starts are advanced together so each level costs one batched call.
    Returns the refined states and their values.
    """
    theta = 2 * np.arccos(np.clip(np.abs(psis[:, 0]), 0.0, 1.0))
    phi = np.angle(psis[:, 1] * np.conj(psis[:, 0]))
    vals = np.asarray(batch(_bloch_vec(theta, phi)), dtype=float)
    vals = np.where(np.isnan(vals), -math.inf, vals)
    offsets = np.linspace(-1.0, 1.0, width)
    dt, dp = (g.ravel() for g in np.meshgrid(offsets, offsets, indexing="ij"))
    h = spacing
    for _ in range(levels):
        t = theta[:, None] + h * dt[None, :]
        p = phi[:, None] + h * dp[None, :]
        grid_vals = np.asarray(batch(_bloch_vec(t.ravel(), p.ravel())), dtype=float).reshape(t.shape)
        grid_vals = np.where(np.isnan(grid_vals), -math.inf, grid_vals)
        j = np.argmax(grid_vals, axis=1)
        rows = np.arange(len(theta))
        better = grid_vals[rows, j] > vals
        theta = np.where(better, t[rows, j], theta)
        phi = np.where(better, p[rows, j], phi)
        vals = np.where(better, grid_vals[rows, j], vals)
        h /= 3.0
    return _bloch_vec(theta, phi), vals


def _ascend_batched(batch, psis: np.ndarray, rng: np.random.Generator, levels: int = 60, n_dirs: int = 48,
                    step: float = 0.3):
    """Random-direction local ascent for several pure states at once.

    Each level perturbs every incumbent along ``n_dirs`` random complex
    directions of length ``step``; an incumbent moves to its best improving
    trial, otherwise its step is halved.
    """
    psis = np.array(psis, dtype=complex)
    k, d = psis.shape
    vals = np.asarray(batch(psis), dtype=float)
    vals = np.where(np.isnan(vals), -math.inf, vals)
    steps = np.full(k, step)
    rows = np.arange(k)
    for _ in range(levels):
        dirs = rng.standard_normal((k, n_dirs, d)) + 1j * rng.standard_normal((k, n_dirs, d))
        dirs /= np.linalg.norm(dirs, axis=2, keepdims=True)
        trial = psis[:, None, :] + steps[:, None, None] * dirs
        trial /= np.linalg.norm(trial, axis=2, keepdims=True)
        tv = np.asarray(batch(trial.reshape(-1, d)), dtype=float).reshape(k, n_dirs)
        tv = np.where(np.isnan(tv), -math.inf, tv)
        j = np.argmax(tv, axis=1)
        better = tv[rows, j] > vals
        psis[better] = trial[rows, j][better]
        vals = np.where(better, tv[rows, j], vals)
        steps = np.where(better, steps, steps / 2)
    return psis, vals


def max_over_states(
    functional: Callable[[DensityMatrix], TradeoffValue | float], dim: int, config: MinimaxConfig | None = None
) -> tuple[DensityMatrix, float]:
    """Maximize ``functional`` over pure states of dimension ``dim``.

    Qubits are screened on a Bloch-sphere grid, larger dimensions on a seeded
    random sample. Up to ``n_state_restarts`` mutually distant candidates,
    starting with the first grid point within 1e-12 of the screened maximum,
    are then refined: by shrinking local grids in (theta, phi) for qubits, by
    seeded random-direction ascent otherwise. Returns the maximizing state and its value
    (possibly ``inf``).
    """
    config = config or MinimaxConfig()
    batch = getattr(functional, "pure_totals", None)
    if batch is None:
        def batch(psis):
            return np.array([_total(functional(DensityMatrix.from_vector(v))) for v in psis])

    if dim == 2:
        cands = _bloch_grid(config.inner_grid_resolution)
    else:
        cands = _random_pure_batch(dim, max(64, config.inner_grid_resolution**2), config.seed)
    vals = np.asarray(batch(cands), dtype=float)
    vals = np.where(np.isnan(vals), -math.inf, vals)
    best = float(vals.max())
    if best == -math.inf:
        raise ValueError("functional is non-finite at every screened state")
    first = int(np.argmax(vals >= best - 1e-12))
    if best == math.inf:
        return DensityMatrix.from_vector(cands[first]), math.inf
    starts = _diverse_top(cands, vals, first, config.n_state_restarts)

    best_vec, best_val = cands[first], best
    if dim == 2:
        spacing = math.pi / max(config.inner_grid_resolution - 1, 1)
        vecs, zvals = _zoom_qubit(batch, cands[starts], spacing)
        j = int(np.argmax(zvals))
        if zvals[j] > best_val:
            best_vec, best_val = vecs[j], float(zvals[j])
        return DensityMatrix.from_vector(best_vec), best_val

    vecs, avals = _ascend_batched(batch, cands[starts], np.random.default_rng([config.seed, 0xA5C]))
    j = int(np.argmax(avals))
    if avals[j] > best_val:
        best_vec, best_val = vecs[j], float(avals[j])
    return DensityMatrix.from_vector(best_vec), best_val


def _params_to_biobservable(x: np.ndarray, a: SharpObservable, b: SharpObservable) -> BiObservable:
    nx, ny, d = a.dim, b.dim, a.dim
    h = x.size // 2
    ls = (x[:h] + 1j * x[h:]).reshape(nx * ny, d, d)
    g = ls.conj().transpose(0, 2, 1) @ ls
    t = psd_inv_sqrt(g.sum(axis=0))
    effects = t @ g @ t
    effects = 0.5 * (effects + effects.conj().transpose(0, 2, 1))
    return BiObservable(a.eigenvalues, b.eigenvalues, effects.reshape(nx, ny, d, d))


def _biobservable_to_params(m: BiObservable) -> np.ndarray:
    ls = np.stack([psd_sqrt(e) for e in m.effects.reshape(-1, m.dim, m.dim)]).ravel()
    return np.concatenate([ls.real, ls.imag])


def min_over_biobservables(
    a: SharpObservable,
    b: SharpObservable,
    flavor=Flavor.RELATIVE_ENTROPY,
    config: MinimaxConfig | None = None,
    base: float | None = None,
) -> MinimaxResult:
    """Estimate ``min_M max_rho F(rho, M)`` for the chosen flavor.

    Bi-observables are parameterized by free complex matrices ``L_xy``
    mapped to ``T^{-1/2} L_xy^dagger L_xy T^{-1/2}`` with ``T = sum L^dagger L``,
    so every parameter vector is a valid bi-observable. Each outer restart
    runs Nelder-Mead and re-seeds its simplex around the incumbent until an
    iteration brings less than ``convergence_tol`` improvement or the
    iteration budget is spent. With ``warm_start`` the first restart begins
    from the Lüders-A-then-B sequential bi-observable; the others start from
    seeded Gaussian draws.
    """
    config = config or MinimaxConfig()
    flavor = Flavor(flavor)
    _check_dim(a.dim, b.dim, "target observables")
    d = a.dim
    n_params = 2 * a.dim * b.dim * d * d
    rng = np.random.default_rng(config.seed)

    state = {"best": math.inf, "params": None, "evals": 0, "iter": 0}
    trace: list[tuple[int, float]] = []

    def objective(x):
        state["evals"] += 1
        try:
            m = _params_to_biobservable(x, a, b)
        except (ValidationError, np.linalg.LinAlgError):
            return PENALTY
        _, val = max_over_states(PairFunctional(a, b, m, flavor, base), d, config)
        val = min(val, PENALTY)
        if val < state["best"]:
            state["best"], state["params"] = val, np.array(x, copy=True)
        return val

    def callback(*_args, **_kwargs):
        state["iter"] += 1
        trace.append((state["iter"], state["best"]))

    starts = []
    if config.warm_start:
        starts.append(_biobservable_to_params(sequential_biobservable(luders_instrument(sharp_to_povm(a)), sharp_to_povm(b))))
    while len(starts) < config.n_povm_restarts:
        starts.append(rng.standard_normal(n_params) / math.sqrt(2))

    converged_any = False
    for x0 in starts:
        budget = config.max_iterations
        x, fx = x0, objective(x0)
        step = config.simplex_step
        while budget > 0:
            simplex = np.vstack([x, x + step * np.eye(n_params)])
            res = minimize(objective, x, method="Nelder-Mead", callback=callback,
                           options={"initial_simplex": simplex, "maxiter": budget, "fatol": config.convergence_tol,
                                    "xatol": 1e-9, "adaptive": True})
            budget -= max(int(res.nit), 1)
            improved = fx - res.fun
            if res.fun < fx:
                x, fx = res.x, res.fun
            if improved < config.convergence_tol and res.status == 0:
                converged_any = True
                break

    if state["params"] is None:
        raise RuntimeError("every bi-observable evaluated to an infinite objective")
    m = _params_to_biobservable(state["params"], a, b)
    rho, value = max_over_states(PairFunctional(a, b, m, flavor, base), d, config)
    if not trace or trace[-1][1] != state["best"]:
        trace.append((state["iter"], state["best"]))
    return MinimaxResult(
        value=value,
        argmin_biobservable=m,
        argmax_state=rho,
        trace=tuple(trace),
        converged=converged_any,
        n_evaluations=state["evals"],
        flavor=flavor,
        seed=config.seed,
    )
