"""Command-line front end: ``validate``, ``evaluate``, ``optimize`` and ``fuzz``.

Exit statuses: 0 success, 1 validation failure, 2 optimizer did not converge,
3 I/O, parse or usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _settings
from .core import (
    DensityMatrix,
    SharpObservable,
    ValidationError,
    as_complex_matrix,
    hermiticity_residual,
    pauli_observable,
    random_povm,
    random_sharp_observable,
    sharp_to_povm,
)
from .entropy import master_joint, mutual_information, overlap_and_bounds
from .measurement import (
    BiObservable,
    biobservable_from_grid,
    commuting_biobservable,
    luders_instrument,
    marginals,
    sequential_biobservable,
)
from .core import Distribution
from .schema import (
    biobservable_from_json,
    biobservable_to_json,
    config_from_json,
    encode_float,
    instrument_from_json,
    matrix_from_json,
    matrix_to_json,
    result_to_json,
    state_to_json,
    write_trace_csv,
)
from .tradeoff import (
    Flavor,
    MinimaxConfig,
    PairFunctional,
    calibration_tradeoff,
    conditional_pair,
    divergence_pair,
    explicit_qubit_biobservable,
    max_over_states,
    min_over_biobservables,
)

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_IO = 0, 1, 2, 3

STATE_PRESETS = ("uniform-ensemble", "maximize", "maximally-mixed")


class UsageError(Exception):
    pass


@dataclass
class ProblemSpec:
    """Parsed problem file; see ``problems/README.md`` for the JSON layout."""

    id: str
    dim: int
    a: object
    b: object
    biobservable: dict | None
    flavor: Flavor
    state: object
    config: MinimaxConfig = field(default_factory=MinimaxConfig)

    @classmethod
    def from_json(cls, obj: dict, *, default_id: str = "problem") -> ProblemSpec:
        try:
            flavor = obj.get("flavor", "relative-entropy")
            if flavor == "calibration":
                flavor = "conditional-entropy"
            return cls(
                id=str(obj.get("id", default_id)),
                dim=int(obj["dim"]),
                a=obj["a"],
                b=obj["b"],
                biobservable=obj.get("biobservable"),
                flavor=Flavor(flavor),
                state=obj.get("state", "maximize"),
                config=config_from_json(obj.get("config")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"malformed problem spec: {exc!r}", check="schema") from None


@dataclass
class ReportRecord:
    problem_id: str
    flavor: str
    mode: str
    error_term: float
    disturbance_term: float
    total: float
    bound: float
    bound_slack: float
    bound_applies: bool
    iterations: int | None = None
    converged: bool | None = None
    seed: int | None = None

    def to_json(self) -> dict:
        return {k: encode_float(v) if isinstance(v, float) else v for k, v in asdict(self).items()}


def load_observable(obj, dim: int) -> SharpObservable:
    if isinstance(obj, str):
        if dim != 2:
            raise ValidationError(f"preset {obj!r} needs dim 2", check="dimension")
        try:
            return pauli_observable(obj)
        except ValueError:
            raise ValidationError(f"unknown observable preset {obj!r}", check="preset") from None
    if "basis" in obj:
        basis = matrix_from_json(obj["basis"])
        return SharpObservable.from_basis(basis, obj.get("eigenvalues"))
    m = as_complex_matrix(matrix_from_json(obj.get("matrix", obj)), "observable")
    if m.shape[0] != dim:
        raise ValidationError(f"observable has dimension {m.shape[0]}, spec says {dim}", check="dimension")
    return SharpObservable.from_matrix(m)


def build_biobservable(spec: dict | None, a: SharpObservable, b: SharpObservable) -> BiObservable:
    if spec is None:
        raise ValidationError("problem has no bi-observable", check="schema")
    kind = spec.get("kind", "explicit")
    if kind == "qubit-orthogonal":
        return explicit_qubit_biobservable(a, b)
    if kind == "commuting":
        return commuting_biobservable(sharp_to_povm(a), sharp_to_povm(b))
    if kind == "sequential":
        inst = spec.get("instrument", "luders")
        inst = luders_instrument(sharp_to_povm(a)) if inst == "luders" else instrument_from_json(inst)
        return sequential_biobservable(inst, sharp_to_povm(b))
    if kind == "explicit":
        return biobservable_from_json(spec)
    raise ValidationError(f"unknown bi-observable kind {kind!r}", check="schema")


def load_state(obj, dim: int):
    if isinstance(obj, str):
        if obj not in STATE_PRESETS:
            raise ValidationError(f"unknown state preset {obj!r}", check="preset")
        return DensityMatrix.maximally_mixed(dim) if obj == "maximally-mixed" else obj
    if "pure" in obj:
        v = np.asarray(obj["pure"]["re"], dtype=float) + 1j * np.asarray(obj["pure"].get("im", 0.0), dtype=float)
        return DensityMatrix.from_vector(v)
    rho = DensityMatrix(matrix_from_json(obj))
    if rho.dim != dim:
        raise ValidationError(f"state has dimension {rho.dim}, spec says {dim}", check="dimension")
    return rho


def read_problem(path) -> ProblemSpec:
    with open(path) as fh:
        obj = json.load(fh)
    return ProblemSpec.from_json(obj, default_id=Path(path).stem)


def validation_checks(obj: dict) -> list[dict]:
    """Run every invariant on a raw problem object; one entry per check."""
    checks: list[dict] = []

    def run(name, fn):
        try:
            value = fn()
        except ValidationError as exc:
            checks.append({"check": f"{name}.{exc.check or 'invalid'}", "passed": False,
                           "residual": encode_float(exc.residual) if exc.residual is not None else None,
                           "message": str(exc)})
            return None
        checks.append({"check": name, "passed": True, "residual": None, "message": "ok"})
        return value

    spec = run("spec", lambda: ProblemSpec.from_json(obj))
    if spec is None:
        return checks

    def observable(key, raw):
        if isinstance(raw, dict) and "basis" not in raw:
            m = matrix_from_json(raw.get("matrix", raw))
            res = hermiticity_residual(as_complex_matrix(m))
            if res > _settings.get_tolerance():
                raise ValidationError(f"observable {key} is not Hermitian", check="hermitian", residual=res)
        return load_observable(raw, spec.dim)

    a = run("a", lambda: observable("a", spec.a))
    b = run("b", lambda: observable("b", spec.b))
    run("state", lambda: load_state(spec.state, spec.dim))
    if a is not None and b is not None and spec.biobservable is not None:
        def bi():
            m = build_biobservable(spec.biobservable, a, b)
            if m.shape != (a.dim, b.dim) or m.dim != spec.dim:
                raise ValidationError("bi-observable does not match the targets", check="shape")
            marginals(m)
            return m
        run("biobservable", bi)
    return checks


def evaluate(spec: ProblemSpec) -> ReportRecord:
    a = load_observable(spec.a, spec.dim)
    b = load_observable(spec.b, spec.dim)
    m = build_biobservable(spec.biobservable, a, b)
    state = load_state(spec.state, spec.dim)
    bound = overlap_and_bounds(a, b).mu_bound
    meta = {}
    if isinstance(state, DensityMatrix):
        fn = divergence_pair if spec.flavor is Flavor.RELATIVE_ENTROPY else conditional_pair
        tv, mode = fn(state, a, b, m), "fixed-state"
    elif state == "uniform-ensemble":
        if spec.flavor is not Flavor.CONDITIONAL_ENTROPY:
            raise ValidationError("uniform-ensemble input needs the conditional-entropy flavor", check="flavor")
        tv, mode = calibration_tradeoff(a, b, m), "calibration"
    else:
        f = PairFunctional(a, b, m, spec.flavor)
        rho, _ = max_over_states(f, spec.dim, spec.config)
        tv, mode = f(rho), "max-over-states"
        meta = {"seed": spec.config.seed}
    return ReportRecord(
        problem_id=spec.id,
        flavor=spec.flavor.value,
        mode=mode,
        error_term=tv.error_term,
        disturbance_term=tv.disturbance_term,
        total=tv.total,
        bound=bound,
        bound_slack=tv.total - bound,
        bound_applies=mode == "calibration",
        **meta,
    )


def _emit(obj, out: Path | None, name: str) -> None:
    text = json.dumps(obj, indent=2)
    print(text)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text + "\n")


def cmd_validate(args) -> int:
    with open(args.problem) as fh:
        obj = json.load(fh)
    checks = validation_checks(obj)
    ok = all(c["passed"] for c in checks)
    _emit({"problem": str(args.problem), "valid": ok, "checks": checks}, args.out, f"{Path(args.problem).stem}.validation.json")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_evaluate(args) -> int:
    spec = read_problem(args.problem)
    if args.seed is not None:
        spec.config = MinimaxConfig(**{**spec.config.to_dict(), "seed": args.seed})
    record = evaluate(spec)
    payload = record.to_json()
    _emit(payload, args.out, f"{spec.id}.report.json")
    if args.out is not None:
        path = args.out / f"{spec.id}.report.csv"
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(payload))
            w.writeheader()
            w.writerow(payload)
    return EXIT_OK


def cmd_optimize(args) -> int:
    spec = read_problem(args.problem)
    if spec.state != "maximize":
        raise ValidationError("optimize needs state 'maximize'", check="state")
    if args.seed is not None:
        spec.config = MinimaxConfig(**{**spec.config.to_dict(), "seed": args.seed})
    a = load_observable(spec.a, spec.dim)
    b = load_observable(spec.b, spec.dim)
    result = min_over_biobservables(a, b, spec.flavor, spec.config)
    payload = {"problem_id": spec.id, "config": spec.config.to_dict(), **result_to_json(result)}
    _emit(payload, args.out, f"{spec.id}.result.json")
    if args.out is not None:
        write_trace_csv(result.trace, args.out / f"{spec.id}.trace.csv")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def fuzz(dim: int, n_trials: int, seed: int = 0) -> dict:
    """Check the uncertainty and exclusion bounds on random targets and bi-observables."""
    if dim < 2:
        raise UsageError("fuzz needs dim >= 2")
    if n_trials < 1:
        raise UsageError("fuzz needs at least one trial")
    seeds = np.random.SeedSequence(seed).generate_state(3 * n_trials, dtype=np.uint32).reshape(n_trials, 3)
    min_cal, min_excl = math.inf, math.inf
    violations = []
    for i, (sa, sb, sm) in enumerate(seeds):
        a = random_sharp_observable(dim, int(sa))
        b = random_sharp_observable(dim, int(sb))
        m = biobservable_from_grid(a.eigenvalues, b.eigenvalues, random_povm(dim, dim * dim, int(sm)))
        bounds = overlap_and_bounds(a, b)
        cal = calibration_tradeoff(a, b, m)
        m1, m2 = marginals(m)
        info = (mutual_information(master_joint(Distribution.uniform(a.eigenvalues), a, m1))
                + mutual_information(master_joint(Distribution.uniform(b.eigenvalues), b, m2)))
        cal_slack = cal.total - bounds.mu_bound
        excl_slack = bounds.exclusion_bound - info
        min_cal, min_excl = min(min_cal, cal_slack), min(min_excl, excl_slack)
        if cal_slack < -1e-9 or excl_slack < -1e-9:
            violations.append({
                "trial": i,
                "seeds": [int(sa), int(sb), int(sm)],
                "calibration_slack": cal_slack,
                "exclusion_slack": excl_slack,
                "a": {"basis": matrix_to_json(np.stack([_eigvec(p) for p in a.projectors], axis=1))},
                "b": {"basis": matrix_to_json(np.stack([_eigvec(p) for p in b.projectors], axis=1))},
                "biobservable": biobservable_to_json(m),
            })
    return {
        "dim": dim,
        "n_trials": n_trials,
        "seed": seed,
        "min_calibration_slack": min_cal,
        "min_exclusion_slack": min_excl,
        "n_violations": len(violations),
        "violations": violations,
    }


def _eigvec(p: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(p)
    return v[:, -1]


def cmd_fuzz(args) -> int:
    report = fuzz(args.dim, args.trials, 0 if args.seed is None else args.seed)
    _emit(report, args.out, f"fuzz_d{args.dim}.json")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    unit = common.add_mutually_exclusive_group()
    unit.add_argument("--bits", dest="base", action="store_const", const=2.0, help="entropies in bits (default)")
    unit.add_argument("--nats", dest="base", action="store_const", const=math.e, help="entropies in nats")
    common.add_argument("--out", type=Path, default=None, help="directory for report files")
    common.add_argument("--tol", type=float, default=None, help="validation tolerance (default 1e-10)")

    parser = _Parser(prog="entropic-tradeoff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn, helptext in [
        ("validate", cmd_validate, "check every invariant of a problem file"),
        ("evaluate", cmd_evaluate, "evaluate the tradeoff for a concrete bi-observable"),
        ("optimize", cmd_optimize, "run the mini-max estimation"),
    ]:
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("problem", type=Path)
        p.set_defaults(func=fn)
    p = sub.add_parser("fuzz", parents=[common], help="bound-compliance suite over random instances")
    p.add_argument("--dim", type=int, default=2, choices=(2, 3, 4))
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be >= 1")
    try:
        with _settings.override(atol=args.tol, log_base=args.base):
            return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"validation error [{exc.check}]: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
