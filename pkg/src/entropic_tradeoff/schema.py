"""JSON and CSV encodings for matrices, measurements and optimizer output.

Matrices are ``{"dim": d, "re": [[...]], "im": [[...]]}``. Non-finite floats
are written as the strings ``"inf"``/``"-inf"``/``"nan"`` so that output stays
strict JSON.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .core import DensityMatrix, Distribution, Povm, ValidationError
from .entropy import JointDistribution
from .measurement import BiObservable, Instrument
from .tradeoff import MinimaxConfig, MinimaxResult


def encode_float(x: float):
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def decode_float(x) -> float:
    return float(x)


def _label(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, tuple):
        return list(x)
    return x


def labels_to_json(labels) -> list:
    return [_label(x) for x in labels]


def labels_from_json(labels) -> tuple:
    return tuple(tuple(x) if isinstance(x, list) else x for x in labels)


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"dim": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    try:
        d = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros((d, d))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix literal: {exc}", check="schema") from None
    if re.shape != (d, d) or im.shape != (d, d):
        raise ValidationError(f"matrix literal does not have shape ({d}, {d})", check="schema")
    return re + 1j * im


def state_to_json(rho: DensityMatrix) -> dict:
    return matrix_to_json(rho.matrix)


def povm_to_json(povm: Povm) -> dict:
    return {"outcomes": labels_to_json(povm.outcomes), "effects": [matrix_to_json(e) for e in povm.effects]}


def povm_from_json(obj) -> Povm:
    return Povm(labels_from_json(obj["outcomes"]), np.stack([matrix_from_json(e) for e in obj["effects"]]))


def instrument_to_json(inst: Instrument) -> dict:
    return {
        "outcomes": labels_to_json(inst.outcomes),
        "kraus": [[matrix_to_json(k) for k in ks] for ks in inst.kraus],
    }


def instrument_from_json(obj) -> Instrument:
    kraus = tuple(np.stack([matrix_from_json(k) for k in ks]) for ks in obj["kraus"])
    return Instrument(labels_from_json(obj["outcomes"]), kraus)


def biobservable_to_json(m: BiObservable) -> dict:
    return {
        "x_outcomes": labels_to_json(m.x_outcomes),
        "y_outcomes": labels_to_json(m.y_outcomes),
        "effects": [[matrix_to_json(e) for e in row] for row in m.effects],
    }


def biobservable_from_json(obj) -> BiObservable:
    effects = np.array([[matrix_from_json(e) for e in row] for row in obj["effects"]])
    return BiObservable(labels_from_json(obj["x_outcomes"]), labels_from_json(obj["y_outcomes"]), effects)


def distribution_to_json(p: Distribution) -> dict:
    return {"outcomes": labels_to_json(p.outcomes), "probabilities": p.probabilities.tolist()}


def distribution_from_json(obj) -> Distribution:
    return Distribution(labels_from_json(obj["outcomes"]), obj["probabilities"])


def joint_to_json(j: JointDistribution) -> dict:
    return {
        "row_outcomes": labels_to_json(j.row_outcomes),
        "col_outcomes": labels_to_json(j.col_outcomes),
        "probabilities": j.probabilities.tolist(),
    }


def joint_from_json(obj) -> JointDistribution:
    return JointDistribution(
        labels_from_json(obj["row_outcomes"]), labels_from_json(obj["col_outcomes"]), obj["probabilities"]
    )


def config_to_json(config: MinimaxConfig) -> dict:
    return config.to_dict()


def config_from_json(obj: dict | None) -> MinimaxConfig:
    obj = dict(obj or {})
    unknown = set(obj) - set(MinimaxConfig.__dataclass_fields__)
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}", check="schema")
    return MinimaxConfig(**obj)


def result_to_json(result: MinimaxResult) -> dict:
    return {
        "value": encode_float(result.value),
        "flavor": result.flavor.value,
        "converged": result.converged,
        "iterations": result.iterations,
        "n_evaluations": result.n_evaluations,
        "seed": result.seed,
        "argmin_biobservable": biobservable_to_json(result.argmin_biobservable),
        "argmax_state": state_to_json(result.argmax_state),
        "trace": [[i, encode_float(v)] for i, v in result.trace],
    }


def write_trace_csv(trace, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "value"])
        for i, v in trace:
            w.writerow([i, repr(float(v))])


def read_trace_csv(path) -> list[tuple[int, float]]:
    with open(Path(path), newline="") as fh:
        return [(int(r["iteration"]), float(r["value"])) for r in csv.DictReader(fh)]
