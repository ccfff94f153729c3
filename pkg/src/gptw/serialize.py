"""JSON file formats for theories, boxes, quantum objects, and ontic models.

Formats (all plain JSON, probabilities as decimal doubles):

  theory  {"preparations": [...], "transformations": [...],
           "measurements": [{"id": ..., "arity": n}, ...],
           "table": [{"prep": ..., "trans": ..., "meas": ..., "probs": [...]}, ...],
           "identity": "I"}                     # identity key optional

  box     {"parties": n, "settings": [...], "outcomes": [...],
           "table": {"x1,...,xn": [flattened outcome probs, row-major]}}

  state   {"dims": [d1, ...], "matrix": M}       # or "dim": d
  povm    {"elements": [M, ...]}
  channel {"kraus": [M, ...], "output_dims": [...]}   # output_dims optional

  model   {"ontic_states": [...], "preparations": {P: [mu...]},
           "measurements": {M: [[xi(x=0, l)...], [xi(x=1, l)...], ...]},
           "transformations": {T: [[column-stochastic matrix]]}}

Complex matrices M are arrays of rows, each row an array of [re, im] pairs
(row-major).  Loaders re-validate all invariants of the objects they build.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .correlations import CorrelationBox
from .errors import ValidationError
from .ontic import OnticModel
from .quantum import Channel, DensityMatrix, Povm
from .theory import Measurement, OperationalTheory


class ParseError(ValidationError):
    """Malformed input file; message carries the file position when known."""


def _read_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _require(data: Any, key: str, context: str) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise ParseError(f"{context}: missing key {key!r}")
    return data[key]


def _float_array(data: Any, context: str) -> np.ndarray:
    try:
        return np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{context}: expected an array of numbers") from None


# -- complex matrices --------------------------------------------------------


def matrix_to_json(mat: np.ndarray) -> list[list[list[float]]]:
    mat = np.asarray(mat, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in mat]


def matrix_from_json(data: Any, context: str = "matrix") -> np.ndarray:
    arr = _float_array(data, context)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ParseError(f"{context}: expected rows of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


# -- theories ---------------------------------------------------------------


def theory_to_json(theory: OperationalTheory) -> dict:
    return {
        "preparations": list(theory.preparations),
        "transformations": list(theory.transformations),
        "measurements": [{"id": m.id, "arity": m.arity} for m in theory.measurements],
        "identity": theory.identity,
        "table": [
            {"prep": p, "trans": t, "meas": m, "probs": [float(x) for x in row]}
            for (p, t, m), row in sorted(theory.rows())
        ],
    }


def theory_from_json(data: Any, context: str = "theory") -> OperationalTheory:
    meas = [
        Measurement(str(_require(m, "id", context)), int(_require(m, "arity", context)))
        for m in _require(data, "measurements", context)
    ]
    table = {}
    for row in _require(data, "table", context):
        key = (
            str(_require(row, "prep", context)),
            str(_require(row, "trans", context)),
            str(_require(row, "meas", context)),
        )
        table[key] = _float_array(_require(row, "probs", context), context)
    return OperationalTheory(
        [str(p) for p in _require(data, "preparations", context)],
        [str(t) for t in _require(data, "transformations", context)],
        meas,
        table,
        identity=str(data.get("identity", "I")),
    )


def load_theory(path: str | Path) -> OperationalTheory:
    return theory_from_json(_read_json(path), context=str(path))


def save_theory(theory: OperationalTheory, path: str | Path) -> None:
    Path(path).write_text(json.dumps(theory_to_json(theory), indent=1))


# -- boxes --------------------------------------------------------------------


def box_to_json(box: CorrelationBox) -> dict:
    table = {}
    for xs in np.ndindex(*box.settings):
        key = ",".join(str(x) for x in xs)
        table[key] = [float(v) for v in box.table[xs].reshape(-1)]
    return {
        "parties": box.n_parties,
        "settings": list(box.settings),
        "outcomes": list(box.outcomes),
        "table": table,
    }


def box_from_json(data: Any, context: str = "box") -> CorrelationBox:
    parties = int(_require(data, "parties", context))
    settings = [int(s) for s in _require(data, "settings", context)]
    outcomes = [int(o) for o in _require(data, "outcomes", context)]
    if len(settings) != parties or len(outcomes) != parties:
        raise ParseError(f"{context}: settings/outcomes must list {parties} entries")
    table = np.zeros(tuple(settings) + tuple(outcomes))
    raw = _require(data, "table", context)
    for xs in np.ndindex(*settings):
        key = ",".join(str(x) for x in xs)
        if key not in raw:
            raise ParseError(f"{context}: missing setting row {key!r}")
        row = _float_array(raw[key], context)
        if row.size != int(np.prod(outcomes)):
            raise ParseError(f"{context}: row {key!r} has {row.size} probs, expected {np.prod(outcomes)}")
        table[xs] = row.reshape(tuple(outcomes))
    return CorrelationBox(settings, outcomes, table)


def load_box(path: str | Path) -> CorrelationBox:
    return box_from_json(_read_json(path), context=str(path))


def save_box(box: CorrelationBox, path: str | Path) -> None:
    Path(path).write_text(json.dumps(box_to_json(box), indent=1))


# -- quantum objects ----------------------------------------------------------


def state_to_json(state: DensityMatrix) -> dict:
    return {"dims": list(state.dims), "matrix": matrix_to_json(state.matrix)}


def state_from_json(data: Any, context: str = "state") -> DensityMatrix:
    if isinstance(data, dict) and "dims" in data:
        dims = [int(d) for d in data["dims"]]
    elif isinstance(data, dict) and "dim" in data:
        dims = [int(data["dim"])]
    else:
        raise ParseError(f"{context}: missing 'dims' (or 'dim')")
    return DensityMatrix(matrix_from_json(_require(data, "matrix", context), context), dims=dims)


def load_state(path: str | Path) -> DensityMatrix:
    return state_from_json(_read_json(path), context=str(path))


def save_state(state: DensityMatrix, path: str | Path) -> None:
    Path(path).write_text(json.dumps(state_to_json(state)))


def povm_to_json(povm: Povm) -> dict:
    return {"elements": [matrix_to_json(e) for e in povm.elements]}


def povm_from_json(data: Any, context: str = "povm") -> Povm:
    return Povm([matrix_from_json(e, context) for e in _require(data, "elements", context)])


def load_povm(path: str | Path) -> Povm:
    return povm_from_json(_read_json(path), context=str(path))


def save_povm(povm: Povm, path: str | Path) -> None:
    Path(path).write_text(json.dumps(povm_to_json(povm)))


def channel_to_json(chan: Channel) -> dict:
    return {"kraus": [matrix_to_json(k) for k in chan.kraus], "output_dims": list(chan.output_dims)}


def channel_from_json(data: Any, context: str = "channel") -> Channel:
    kraus = []
    for k in _require(data, "kraus", context):
        arr = _float_array(k, context)
        if arr.ndim != 3 or arr.shape[-1] != 2:
            raise ParseError(f"{context}: Kraus operator is not an array of [re, im] pairs")
        kraus.append(arr[..., 0] + 1j * arr[..., 1])
    dims = data.get("output_dims")
    return Channel(kraus, output_dims=[int(d) for d in dims] if dims else None)


def load_channel(path: str | Path) -> Channel:
    return channel_from_json(_read_json(path), context=str(path))


def save_channel(chan: Channel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(channel_to_json(chan)))


# -- ontic models --------------------------------------------------------------


def model_to_json(model: OnticModel) -> dict:
    return {
        "ontic_states": list(model.ontic_states),
        "preparations": {p: [float(x) for x in v] for p, v in model.mu.items()},
        "measurements": {m: [[float(x) for x in row] for row in v] for m, v in model.xi.items()},
        "transformations": {t: [[float(x) for x in row] for row in v] for t, v in model.trans.items()},
    }


def model_from_json(data: Any, context: str = "model") -> OnticModel:
    return OnticModel(
        [str(s) for s in _require(data, "ontic_states", context)],
        {str(p): _float_array(v, context) for p, v in _require(data, "preparations", context).items()},
        {str(m): _float_array(v, context) for m, v in _require(data, "measurements", context).items()},
        {str(t): _float_array(v, context) for t, v in _require(data, "transformations", context).items()},
    )


def load_model(path: str | Path) -> OnticModel:
    return model_from_json(_read_json(path), context=str(path))


def save_model(model: OnticModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_json(model), indent=1))
