"""Deterministic file writers for pulses, trajectories, and reports.

All JSON is written with sorted keys and fixed separators and all floats
via repr, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .hilbert import DensityMatrix, StateVector, TensorLayout, make_layout, ModeSpec, QubitSpec


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read JSON from {path}: {exc}") from exc


def write_csv(path, header: Sequence[str], columns: Sequence[np.ndarray]) -> None:
    cols = [np.asarray(c) for c in columns]
    if len({c.shape[0] for c in cols}) != 1:
        raise ConfigError("CSV columns must share a length")
    lines = [",".join(header)]
    for i in range(cols[0].shape[0]):
        lines.append(",".join(repr(float(c[i])) for c in cols))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_state(path, state) -> None:
    """Dump a state vector or density matrix with layout metadata (.npz)."""
    layout = state.layout
    meta = {
        "qubit_frequencies": [q.frequency for q in layout.qubits],
        "mode_frequencies": [m.frequency for m in layout.modes],
        "mode_truncations": [m.truncation_dim for m in layout.modes],
        "kind": "pure" if isinstance(state, StateVector) else "density",
    }
    data = state.amplitudes if isinstance(state, StateVector) else state.matrix
    np.savez(path, data=data, meta=json.dumps(meta, sort_keys=True))


def load_state(path):
    with np.load(path, allow_pickle=False) as f:
        meta = json.loads(str(f["meta"]))
        data = f["data"]
    layout = make_layout(
        [QubitSpec(w) for w in meta["qubit_frequencies"]],
        [
            ModeSpec(w, d)
            for w, d in zip(meta["mode_frequencies"], meta["mode_truncations"])
        ],
        max_dim=int(1e9),
    )
    if meta["kind"] == "pure":
        return StateVector(data, layout, normalize=True)
    return DensityMatrix(data, layout, validate=False)
