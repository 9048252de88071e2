"""JSON/CSV formats, run manifests and atomic file writes."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, linalg
from .errors import NotHermitianError, SequenceError
from .sequences import PulseSequence
from .system import LevelSystem

SCAN_CSV_HEADER = ["tf", "unwanted_residual", "wanted_deviation"]


def fmt(x) -> str:
    """17 significant digits, dot decimal separator regardless of locale."""
    return format(float(x), ".17g")


def encode_matrix(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def decode_matrix(data) -> np.ndarray:
    try:
        A = np.array([[complex(re, im) for re, im in row] for row in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"matrix entries must be [re, im] pairs: {exc}") from None
    return linalg.as_matrix(A)


def jsonable(obj):
    """Recursively turn numpy scalars/arrays into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode_matrix(obj)
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dumps(obj) -> str:
    # json writes floats with repr(), the shortest string that round-trips exactly
    return json.dumps(jsonable(obj), indent=2, allow_nan=True) + "\n"


@dataclass(eq=False)
class SystemConfig:
    system: LevelSystem
    hamiltonian: np.ndarray

    @classmethod
    def from_json(cls, data: dict, tol: float = linalg.HERMITIAN_TOL) -> "SystemConfig":
        try:
            dim = int(data["dim"])
            H = decode_matrix(data["hamiltonian"])
        except KeyError as exc:
            raise ValueError(f"system config is missing {exc}") from None
        system = LevelSystem(dim=dim, labels=tuple(data.get("labels") or ()), flip_set=tuple(data.get("flip_set", (1, 2))))
        if H.shape != (dim, dim):
            raise ValueError(f"hamiltonian is {H.shape[0]}x{H.shape[1]} but dim = {dim}")
        defect, loc = linalg.hermiticity_defect(H)
        if defect > tol:
            raise NotHermitianError(defect, loc)
        return cls(system, H)

    def to_json(self) -> dict:
        return {
            "dim": self.system.dim,
            "labels": list(self.system.labels),
            "flip_set": list(self.system.flip_set),
            "hamiltonian": encode_matrix(self.hamiltonian),
        }


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_system(path=None, tol: float = linalg.HERMITIAN_TOL) -> SystemConfig:
    """Read a system config; ``None`` gives the bundled qutrit example."""
    if path is None:
        data = json.loads(resources.files("selective_dd").joinpath("data/three_level.json").read_text())
    else:
        data = read_json(path)
    return SystemConfig.from_json(data, tol)


def load_sequence(path) -> PulseSequence:
    data = read_json(path)
    if not isinstance(data, dict):
        raise SequenceError("sequence JSON must be an object with 'n' and 'deltas'")
    return PulseSequence.from_json(data)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def manifest(command: str, params: dict, seed: int) -> dict:
    return {
        "command": command,
        "parameters": jsonable(params),
        "seed": seed,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def manifest_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".manifest.json")


def write_output(path, text: str, run_manifest: dict) -> None:
    """Write ``text`` to ``path`` plus a ``<path>.manifest.json`` next to it."""
    atomic_write(path, text)
    atomic_write(manifest_path(path), dumps(run_manifest))
