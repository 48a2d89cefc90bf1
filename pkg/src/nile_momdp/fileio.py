"""Deterministic readers and writers for run artifacts.

Every writer here produces byte-identical output for identical inputs: floats
are serialized with Python's shortest round-trip repr (numpy scalars are cast
to plain float first), newlines are always "\n", and the manifest contains no
timestamps, hostnames, or anything else that varies between equal runs.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError

MANIFEST_NAME = "manifest.json"


def format_cell(value) -> str:
    if isinstance(value, bool):
        raise ValueError("booleans have no CSV representation here")
    if isinstance(value, str):
        if "," in value or "\n" in value:
            raise ValueError(f"cell {value!r} would break the CSV layout")
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(cell) for cell in row))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def write_trajectory_csv(path: str, reservoir_names: Sequence[str],
                         reward_names: Sequence[str], rows: Iterable) -> None:
    """Rows are (t, storages, actions, rewards) as produced by rollout(collect=True)."""
    rows = list(rows)
    n_actions = len(rows[0][2]) if rows else len(reservoir_names)
    header = (["t"]
              + [f"storage_{name}" for name in reservoir_names]
              + [f"a{i + 1}" for i in range(n_actions)]
              + [f"r_{name}" for name in reward_names])
    flat = [[t, *storages, *actions, *rewards] for t, storages, actions, rewards in rows]
    write_csv(path, header, flat)


def objective_headers(dim: int, names: Optional[Sequence[str]] = None) -> list[str]:
    if names is not None and len(names) == dim:
        return [f"obj_{n.upper()}" for n in names]
    return [f"obj_{i + 1}" for i in range(dim)]


def write_solution_set_csv(path: str, objectives: np.ndarray,
                           names: Optional[Sequence[str]] = None) -> None:
    objectives = np.asarray(objectives, dtype=float)
    if objectives.ndim != 2:
        raise ValueError("objectives must be a 2-d array")
    write_csv(path, objective_headers(objectives.shape[1], names), objectives.tolist())


def read_solution_set_csv(path: str) -> np.ndarray:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = [line.strip() for line in handle if line.strip()]
    except OSError as exc:
        raise ConfigurationError(f"cannot read solution set {path!r}: {exc}") from exc
    if not lines:
        raise ConfigurationError(f"{path}: empty solution set file")
    header = lines[0].split(",")
    if not all(col.startswith("obj_") for col in header):
        raise ConfigurationError(f"{path}: expected obj_* columns, got {header}")
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise ConfigurationError(f"{path}:{i}: expected {len(header)} cells")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ConfigurationError(f"{path}:{i}: {exc}") from exc
    return np.array(rows)


def write_convergence_csv(path: str, rows: Iterable[tuple[int, float]]) -> None:
    write_csv(path, ["nfe", "hypervolume"], [[int(n), float(h)] for n, h in rows])


def write_inflow_trace_csv(path: str, flows_m3s: Sequence[float]) -> None:
    """Per-step inflow trace; month_index counts episode steps from 0."""
    write_csv(path, ["month_index", "flow_m3s"],
              [[i, float(f)] for i, f in enumerate(flows_m3s)])


@dataclass
class RunManifest:
    """What produced the files in an output directory.

    Deliberately excludes anything that may differ between runs that must be
    byte-identical (timestamps, worker counts, output paths).
    """

    command: str
    package: str
    version: str
    seed: Optional[int]
    config_source: str
    parameters: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)

    def write(self, out_dir: str) -> str:
        path = os.path.join(out_dir, MANIFEST_NAME)
        payload = asdict(self)
        payload["outputs"] = sorted(payload["outputs"])
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")
        return path


def read_manifest(out_dir: str) -> dict:
    with open(os.path.join(out_dir, MANIFEST_NAME), "r", encoding="utf-8") as handle:
        return json.load(handle)
