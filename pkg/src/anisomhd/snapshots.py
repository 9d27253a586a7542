"""Binary field snapshots and run checkpoints.

Snapshot layout (little-endian):

    magic "AMHD1" | u32 n1 | u32 n2 | u32 n3 | u32 ncomp | f64 time
    then ncomp blocks of n1*n2*n3 float64 physical samples, row-major with
    the third axis fastest.

A checkpoint is two snapshots (u, b) plus a JSON sidecar holding the
dissipation parameters, run configuration, step counter, seed and the
accumulated energy-ledger sums needed to continue a run exactly.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dissipation import DissipationSpec
from .dynamics import MhdState
from .spectral import Grid, VectorField

__all__ = [
    "MAGIC",
    "write_field_snapshot",
    "read_field_snapshot",
    "Checkpoint",
    "write_checkpoint",
    "read_checkpoint",
]

MAGIC = b"AMHD1"
_HEADER = struct.Struct("<5s4Id")  # magic, n1, n2, n3, ncomp, time


def write_field_snapshot(path, grid: Grid, components: np.ndarray, time: float) -> None:
    components = np.asarray(components, dtype="<f8")
    if components.ndim == 3:
        components = components[None]
    if components.shape[1:] != grid.shape:
        raise ValueError(f"component shape {components.shape[1:]} does not match grid {grid.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, grid.n1, grid.n2, grid.n3, components.shape[0], time))
        fh.write(np.ascontiguousarray(components).tobytes())


def read_field_snapshot(path) -> tuple[tuple[int, int, int], float, np.ndarray]:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        magic, n1, n2, n3, ncomp, time = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        payload = fh.read(ncomp * n1 * n2 * n3 * 8)
    data = np.frombuffer(payload, dtype="<f8").reshape(ncomp, n1, n2, n3).copy()
    return (n1, n2, n3), time, data


@dataclass
class Checkpoint:
    state: MhdState
    spec: DissipationSpec
    config: dict
    step: int
    seed: int
    trapezoid_diss: tuple[float, float, float]
    exact_diss: tuple[float, float, float]
    sup_h3_sq: float
    energy_e0: float
    last_row: dict
    directory: Path


def write_checkpoint(
    directory,
    state: MhdState,
    spec: DissipationSpec,
    config: dict,
    step: int,
    seed: int,
    trapezoid_diss,
    exact_diss,
    sup_h3_sq: float,
    energy_e0: float,
    last_row: dict,
) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    g = state.grid
    write_field_snapshot(directory / "u.field", g, state.u.to_physical(), state.t)
    write_field_snapshot(directory / "b.field", g, state.b.to_physical(), state.t)
    sidecar = {
        "format": "anisomhd-checkpoint-1",
        "files": {"u": "u.field", "b": "b.field"},
        "time": state.t,
        "step": step,
        "seed": seed,
        "grid": {"n1": g.n1, "n2": g.n2, "n3": g.n3, "length": g.length},
        "dissipation": {
            "alpha": spec.alpha,
            "beta": spec.beta,
            "nu1": spec.nu1,
            "nu2": spec.nu2,
            "nu3": spec.nu3,
            "sigma": spec.sigma,
            "mu": spec.mu,
        },
        "config": config,
        "ledger_sums": {
            "trapezoid_diss": list(trapezoid_diss),
            "exact_diss": list(exact_diss),
            "sup_h3_sq": sup_h3_sq,
            "energy_e0": energy_e0,
            "last_row": last_row,
        },
    }
    path = directory / "checkpoint.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")
    return path


def read_checkpoint(path) -> Checkpoint:
    path = Path(path)
    if path.is_dir():
        path = path / "checkpoint.json"
    with open(path, "r", encoding="utf-8") as fh:
        sidecar = json.load(fh)
    if sidecar.get("format") != "anisomhd-checkpoint-1":
        raise ValueError(f"{path}: not an anisomhd checkpoint")
    gd = sidecar["grid"]
    grid = Grid(gd["n1"], gd["n2"], gd["n3"], gd.get("length", 2.0 * np.pi))
    directory = path.parent
    dims_u, t_u, data_u = read_field_snapshot(directory / sidecar["files"]["u"])
    dims_b, t_b, data_b = read_field_snapshot(directory / sidecar["files"]["b"])
    if dims_u != grid.shape or dims_b != grid.shape:
        raise ValueError("snapshot dimensions disagree with sidecar grid")
    state = MhdState(
        VectorField.from_physical(grid, data_u),
        VectorField.from_physical(grid, data_b),
        t_u,
    )
    spec = DissipationSpec(**sidecar["dissipation"])
    sums = sidecar["ledger_sums"]
    return Checkpoint(
        state=state,
        spec=spec,
        config=sidecar["config"],
        step=sidecar["step"],
        seed=sidecar["seed"],
        trapezoid_diss=tuple(sums["trapezoid_diss"]),
        exact_diss=tuple(sums["exact_diss"]),
        sup_h3_sq=sums["sup_h3_sq"],
        energy_e0=sums["energy_e0"],
        last_row=sums["last_row"],
        directory=directory,
    )
