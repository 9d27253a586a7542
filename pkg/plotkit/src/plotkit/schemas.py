"""File-format contracts consumed by the figure builders.

plotkit talks to the simulation side only through files on disk; these
loaders validate the layouts exactly and fail with a field-level diff so a
schema drift is caught at the boundary, not inside matplotlib.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

DIAGNOSTICS_COLUMNS = (
    "time",
    "h3_sq_u",
    "h3_sq_b",
    "h1_sq_u",
    "h1_sq_b",
    "horiz_diss",
    "vert_diss",
    "mag_diss",
    "energy_E",
    "div_residual_u",
    "div_residual_b",
    "c_bootstrap",
)

SWEEP_KEYS = {"param", "sup_diff_h1", "slope", "intercept", "residual"}

INEQUALITY_KEYS = {"name", "trials", "max_ratio", "violations", "tolerance"}


class SchemaMismatch(ValueError):
    """Input file does not match the documented layout."""


def _diff(expected, got) -> str:
    missing = sorted(set(expected) - set(got))
    extra = sorted(set(got) - set(expected))
    parts = []
    if missing:
        parts.append(f"missing: {missing}")
    if extra:
        parts.append(f"unexpected: {extra}")
    return "; ".join(parts) or "field order differs"


def load_diagnostics(path) -> dict[str, np.ndarray]:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        header = tuple(fh.readline().strip().split(","))
        if header != DIAGNOSTICS_COLUMNS:
            raise SchemaMismatch(f"{path}: diagnostics header mismatch ({_diff(DIAGNOSTICS_COLUMNS, header)})")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        raise SchemaMismatch(f"{path}: no data rows")
    if data.shape[1] != len(DIAGNOSTICS_COLUMNS):
        raise SchemaMismatch(f"{path}: expected {len(DIAGNOSTICS_COLUMNS)} columns, got {data.shape[1]}")
    return {name: data[:, i] for i, name in enumerate(DIAGNOSTICS_COLUMNS)}


def load_sweep(path) -> dict:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict) or set(payload) != SWEEP_KEYS:
        got = sorted(payload) if isinstance(payload, dict) else type(payload).__name__
        raise SchemaMismatch(f"{path}: sweep keys mismatch ({_diff(SWEEP_KEYS, got)})")
    params = [float(v) for v in payload["param"]]
    diffs = [float(v) for v in payload["sup_diff_h1"]]
    if len(params) != len(diffs):
        raise SchemaMismatch(f"{path}: param and sup_diff_h1 lengths differ")
    if len(params) < 3:
        raise ValueError(f"{path}: need at least 3 sweep points, got {len(params)}")
    if len(set(params)) != len(params):
        raise ValueError(f"{path}: duplicated sweep parameter values are not plottable")
    if payload["slope"] is None:
        raise ValueError(f"{path}: sweep carries no fitted slope")
    return payload


def load_inequality_report(path) -> list[dict]:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, list) or not payload:
        raise SchemaMismatch(f"{path}: expected a non-empty JSON array of reports")
    for entry in payload:
        if not isinstance(entry, dict) or not INEQUALITY_KEYS <= set(entry):
            got = sorted(entry) if isinstance(entry, dict) else type(entry).__name__
            raise SchemaMismatch(f"{path}: report entry mismatch ({_diff(INEQUALITY_KEYS, got)})")
    return payload
