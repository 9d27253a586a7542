"""Figure builders for simulation diagnostics and sweep outputs.

Each builder reads one documented file format, draws a single figure and
returns the annotation text it rendered, so callers (and tests) can verify
the numbers on the plot against the data without parsing the image.  Inputs
are never modified; rendering the same input twice produces byte-identical
annotation text.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import load_diagnostics, load_inequality_report, load_sweep

FIGURE_KINDS = ("energy-history", "dissipation-budget", "convergence", "inequality-ratios")


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input_path: Path
    output_path: Path
    title: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; known: {FIGURE_KINDS}")


def _marker_style(n_points: int) -> dict:
    # single samples get markers with no interpolating line
    if n_points < 2:
        return {"marker": "o", "linestyle": "none"}
    return {"marker": "", "linestyle": "-"}


def plot_energy_history(csv_path, out_path, title=None) -> str:
    data = load_diagnostics(csv_path)
    t = data["time"]
    h3 = data["h3_sq_u"] + data["h3_sq_b"]
    energy = np.maximum.accumulate(data["energy_E"])
    style = _marker_style(len(t))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(t, h3, label=r"$\|(u,b)\|_{H^3}^2$", **style)
    ax.plot(t, energy, label="energy functional E(t)", **style)
    ax.plot(t, data["horiz_diss"], label="horizontal dissipation", **style)
    ax.plot(t, data["vert_diss"], label="vertical dissipation", **style)
    ax.plot(t, data["mag_diss"], label="magnetic dissipation", **style)
    ax.set_xlabel("time")
    ax.set_ylabel("energy")
    ax.set_title(title or "energy history")
    ax.legend(loc="best", fontsize=8)
    annotation = f"max E = {float(np.max(energy)):.12e}"
    ax.annotate(annotation, xy=(0.02, 0.02), xycoords="axes fraction", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return annotation


def plot_dissipation_budget(csv_path, out_path, title=None) -> str:
    data = load_diagnostics(csv_path)
    t = data["time"]
    parts = [data["horiz_diss"], data["vert_diss"], data["mag_diss"]]
    labels = ["horizontal", "vertical", "magnetic"]
    style = _marker_style(len(t))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    total = parts[0] + parts[1] + parts[2]
    for series, label in zip(parts, labels):
        ax.plot(t, series, label=label, **style)
    ax.plot(t, total, label="total", color="black", **style)
    ax.set_xlabel("time")
    ax.set_ylabel("accumulated dissipation")
    ax.set_title(title or "dissipation budget")
    ax.legend(loc="best", fontsize=8)
    annotation = f"final total = {float(total[-1]):.12e}"
    ax.annotate(annotation, xy=(0.02, 0.02), xycoords="axes fraction", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return annotation


def refit_slope(params, diffs) -> tuple[float, float]:
    lx = np.log10(np.asarray(params, dtype=float))
    ly = np.log10(np.asarray(diffs, dtype=float))
    mat = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, *_ = np.linalg.lstsq(mat, ly, rcond=None)
    return float(coef[0]), float(coef[1])


def plot_convergence(sweep_path, out_path, title=None, slope_tol: float = 1e-6) -> str:
    payload = load_sweep(sweep_path)
    params = np.asarray(payload["param"], dtype=float)
    diffs = np.asarray(payload["sup_diff_h1"], dtype=float)
    if np.any(params <= 0) or np.any(diffs <= 0):
        raise ValueError(f"{sweep_path}: log-log plot needs positive data")

    slope, intercept = refit_slope(params, diffs)
    embedded = float(payload["slope"])
    if abs(slope - embedded) > slope_tol:
        raise ValueError(
            f"{sweep_path}: refit slope {slope:.8f} disagrees with embedded {embedded:.8f}"
        )

    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(params, diffs, "o", label="measured")
    xs = np.array([params.min(), params.max()])
    ax.loglog(xs, 10**intercept * xs**slope, "-", label="fit")
    ax.set_xlabel("parameter")
    ax.set_ylabel(r"sup$_t$ $\|$difference$\|_{H^1}$")
    ax.set_title(title or "convergence rate")
    ax.legend(loc="best", fontsize=8)
    annotation = f"slope = {slope:.6f}"
    ax.annotate(annotation, xy=(0.05, 0.9), xycoords="axes fraction")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return annotation


def plot_inequality_ratios(report_path, out_path, title=None) -> str:
    reports = load_inequality_report(report_path)
    names = [r["name"] for r in reports]
    ratios = [float(r["max_ratio"]) for r in reports]
    violations = sum(int(r["violations"]) for r in reports)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.barh(names, ratios)
    ax.set_xlabel("max empirical ratio")
    ax.set_title(title or "inequality check ratios")
    annotation = f"total violations = {violations}"
    ax.annotate(annotation, xy=(0.55, 0.05), xycoords="axes fraction")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return annotation


_BUILDERS = {
    "energy-history": plot_energy_history,
    "dissipation-budget": plot_dissipation_budget,
    "convergence": plot_convergence,
    "inequality-ratios": plot_inequality_ratios,
}


def render(spec: FigureSpec) -> str:
    builder = _BUILDERS[spec.kind]
    return builder(spec.input_path, spec.output_path, title=spec.title)
