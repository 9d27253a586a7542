"""Batch figure generation for simulation diagnostics and sweep files."""

from .figures import (
    FIGURE_KINDS,
    FigureSpec,
    plot_convergence,
    plot_dissipation_budget,
    plot_energy_history,
    plot_inequality_ratios,
    refit_slope,
    render,
)
from .schemas import SchemaMismatch, load_diagnostics, load_inequality_report, load_sweep

__version__ = "0.1.0"
