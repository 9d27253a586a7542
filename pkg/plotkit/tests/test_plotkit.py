"""plotkit figure and CLI tests, driven by synthetic files in the documented formats."""

import json
from pathlib import Path

import numpy as np
import pytest

from plotkit import (
    SchemaMismatch,
    load_diagnostics,
    plot_convergence,
    plot_energy_history,
    refit_slope,
)
from plotkit.cli import main as cli_main
from plotkit.figures import _marker_style
from plotkit.schemas import DIAGNOSTICS_COLUMNS

COLS = DIAGNOSTICS_COLUMNS


def write_csv(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(COLS) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def decaying_rows(n=20, dt=0.05):
    rows = []
    acc = 0.0
    for i in range(n):
        t = i * dt
        h3 = np.exp(-2 * t)
        acc = 1.0 - np.exp(-2 * t)
        rows.append(
            (t, 0.6 * h3, 0.4 * h3, 0.3 * h3, 0.2 * h3, 0.5 * acc, 0.2 * acc, 0.3 * acc, h3 + acc, 1e-16, 1e-16, 0.01)
        )
    return rows


def sweep_payload(params, slope_noise=0.0):
    params = np.asarray(params, dtype=float)
    diffs = 0.37 * params**1.0 * (1 + slope_noise * np.sin(np.arange(len(params))))
    slope, intercept = refit_slope(params, diffs)
    return {
        "param": list(params),
        "sup_diff_h1": list(diffs),
        "slope": slope,
        "intercept": intercept,
        "residual": 0.0,
    }


class TestConvergence:
    def test_exact_slope_one_annotation(self, tmp_path):
        payload = {
            "param": [1e-1, 1e-2, 1e-3],
            "sup_diff_h1": [1e-1, 1e-2, 1e-3],
            "slope": 1.0,
            "intercept": 0.0,
            "residual": 0.0,
        }
        src = tmp_path / "sweep.json"
        src.write_text(json.dumps(payload))
        out = tmp_path / "conv.png"
        annotation = plot_convergence(src, out)
        assert annotation == "slope = 1.000000"
        assert out.exists() and out.stat().st_size > 0

    def test_refit_matches_embedded(self, tmp_path):
        src = tmp_path / "sweep.json"
        src.write_text(json.dumps(sweep_payload([1e-1, 3e-2, 1e-2, 3e-3], slope_noise=0.05)))
        out = tmp_path / "conv.png"
        annotation = plot_convergence(src, out)
        embedded = json.loads(src.read_text())["slope"]
        refit = float(annotation.split("=")[1])
        assert abs(refit - embedded) <= 1e-6

    def test_runner_produced_sweep_refit(self, tmp_path):
        # real sweep summary emitted by the simulation runner
        src = Path(__file__).parent / "data" / "sweep_inviscid.json"
        out = tmp_path / "conv.png"
        annotation = plot_convergence(src, out)
        embedded = json.loads(src.read_text())["slope"]
        refit = float(annotation.split("=")[1])
        assert abs(refit - embedded) <= 1e-6
        assert out.exists() and out.stat().st_size > 0

    def test_embedded_slope_disagreement_rejected(self, tmp_path):
        payload = sweep_payload([1e-1, 1e-2, 1e-3])
        payload["slope"] = payload["slope"] + 0.5
        src = tmp_path / "sweep.json"
        src.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="disagrees"):
            plot_convergence(src, tmp_path / "x.png")

    def test_duplicated_params_rejected(self, tmp_path):
        payload = sweep_payload([1e-1, 1e-2, 1e-3])
        payload["param"][1] = payload["param"][0]
        src = tmp_path / "sweep.json"
        src.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="duplicated"):
            plot_convergence(src, tmp_path / "x.png")

    def test_fewer_than_three_points_rejected(self, tmp_path):
        payload = {
            "param": [1e-1, 1e-2],
            "sup_diff_h1": [1e-1, 1e-2],
            "slope": 1.0,
            "intercept": 0.0,
            "residual": 0.0,
        }
        src = tmp_path / "sweep.json"
        src.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="at least 3"):
            plot_convergence(src, tmp_path / "x.png")

    def test_missing_keys_schema_mismatch(self, tmp_path):
        src = tmp_path / "sweep.json"
        src.write_text(json.dumps({"param": [1, 2, 3]}))
        with pytest.raises(SchemaMismatch, match="missing"):
            plot_convergence(src, tmp_path / "x.png")


class TestEnergyHistory:
    def test_zero_run_renders(self, tmp_path):
        rows = [(i * 0.1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0) for i in range(5)]
        src = tmp_path / "diag.csv"
        write_csv(src, rows)
        out = tmp_path / "zero.png"
        annotation = plot_energy_history(src, out)
        assert out.exists() and out.stat().st_size > 0
        assert annotation == "max E = 0.000000000000e+00"

    def test_single_row_uses_markers(self, tmp_path):
        assert _marker_style(1) == {"marker": "o", "linestyle": "none"}
        assert _marker_style(5)["linestyle"] == "-"
        src = tmp_path / "diag.csv"
        write_csv(src, decaying_rows(n=1))
        out = tmp_path / "one.svg"
        plot_energy_history(src, out)
        assert out.exists() and out.stat().st_size > 0

    def test_annotation_equals_recomputed_max(self, tmp_path):
        src = tmp_path / "diag.csv"
        write_csv(src, decaying_rows())
        out = tmp_path / "hist.png"
        annotation = plot_energy_history(src, out)
        rendered_max = float(annotation.split("=")[1])
        csv_max = float(np.max(load_diagnostics(src)["energy_E"]))
        assert abs(rendered_max - csv_max) <= 1e-12 * max(1.0, csv_max)

    def test_rerun_is_byte_identical_and_input_untouched(self, tmp_path):
        src = tmp_path / "diag.csv"
        write_csv(src, decaying_rows())
        before = src.read_bytes()
        a1 = plot_energy_history(src, tmp_path / "a.png")
        a2 = plot_energy_history(src, tmp_path / "b.png")
        assert a1.encode() == a2.encode()
        assert src.read_bytes() == before

    def test_missing_column_schema_mismatch(self, tmp_path):
        src = tmp_path / "bad.csv"
        src.write_text("time,h3_sq_u\n0,1\n")
        with pytest.raises(SchemaMismatch, match="missing"):
            plot_energy_history(src, tmp_path / "x.png")


class TestCli:
    def test_happy_path(self, tmp_path, capsys):
        src = tmp_path / "diag.csv"
        write_csv(src, decaying_rows())
        out = tmp_path / "fig.png"
        assert cli_main(["energy-history", str(src), "-o", str(out)]) == 0
        assert out.exists()
        assert "max E" in capsys.readouterr().out

    def test_schema_mismatch_exits_two(self, tmp_path, capsys):
        src = tmp_path / "bad.csv"
        src.write_text("nope\n1\n")
        code = cli_main(["energy-history", str(src), "-o", str(tmp_path / "x.png")])
        assert code == 2
        assert "schema mismatch" in capsys.readouterr().err

    def test_dissipation_budget_and_ratios(self, tmp_path):
        src = tmp_path / "diag.csv"
        write_csv(src, decaying_rows())
        assert cli_main(["dissipation-budget", str(src), "-o", str(tmp_path / "d.png")]) == 0
        rep = tmp_path / "ineq.json"
        rep.write_text(
            json.dumps(
                [
                    {"name": "derivative-exchange", "trials": 10, "max_ratio": 1.0, "violations": 0, "tolerance": 1e-12},
                    {"name": "triple-product-reconstructed-sym", "trials": 10, "max_ratio": 0.4, "violations": 0, "tolerance": None},
                ]
            )
        )
        assert cli_main(["inequality-ratios", str(rep), "-o", str(tmp_path / "r.png")]) == 0
