"""Runner, sweep, checkpoint and CLI tests at desk scale."""

import json
import math
import os
import struct

import numpy as np
import pytest

from anisomhd import (
    DissipationSpec,
    Grid,
    MhdState,
)
from anisomhd.cli import main as cli_main
from anisomhd.diagnostics import read_diagnostics_csv
from anisomhd.dynamics import BlowUpError
from anisomhd.experiments import (
    InitSpec,
    RunConfig,
    continuous_dependence,
    fit_loglog,
    inviscid_sweep,
    make_initial_data,
    resume,
    run,
    stability_sweep,
    validate_linear_stepping,
)
from anisomhd.snapshots import read_field_snapshot, write_field_snapshot


def base_config(tmp_path=None, **overrides):
    cfg = {
        "grid": Grid(16, 16, 16),
        "dissipation": DissipationSpec(),
        "dt": 1e-3,
        "t_end": 0.02,
        "sample_every": 5,
        "init": InitSpec(seed=11, band=3, epsilon=1e-2),
        "outputs": tmp_path,
    }
    cfg.update(overrides)
    return RunConfig(**cfg)


class TestConfig:
    def test_json_roundtrip(self, tmp_path):
        cfg = base_config()
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        back = RunConfig.from_json(path)
        assert back.grid == cfg.grid
        assert back.dissipation == cfg.dissipation
        assert back.init == cfg.init

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            RunConfig.from_dict(
                {
                    "grid": {"n1": 16, "n2": 16, "n3": 16},
                    "dissipation": {},
                    "dt": 1e-3,
                    "t_end": 0.1,
                    "init": {"seed": 1, "band": 2, "epsilon": 1e-3},
                    "cfl": 0.5,
                }
            )

    def test_unknown_nested_key_rejected(self):
        with pytest.raises(ValueError, match="unknown init keys"):
            RunConfig.from_dict(
                {
                    "grid": {"n1": 16, "n2": 16, "n3": 16},
                    "dt": 1e-3,
                    "t_end": 0.1,
                    "init": {"seed": 1, "band": 2, "epsilon": 1e-3, "amp": 2.0},
                }
            )

    def test_band_beyond_dealias_rejected(self):
        with pytest.raises(ValueError, match="dealias"):
            base_config(init=InitSpec(seed=1, band=6, epsilon=1e-3))


class TestInitialData:
    def test_zero_epsilon_gives_zero_state(self, grid16):
        state = make_initial_data(InitSpec(seed=1, band=2, epsilon=0.0), grid16)
        assert np.max(np.abs(state.u.stack())) == 0.0

    def test_norm_and_divergence(self, grid16):
        from anisomhd.diagnostics import pair_h_norm

        state = make_initial_data(InitSpec(seed=5, band=4, epsilon=3e-3), grid16)
        assert pair_h_norm(state.u, state.b, 3) == pytest.approx(3e-3, rel=1e-12)
        assert state.u.divergence_residual() <= 1e-12
        assert state.b.divergence_residual() <= 1e-12
        mean = max(abs(c.coeffs[0, 0, 0]) for c in state.u.components)
        assert mean == 0.0

    def test_distinct_seeds_differ(self, grid16):
        a = make_initial_data(InitSpec(seed=1, band=3, epsilon=1e-2), grid16)
        b = make_initial_data(InitSpec(seed=2, band=3, epsilon=1e-2), grid16)
        diff = np.max(np.abs(a.u.stack() - b.u.stack()))
        scale = np.max(np.abs(a.u.stack()))
        assert diff >= 0.1 * scale


class TestRun:
    def test_zero_t_end_single_row(self, tmp_path):
        cfg = base_config(tmp_path, t_end=0.0)
        res = run(cfg)
        assert len(res.ledger.times) == 1
        assert res.final_state.t == 0.0

    def test_zero_initial_data_all_zero(self, tmp_path):
        cfg = base_config(tmp_path, init=InitSpec(seed=1, band=2, epsilon=0.0))
        res = run(cfg)
        assert max(res.ledger.h3_sq) == 0.0
        assert res.ledger.energy_series()[-1] == 0.0

    def test_outputs_written(self, tmp_path):
        cfg = base_config(tmp_path)
        res = run(cfg)
        assert (tmp_path / "diagnostics.csv").exists()
        assert (tmp_path / "checkpoint.json").exists()
        assert (tmp_path / "u.field").exists()
        data = read_diagnostics_csv(tmp_path / "diagnostics.csv")
        assert data["time"][-1] == pytest.approx(cfg.t_end)
        assert np.all(np.diff(data["energy_E"]) >= -1e-15)

    def test_restart_equivalence(self, tmp_path):
        # straight-through run vs checkpoint + resume: <= 1e-14
        full_dir = tmp_path / "full"
        part_dir = tmp_path / "part"
        cfg_full = base_config(full_dir, t_end=0.04)
        res_full = run(cfg_full)

        cfg_part = base_config(part_dir, t_end=0.02)
        run(cfg_part)
        res_resumed = resume(part_dir / "checkpoint.json", t_end=0.04)

        a = res_full.final_state
        b = res_resumed.final_state
        scale = max(1.0, np.max(np.abs(a.u.stack())))
        assert np.max(np.abs(a.u.stack() - b.u.stack())) <= 1e-14 * scale
        assert np.max(np.abs(a.b.stack() - b.b.stack())) <= 1e-14 * scale

        da = read_diagnostics_csv(full_dir / "diagnostics.csv")
        db = read_diagnostics_csv(part_dir / "diagnostics.csv")
        assert len(da["time"]) == len(db["time"])
        for col in da:
            ref = np.maximum(1.0, np.abs(da[col]))
            assert np.max(np.abs(da[col] - db[col]) / ref) <= 1e-14

    def test_thread_count_invariance(self, tmp_path):
        results = {}
        for threads in ("1", "2", str(os.cpu_count() or 2)):
            os.environ["AMHD_THREADS"] = threads
            try:
                out = tmp_path / f"t{threads}"
                res = run(base_config(out))
                results[threads] = (
                    res.final_state.u.stack().copy(),
                    np.array(res.ledger.h3_sq),
                )
            finally:
                os.environ.pop("AMHD_THREADS", None)
        base_u, base_h3 = results["1"]
        for threads, (u, h3) in results.items():
            assert np.array_equal(u, base_u), f"threads={threads}"
            assert np.array_equal(h3, base_h3), f"threads={threads}"

    def test_blowup_writes_record(self, tmp_path):
        cfg = base_config(
            tmp_path,
            dt=0.5,
            t_end=25.0,
            sample_every=50,
            init=InitSpec(seed=3, band=3, epsilon=1e6),
        )
        with pytest.warns(RuntimeWarning, match="CFL"):
            with pytest.raises(BlowUpError):
                run(cfg)
        record = json.loads((tmp_path / "blowup.json").read_text())
        assert record["time"] > 0
        assert "max_amplitude" in record


class TestSweeps:
    def test_stability_sweep_quadratic_scaling(self, tmp_path):
        cfg = base_config(None, t_end=0.1, sample_every=10)
        res = stability_sweep(cfg, [0.0, 1e-3, 2e-3])
        assert res.passed
        zero, lo, hi = res.summaries
        assert zero["sup_over_eps_sq"] == 0.0
        ratio = hi["sup_energy"] / lo["sup_energy"]
        assert ratio == pytest.approx(4.0, rel=0.2)
        assert lo["bounded"] and hi["bounded"]

    def test_inviscid_duplicated_nu_identical(self):
        cfg = base_config(None, t_end=0.05, sample_every=10)
        res = inviscid_sweep(cfg, [3e-2, 3e-2, 1e-2])
        assert res.sup_diff_h1[0] == res.sup_diff_h1[1]

    def test_inviscid_zero_data_degenerate(self):
        cfg = base_config(None, t_end=0.05, init=InitSpec(seed=1, band=2, epsilon=0.0))
        res = inviscid_sweep(cfg, [1e-1, 3e-2, 1e-2])
        assert not res.passed
        assert res.slope is None

    def test_inviscid_rate_near_one_small(self, tmp_path):
        cfg = base_config(tmp_path, t_end=0.1, sample_every=10)
        res = inviscid_sweep(cfg, [1e-1, 3e-2, 1e-2, 3e-3])
        assert res.slope == pytest.approx(1.0, abs=0.2)
        payload = json.loads((tmp_path / "sweep_inviscid.json").read_text())
        assert set(payload) == {"param", "sup_diff_h1", "slope", "intercept", "residual"}

    def test_continuous_dependence_zero_delta(self):
        cfg = base_config(None, t_end=0.02)
        rep = continuous_dependence(cfg, 0.0)
        assert rep["sup_diff_h1"] == 0.0
        assert rep["bounded"]

    def test_continuous_dependence_linear_response(self):
        cfg = base_config(None, t_end=0.05, sample_every=10)
        r1 = continuous_dependence(cfg, 1e-5)
        r2 = continuous_dependence(cfg, 5e-6)
        assert r1["bounded"] and r2["bounded"]
        assert r1["sup_diff_h1"] / r2["sup_diff_h1"] == pytest.approx(2.0, rel=0.1)

    def test_continuous_dependence_bounded_for_both_sigma(self):
        for sigma in (0, 1):
            cfg = base_config(
                None, t_end=0.05, sample_every=10, dissipation=DissipationSpec(sigma=sigma)
            )
            rep = continuous_dependence(cfg, 1e-5)
            assert rep["bounded"], f"sigma={sigma}"

    def test_stability_sweep_marks_blowup(self, tmp_path):
        cfg = base_config(
            tmp_path, dt=0.5, t_end=25.0, sample_every=50,
            init=InitSpec(seed=3, band=3, epsilon=1.0),
        )
        with pytest.warns(RuntimeWarning, match="CFL"):
            res = stability_sweep(cfg, [1.0, 1e6])
        assert not res.passed
        assert "blow-up" in res.notes
        assert any(s.get("blowup") for s in res.summaries)

    def test_fit_loglog_exact_line(self):
        slope, intercept, resid = fit_loglog([1e-1, 1e-2, 1e-3], [1e-1, 1e-2, 1e-3])
        assert slope == pytest.approx(1.0, abs=1e-12)
        assert resid == pytest.approx(0.0, abs=1e-12)

    def test_fit_loglog_needs_three_points(self):
        with pytest.raises(ValueError):
            fit_loglog([1e-1, 1e-2], [1e-1, 1e-2])


class TestLinearValidation:
    def test_max_error_within_tolerance(self):
        rep = validate_linear_stepping(n_modes=20, dt=1e-3, t_total=0.25, seed=5)
        assert rep["max_error"] <= 1e-8

    def test_tiny_amplitude_run_matches_linear_oracle_per_mode(self):
        # at eps=1e-6 the dynamics are linear to ~1e-7 relative
        from anisomhd.dynamics import linear_mode_oracle
        from anisomhd.spectral import integer_wavenumbers

        grid = Grid(16, 16, 16)
        eps = 1e-6
        cfg = base_config(None, t_end=0.05, init=InitSpec(seed=9, band=2, epsilon=eps))
        res = run(cfg)
        u0 = make_initial_data(cfg.init, grid).u.stack()
        b0 = make_initial_data(cfg.init, grid).b.stack()
        uT, bT = res.final_state.u.stack(), res.final_state.b.stack()
        kints = integer_wavenumbers(16)
        worst = 0.0
        scale = np.max(np.abs(np.concatenate([u0, b0])))
        for i1 in range(-2, 3):
            for i2 in range(-2, 3):
                for i3 in range(-2, 3):
                    if (i1, i2, i3) == (0, 0, 0):
                        continue
                    idx = (i1 % 16, i2 % 16, i3 % 16)
                    y0 = np.array([u0[c][idx] for c in range(3)] + [b0[c][idx] for c in range(3)])
                    if np.max(np.abs(y0)) < 1e-3 * scale * eps:
                        continue
                    kv = np.array([kints[idx[0]], kints[idx[1]], kints[idx[2]]], dtype=float)
                    y_lin = linear_mode_oracle(DissipationSpec(), kv, y0, 0.05)
                    y_num = np.array(
                        [uT[c][idx] for c in range(3)] + [bT[c][idx] for c in range(3)]
                    )
                    worst = max(worst, float(np.max(np.abs(y_num - y_lin))) / scale)
        assert worst <= 1e-6


class TestBootstrapStability:
    def test_c_estimate_stable_under_dt_halving(self):
        from anisomhd.diagnostics import bootstrap_ratio

        estimates = []
        for dt in (1e-3, 5e-4):
            cfg = base_config(
                None, dt=dt, t_end=0.2, sample_every=20,
                init=InitSpec(seed=13, band=3, epsilon=1e-3),
            )
            res = run(cfg)
            estimates.append(bootstrap_ratio(res.ledger, 0.2).c_est)
        assert estimates[0] > 0 and estimates[1] > 0
        ratio = estimates[0] / estimates[1]
        assert 0.5 <= ratio <= 2.0


class TestSnapshots:
    def test_layout_is_little_endian_x3_fastest(self, tmp_path, grid16):
        i, j, k = np.meshgrid(*(np.arange(16),) * 3, indexing="ij")
        values = (i * 10000 + j * 100 + k).astype(float)
        path = tmp_path / "one.field"
        write_field_snapshot(path, grid16, values[None], time=0.75)
        raw = path.read_bytes()
        magic, n1, n2, n3, ncomp, t = struct.unpack("<5s4Id", raw[: 5 + 16 + 8])
        assert magic == b"AMHD1"
        assert (n1, n2, n3, ncomp) == (16, 16, 16, 1)
        assert t == 0.75
        header = 5 + 16 + 8
        # x3 fastest: flat offset (i*n2 + j)*n3 + k
        for idx in ((0, 0, 1), (0, 1, 0), (2, 3, 4)):
            off = header + ((idx[0] * 16 + idx[1]) * 16 + idx[2]) * 8
            (val,) = struct.unpack("<d", raw[off : off + 8])
            assert val == values[idx]

    def test_roundtrip(self, tmp_path, grid16):
        rng = np.random.default_rng(0)
        comps = rng.standard_normal((3,) + grid16.shape)
        path = tmp_path / "v.field"
        write_field_snapshot(path, grid16, comps, time=1.5)
        dims, t, data = read_field_snapshot(path)
        assert dims == grid16.shape and t == 1.5
        assert np.array_equal(data, comps)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.field"
        path.write_bytes(b"NOPE!" + b"\x00" * 64)
        with pytest.raises(ValueError, match="magic"):
            read_field_snapshot(path)


class TestCli:
    def test_run_resume_report(self, tmp_path, capsys):
        cfg = base_config().to_dict()
        cfg["outputs"] = str(tmp_path / "out")
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert cli_main(["run", str(cfg_path)]) == 0
        assert cli_main(["resume", str(tmp_path / "out" / "checkpoint.json"), "--t-end", "0.04"]) == 0
        assert cli_main(["report", str(tmp_path / "out")]) == 0
        out = capsys.readouterr().out
        assert "diagnostics" in out

    def test_verify_inequalities_cli(self, tmp_path):
        out = tmp_path / "ineq.json"
        code = cli_main(
            ["verify-inequalities", "--trials", "10", "--seed", "3", "--grid", "16", "--out", str(out)]
        )
        assert code == 0
        assert out.exists()

    def test_linear_validate_cli(self):
        assert cli_main(["linear-validate", "--modes", "10", "--t-end", "0.1"]) == 0

    def test_report_empty_dir_fails(self, tmp_path):
        assert cli_main(["report", str(tmp_path)]) == 1
