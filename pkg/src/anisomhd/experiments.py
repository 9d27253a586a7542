"""Experiment orchestration: runs, sweeps and validation experiments.

A run is specified by a single JSON document (unknown keys are rejected so a
typo fails fast, not silently).  All difference-based experiments share the
grid, time step, dealiasing and seeds across their member runs, so the
measured gap isolates the parameter under study:

* the stability sweep scales the initial amplitude and watches the energy
  functional stay bounded by a multiple of its initial value;
* the vertical-viscosity sweep runs the sigma=1 family against the sigma=0
  reference with identical initial data and fits the log-log rate of the
  H1 difference, which should be close to 1;
* the continuous-dependence experiment perturbs the initial data by a small
  solenoidal field and checks the response stays proportional.

The linear validation drives the grid stepper with advection disabled and
compares every seeded mode against the exact matrix-exponential solution.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .diagnostics import (
    DIAGNOSTICS_COLUMNS,
    EnergyLedger,
    accumulate,
    pair_h_norm,
)
from .dissipation import DissipationSpec
from .dynamics import (
    BlowUpError,
    MhdState,
    Stepper,
    half_to_state,
    linear_mode_oracle,
    state_to_half,
)
from .randfields import RandomFieldSpec, generate_field
from .snapshots import read_checkpoint, write_checkpoint
from .spectral import Grid, VectorField, leray_project

__all__ = [
    "InitSpec",
    "RunConfig",
    "RunResult",
    "SweepResult",
    "make_initial_data",
    "run",
    "resume",
    "stability_sweep",
    "inviscid_sweep",
    "continuous_dependence",
    "validate_linear_stepping",
    "fit_loglog",
]

_PERTURBATION_SEED_OFFSET = 104729


def _reject_unknown(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown {where} keys: {sorted(unknown)}")


@dataclass(frozen=True)
class InitSpec:
    """Seeded band-limited solenoidal initial data scaled to a target size."""

    seed: int
    band: int
    epsilon: float
    amplitude_decay: float = 1.5

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.band < 1:
            raise ValueError("band must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    grid: Grid
    dissipation: DissipationSpec
    dt: float
    t_end: float
    sample_every: int
    init: InitSpec
    outputs: Path | None = None

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        if self.init.band > min(self.grid.dealias_band):
            raise ValueError(
                f"init band {self.init.band} exceeds dealias band {min(self.grid.dealias_band)}"
            )

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        _reject_unknown(
            d, {"grid", "dissipation", "dt", "t_end", "sample_every", "init", "outputs"}, "config"
        )
        gd = dict(d["grid"])
        _reject_unknown(gd, {"n1", "n2", "n3", "length"}, "grid")
        sd = dict(d.get("dissipation", {}))
        _reject_unknown(
            sd,
            {"alpha", "beta", "nu1", "nu2", "nu3", "sigma", "mu", "allow_out_of_range"},
            "dissipation",
        )
        idd = dict(d["init"])
        _reject_unknown(idd, {"seed", "band", "epsilon", "amplitude_decay"}, "init")
        outputs = d.get("outputs")
        return cls(
            grid=Grid(**gd),
            dissipation=DissipationSpec(**sd),
            dt=float(d["dt"]),
            t_end=float(d["t_end"]),
            sample_every=int(d.get("sample_every", 1)),
            init=InitSpec(**idd),
            outputs=Path(outputs) if outputs else None,
        )

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d = {
            "grid": {"n1": self.grid.n1, "n2": self.grid.n2, "n3": self.grid.n3, "length": self.grid.length},
            "dissipation": {
                "alpha": self.dissipation.alpha,
                "beta": self.dissipation.beta,
                "nu1": self.dissipation.nu1,
                "nu2": self.dissipation.nu2,
                "nu3": self.dissipation.nu3,
                "sigma": self.dissipation.sigma,
                "mu": self.dissipation.mu,
            },
            "dt": self.dt,
            "t_end": self.t_end,
            "sample_every": self.sample_every,
            "init": asdict(self.init),
        }
        if self.outputs is not None:
            d["outputs"] = str(self.outputs)
        return d


def make_initial_data(init: InitSpec, grid: Grid) -> MhdState:
    """Seeded solenoidal mean-zero (u, b) with pair H3 norm exactly epsilon."""
    if init.epsilon == 0.0:
        return MhdState.zeros(grid)
    rng = np.random.default_rng(init.seed)
    seeds = rng.integers(0, 2**63 - 1, size=6)
    fields = [
        generate_field(RandomFieldSpec(grid, init.band, int(s), init.amplitude_decay))
        for s in seeds
    ]
    u = leray_project(VectorField(tuple(fields[:3])))
    b = leray_project(VectorField(tuple(fields[3:])))
    norm = pair_h_norm(u, b, 3)
    if norm == 0.0:
        raise ValueError("degenerate initial draw: zero field after projection")
    scale = init.epsilon / norm
    for c in (*u.components, *b.components):
        c.coeffs *= scale
    return MhdState(u, b, 0.0)


def _solenoidal_perturbation(grid: Grid, seed: int, band: int, delta: float, decay: float):
    """Divergence-free pair (du, db) with pair H1 norm delta."""
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**63 - 1, size=6)
    fields = [
        generate_field(RandomFieldSpec(grid, band, int(s), decay)) for s in seeds
    ]
    du = leray_project(VectorField(tuple(fields[:3])))
    db = leray_project(VectorField(tuple(fields[3:])))
    norm = pair_h_norm(du, db, 1)
    scale = 0.0 if delta == 0.0 else delta / norm
    for c in (*du.components, *db.components):
        c.coeffs *= scale
    return du, db


# ---------------------------------------------------------------------------
# Core advance loop shared by run/resume and the sweeps.


def _advance(stepper: Stepper, uh, bh, t0: float, diss, n_steps: int, sample_every: int,
             global_step0: int, on_sample) -> tuple[np.ndarray, np.ndarray, float, np.ndarray]:
    dt = stepper.dt
    for local in range(1, n_steps + 1):
        gs = global_step0 + local
        sampling = gs % sample_every == 0 or local == n_steps
        uh, bh, _, diss = stepper.step(
            uh, bh, t0 + (local - 1) * dt, diss, check_cfl=(local == 1 or sampling)
        )
        if sampling:
            on_sample(gs, t0 + local * dt, uh, bh, diss)
    return uh, bh, t0 + n_steps * dt, diss


def _steps_for(t_span: float, dt: float) -> int:
    n = int(round(t_span / dt))
    if abs(n * dt - t_span) > 1e-9 * max(1.0, abs(t_span)):
        raise ValueError(f"t_end span {t_span} is not a whole number of steps of dt={dt}")
    return n


@dataclass
class RunResult:
    config: RunConfig
    ledger: EnergyLedger
    final_state: MhdState
    exact_diss: tuple[float, float, float]
    csv_path: Path | None = None
    checkpoint_path: Path | None = None


class _LedgerRecorder:
    """Accumulates the ledger and (optionally) streams diagnostics CSV rows."""

    def __init__(self, spec: DissipationSpec, csv_path: Path | None, append: bool = False,
                 sup_seed: float = 0.0, e0: float | None = None):
        self.spec = spec
        self.ledger = EnergyLedger(sup_seed=sup_seed, e0_override=e0)
        self.csv_path = csv_path
        self._fh = None
        if csv_path is not None:
            csv_path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(csv_path, "a" if append else "w", encoding="utf-8")
            if not append:
                self._fh.write(",".join(DIAGNOSTICS_COLUMNS) + "\n")

    def record(self, state: MhdState, dt_gap: float, diss) -> None:
        accumulate(self.ledger, state, self.spec, dt_gap, exact_diss=tuple(diss))
        if self._fh is not None:
            led = self.ledger
            i = len(led.times) - 1
            row = (
                led.times[i], led.h3_sq_u[i], led.h3_sq_b[i], led.h1_sq_u[i], led.h1_sq_b[i],
                led.horiz_diss[i], led.vert_diss[i], led.mag_diss[i],
                led.energy_series()[-1], led.div_residual_u[i], led.div_residual_b[i],
                led.c_bootstrap_series()[-1],
            )
            self._fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
            self._fh.flush()

    def last_row(self) -> dict:
        led = self.ledger
        i = len(led.times) - 1
        return {
            "time": led.times[i],
            "h3_sq_u": led.h3_sq_u[i],
            "h3_sq_b": led.h3_sq_b[i],
            "h1_sq_u": led.h1_sq_u[i],
            "h1_sq_b": led.h1_sq_b[i],
            "horiz_diss": led.horiz_diss[i],
            "vert_diss": led.vert_diss[i],
            "mag_diss": led.mag_diss[i],
            "l2_sq": led.l2_sq[i],
        }

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def _run_segment(
    config: RunConfig,
    state0: MhdState,
    *,
    global_step0: int,
    t_target: float,
    diss0,
    recorder: _LedgerRecorder,
    record_initial: bool,
) -> RunResult:
    grid, spec = config.grid, config.dissipation
    stepper = Stepper(grid, spec, config.dt)
    uh, bh = state_to_half(state0)
    diss = np.asarray(diss0, dtype=float)
    last_t = [state0.t]

    def on_sample(gs: int, t: float, uh_s, bh_s, diss_s) -> None:
        state = half_to_state(grid, uh_s, bh_s, t)
        recorder.record(state, t - last_t[0], diss_s)
        last_t[0] = t

    if record_initial:
        recorder.record(state0, 0.0, diss)

    n_steps = _steps_for(t_target - state0.t, config.dt)
    out_dir = config.outputs
    try:
        uh, bh, t, diss = _advance(
            stepper, uh, bh, state0.t, diss, n_steps, config.sample_every, global_step0, on_sample
        )
    except BlowUpError as err:
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            with open(out_dir / "blowup.json", "w", encoding="utf-8") as fh:
                json.dump(
                    {"time": err.time, "max_amplitude": err.max_amplitude, "config": config.to_dict()},
                    fh,
                    indent=2,
                )
        recorder.close()
        raise

    final = half_to_state(grid, uh, bh, t)
    recorder.close()

    checkpoint_path = None
    if out_dir is not None:
        led = recorder.ledger
        checkpoint_path = write_checkpoint(
            out_dir,
            final,
            spec,
            config.to_dict(),
            step=global_step0 + n_steps,
            seed=config.init.seed,
            trapezoid_diss=(led.horiz_diss[-1], led.vert_diss[-1], led.mag_diss[-1]),
            exact_diss=tuple(diss),
            sup_h3_sq=max(led.sup_seed, max(led.h3_sq)) if led.times else led.sup_seed,
            energy_e0=led.e0_override if led.e0_override is not None else led.energy_series()[0],
            last_row=recorder.last_row(),
        )
    return RunResult(
        config=config,
        ledger=recorder.ledger,
        final_state=final,
        exact_diss=tuple(float(x) for x in diss),
        csv_path=recorder.csv_path,
        checkpoint_path=checkpoint_path,
    )


def run(config: RunConfig) -> RunResult:
    """Integrate from seeded initial data to t_end, emitting diagnostics."""
    state0 = make_initial_data(config.init, config.grid)
    csv_path = config.outputs / "diagnostics.csv" if config.outputs is not None else None
    recorder = _LedgerRecorder(config.dissipation, csv_path)
    return _run_segment(
        config,
        state0,
        global_step0=0,
        t_target=config.t_end,
        diss0=(0.0, 0.0, 0.0),
        recorder=recorder,
        record_initial=True,
    )


def resume(checkpoint_path, t_end: float | None = None) -> RunResult:
    """Continue a checkpointed run; bitwise-equal to an uninterrupted run.

    The state continuation is exact unconditionally.  The dissipation
    accumulators (trapezoid over samples) also match the uninterrupted run
    exactly when the checkpoint step lies on the sampling cadence, since the
    quadrature partitions then coincide.
    """
    cp = read_checkpoint(checkpoint_path)
    config = RunConfig.from_dict(cp.config)
    if t_end is not None:
        config = replace(config, t_end=float(t_end))
    if config.t_end < cp.state.t - 1e-12:
        raise ValueError(f"target t_end {config.t_end} precedes checkpoint time {cp.state.t}")

    csv_path = config.outputs / "diagnostics.csv" if config.outputs is not None else None
    append = csv_path is not None and csv_path.exists()
    recorder = _LedgerRecorder(
        config.dissipation,
        csv_path,
        append=append,
        sup_seed=cp.sup_h3_sq,
        e0=cp.energy_e0,
    )
    # Seed the ledger with the checkpointed sample so trapezoid integration
    # continues from the recorded accumulators (not re-emitted to the CSV).
    led = recorder.ledger
    row = cp.last_row
    led.times.append(row["time"])
    led.h3_sq_u.append(row["h3_sq_u"])
    led.h3_sq_b.append(row["h3_sq_b"])
    led.h1_sq_u.append(row["h1_sq_u"])
    led.h1_sq_b.append(row["h1_sq_b"])
    led.horiz_diss.append(row["horiz_diss"])
    led.vert_diss.append(row["vert_diss"])
    led.mag_diss.append(row["mag_diss"])
    led.div_residual_u.append(cp.state.u.divergence_residual())
    led.div_residual_b.append(cp.state.b.divergence_residual())
    led.l2_sq.append(row["l2_sq"])
    led.exact_diss.append(cp.exact_diss)
    from .diagnostics import dissipation_rates_h3

    led._last_rates = dissipation_rates_h3(cp.state, config.dissipation)

    return _run_segment(
        config,
        cp.state,
        global_step0=cp.step,
        t_target=config.t_end,
        diss0=cp.exact_diss,
        recorder=recorder,
        record_initial=False,
    )


# ---------------------------------------------------------------------------
# Sweeps.


def fit_loglog(xs, ys) -> tuple[float, float, float]:
    """OLS fit of log10 y on log10 x; returns (slope, intercept, rms residual)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 3:
        raise ValueError("need at least 3 points for a slope fit")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit needs positive data")
    lx, ly = np.log10(xs), np.log10(ys)
    a = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, *_ = np.linalg.lstsq(a, ly, rcond=None)
    resid = ly - a @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2)))


@dataclass
class SweepResult:
    kind: str
    param_name: str
    params: list[float]
    summaries: list[dict] = field(default_factory=list)
    sup_diff_h1: list[float] | None = None
    slope: float | None = None
    intercept: float | None = None
    residual: float | None = None
    passed: bool = True
    notes: str = ""


def stability_sweep(base: RunConfig, epsilons, bound_factor: float = 4.0) -> SweepResult:
    """Run the base config at each initial size; flag unbounded energy growth."""
    if len(epsilons) < 2:
        raise ValueError("need at least 2 epsilon values")
    result = SweepResult(kind="stability", param_name="epsilon", params=[float(e) for e in epsilons])
    for idx, eps in enumerate(result.params):
        cfg = replace(
            base,
            init=replace(base.init, epsilon=eps),
            outputs=(base.outputs / f"eps_{idx}" if base.outputs is not None else None),
        )
        try:
            res = run(cfg)
        except BlowUpError as err:
            result.passed = False
            result.notes = f"blow-up at epsilon={eps}: {err}"
            result.summaries.append({"epsilon": eps, "blowup": True, "time": err.time})
            continue
        led = res.ledger
        e_series = led.energy_series()
        e0, sup_e = e_series[0], max(e_series)
        bounded = eps == 0.0 or sup_e <= bound_factor * e0
        result.summaries.append(
            {
                "epsilon": eps,
                "sup_energy": sup_e,
                "energy_e0": e0,
                "sup_over_eps_sq": (sup_e / eps**2) if eps > 0 else 0.0,
                "sup_h3_sq": led.sup_h3_sq(),
                "bounded": bounded,
            }
        )
        if not bounded:
            result.passed = False
            result.notes = f"energy exceeded {bound_factor} x E(0) at epsilon={eps}"
    pos = [(s["epsilon"], s["sup_energy"]) for s in result.summaries
           if s.get("sup_energy", 0.0) > 0 and s["epsilon"] > 0]
    if len(pos) >= 3:
        slope, intercept, residual = fit_loglog([p for p, _ in pos], [v for _, v in pos])
        result.slope, result.intercept, result.residual = slope, intercept, residual
    if base.outputs is not None:
        base.outputs.mkdir(parents=True, exist_ok=True)
        with open(base.outputs / "stability_summary.json", "w", encoding="utf-8") as fh:
            json.dump(asdict(result), fh, indent=2, default=str)
            fh.write("\n")
    return result


def _pair_h1_sq_half(grid: Grid, du, db) -> float:
    w = (1.0 + grid.ksq_half) * grid.parseval_weight_half * grid.volume
    au = (du.real**2 + du.imag**2).sum(axis=0)
    ab = (db.real**2 + db.imag**2).sum(axis=0)
    return float(np.sum(w * (au + ab)))


def _sampled_trajectory(config: RunConfig, state0: MhdState) -> list[tuple[np.ndarray, np.ndarray]]:
    """Advance and keep (uh, bh) at every sample (initial sample included)."""
    stepper = Stepper(config.grid, config.dissipation, config.dt)
    uh, bh = state_to_half(state0)
    samples = [(uh, bh)]
    _advance(
        stepper, uh, bh, state0.t, np.zeros(3), _steps_for(config.t_end - state0.t, config.dt),
        config.sample_every, 0, lambda gs, t, u, b, d: samples.append((u, b)),
    )
    return samples


def _sup_diff_against(config: RunConfig, state0: MhdState, ref: list) -> float:
    """Lockstep run of config; sup over samples of pair-H1 distance to ref."""
    stepper = Stepper(config.grid, config.dissipation, config.dt)
    uh, bh = state_to_half(state0)
    idx = [0]
    sup = [0.0]
    if ref:
        du, db = uh - ref[0][0], bh - ref[0][1]
        sup[0] = _pair_h1_sq_half(config.grid, du, db)

    def on_sample(gs, t, u, b, d):
        idx[0] += 1
        ru, rb = ref[idx[0]]
        sup[0] = max(sup[0], _pair_h1_sq_half(config.grid, u - ru, b - rb))

    _advance(
        stepper, uh, bh, state0.t, np.zeros(3), _steps_for(config.t_end - state0.t, config.dt),
        config.sample_every, 0, on_sample,
    )
    return math.sqrt(sup[0])


def inviscid_sweep(base: RunConfig, nus) -> SweepResult:
    """Vertical-viscosity family against its sigma=0 limit, same initial data.

    Horizontal viscosities and the magnetic diffusivity are pinned to 1, the
    vertical coefficient takes each value in ``nus``; the reference run drops
    the vertical term entirely (sigma = 0).
    """
    nus = [float(v) for v in nus]
    if len(nus) < 3:
        raise ValueError("need at least 3 viscosity values plus the reference run")
    if any(v <= 0 for v in nus):
        raise ValueError("viscosity values must be positive")

    spec_ref = base.dissipation.replace(nu1=1.0, nu2=1.0, mu=1.0, sigma=0)
    state0 = make_initial_data(base.init, base.grid)
    ref_cfg = replace(base, dissipation=spec_ref, outputs=None)
    ref_samples = _sampled_trajectory(ref_cfg, state0)

    result = SweepResult(kind="inviscid", param_name="nu", params=nus, sup_diff_h1=[])
    for nu in nus:
        spec_nu = base.dissipation.replace(nu1=1.0, nu2=1.0, mu=1.0, sigma=1, nu3=nu)
        cfg = replace(base, dissipation=spec_nu, outputs=None)
        sup = _sup_diff_against(cfg, state0.copy(), ref_samples)
        result.sup_diff_h1.append(sup)
        result.summaries.append({"nu": nu, "sup_diff_h1": sup})

    if all(v > 0 for v in result.sup_diff_h1) and len(set(nus)) >= 3:
        fit_nus, fit_diffs = [], []
        for nu, dval in zip(nus, result.sup_diff_h1):
            if nu not in fit_nus:
                fit_nus.append(nu)
                fit_diffs.append(dval)
        result.slope, result.intercept, result.residual = fit_loglog(fit_nus, fit_diffs)
    else:
        result.passed = False
        result.notes = "degenerate sweep: zero differences or fewer than 3 distinct values"

    # smaller vertical viscosity should not widen the gap; report only
    ordered = sorted(zip(result.params, result.sup_diff_h1))
    if any(b[1] < a[1] - 1e-15 for a, b in zip(ordered, ordered[1:])):
        warnings.warn(
            "sup H1 differences are not monotone in the vertical viscosity", RuntimeWarning
        )
        result.notes = (result.notes + "; " if result.notes else "") + "non-monotone in nu"

    if base.outputs is not None:
        base.outputs.mkdir(parents=True, exist_ok=True)
        payload = {
            "param": result.params,
            "sup_diff_h1": result.sup_diff_h1,
            "slope": result.slope,
            "intercept": result.intercept,
            "residual": result.residual,
        }
        with open(base.outputs / "sweep_inviscid.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return result


def continuous_dependence(base: RunConfig, delta: float, bound_factor: float = 10.0) -> dict:
    """Response of the flow to a solenoidal initial perturbation of H1 size delta."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    state_a = make_initial_data(base.init, base.grid)
    du, db = _solenoidal_perturbation(
        base.grid, base.init.seed + _PERTURBATION_SEED_OFFSET, base.init.band, delta,
        base.init.amplitude_decay,
    )
    state_b = MhdState(
        VectorField.from_stack(base.grid, state_a.u.stack() + du.stack()),
        VectorField.from_stack(base.grid, state_a.b.stack() + db.stack()),
        0.0,
    )
    ref_cfg = replace(base, outputs=None)
    ref_samples = _sampled_trajectory(ref_cfg, state_a)
    sup_diff = _sup_diff_against(ref_cfg, state_b, ref_samples)
    ratio = sup_diff / delta if delta > 0 else 0.0
    report = {
        "delta": delta,
        "sup_diff_h1": sup_diff,
        "sup_ratio": ratio,
        "bound_factor": bound_factor,
        "bounded": ratio <= bound_factor,
        "sigma": base.dissipation.sigma,
    }
    if base.outputs is not None:
        base.outputs.mkdir(parents=True, exist_ok=True)
        with open(base.outputs / "continuous_dependence.json", "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    return report


# ---------------------------------------------------------------------------
# Linearized stepping versus the per-mode matrix exponential.


def validate_linear_stepping(
    spec: DissipationSpec | None = None,
    grid: Grid | None = None,
    n_modes: int = 50,
    dt: float = 1e-3,
    t_total: float = 1.0,
    seed: int = 2024,
) -> dict:
    """Drive the stepper with advection off and compare with the exact solution.

    Seeds ``n_modes`` random solenoidal single-mode amplitudes, advances them
    all at once (the linearized dynamics do not couple distinct modes) and
    reports the largest amplitude error against the matrix-exponential oracle.
    """
    if spec is None:
        spec = DissipationSpec(alpha=0.75, beta=0.75, nu1=1.0, nu2=0.5, nu3=0.7, sigma=1, mu=0.8)
    if grid is None:
        grid = Grid(16, 16, 16)
    band = min(grid.dealias_band)
    rng = np.random.default_rng(seed)

    modes: list[tuple[int, int, int]] = []
    seen = set()
    while len(modes) < n_modes:
        k = tuple(int(v) for v in rng.integers(-band, band + 1, size=3))
        if k == (0, 0, 0):
            continue
        canon = k if (k[0], k[1], k[2]) > (-k[0], -k[1], -k[2]) else tuple(-v for v in k)
        if canon in seen:
            continue
        seen.add(canon)
        modes.append(canon)

    def perp_amplitude(kv: np.ndarray) -> np.ndarray:
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v = v - kv * (kv @ v) / (kv @ kv)
        return v

    shape = grid.shape
    ustack = np.zeros((3,) + shape, dtype=np.complex128)
    bstack = np.zeros((3,) + shape, dtype=np.complex128)
    inits = {}
    scale = grid.wavenumber_scale
    for k in modes:
        kv = np.asarray(k, dtype=float) * scale
        amp_u = perp_amplitude(kv)
        amp_b = perp_amplitude(kv)
        idx = tuple(ki % n for ki, n in zip(k, shape))
        nidx = tuple((-ki) % n for ki, n in zip(k, shape))
        for comp in range(3):
            ustack[comp][idx] = amp_u[comp]
            ustack[comp][nidx] = np.conj(amp_u[comp])
            bstack[comp][idx] = amp_b[comp]
            bstack[comp][nidx] = np.conj(amp_b[comp])
        inits[k] = np.concatenate([amp_u, amp_b])

    state = MhdState(VectorField.from_stack(grid, ustack), VectorField.from_stack(grid, bstack))
    stepper = Stepper(grid, spec, dt, include_advection=False, include_coupling=True)
    uh, bh = state_to_half(state)
    n_steps = _steps_for(t_total, dt)
    diss = np.zeros(3)
    t = 0.0
    for i in range(n_steps):
        uh, bh, _, diss = stepper.step(uh, bh, t, diss)
        t += dt

    final = half_to_state(grid, uh, bh, t)
    ufin, bfin = final.u.stack(), final.b.stack()
    max_err = 0.0
    worst = None
    for k, y0 in inits.items():
        kv = np.asarray(k, dtype=float) * scale
        y_exact = linear_mode_oracle(spec, kv, y0, n_steps * dt)
        idx = tuple(ki % n for ki, n in zip(k, shape))
        y_num = np.array([ufin[c][idx] for c in range(3)] + [bfin[c][idx] for c in range(3)])
        err = float(np.max(np.abs(y_num - y_exact)))
        if err > max_err:
            max_err, worst = err, k
    return {"n_modes": len(modes), "dt": dt, "t_total": n_steps * dt, "max_error": max_err, "worst_mode": worst}
