"""Command-line entry points.

Subcommands mirror the experiment layer one to one; every command exits
nonzero when a hard assertion fails (blow-up, inequality violation, linear
validation above tolerance, unbounded sweep).  ``--threads`` or the
AMHD_THREADS environment variable controls the FFT worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import experiments, inequalities
from ._fft import THREADS_ENV
from .diagnostics import read_diagnostics_csv
from .spectral import Grid


def _add_threads(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threads", type=int, default=None, help="FFT worker count override")


def _apply_threads(args) -> None:
    if getattr(args, "threads", None):
        os.environ[THREADS_ENV] = str(args.threads)


def _cmd_run(args) -> int:
    config = experiments.RunConfig.from_json(args.config)
    result = experiments.run(config)
    led = result.ledger
    print(f"steps to t={result.final_state.t:g}; samples={len(led.times)}")
    print(f"final ||(u,b)||_H3^2 = {led.h3_sq[-1]:.6e}; E(t_end) = {led.energy_series()[-1]:.6e}")
    if result.csv_path:
        print(f"diagnostics: {result.csv_path}")
    if result.checkpoint_path:
        print(f"checkpoint:  {result.checkpoint_path}")
    return 0


def _cmd_resume(args) -> int:
    result = experiments.resume(args.checkpoint, t_end=args.t_end)
    print(f"resumed to t={result.final_state.t:g}; samples={len(result.ledger.times)}")
    return 0


def _cmd_sweep_stability(args) -> int:
    config = experiments.RunConfig.from_json(args.config)
    res = experiments.stability_sweep(config, args.eps, bound_factor=args.bound_factor)
    for s in res.summaries:
        print(json.dumps(s))
    if res.slope is not None:
        print(f"slope(log supE / log eps) = {res.slope:.4f} (residual {res.residual:.4f})")
    print("PASS" if res.passed else f"FAIL: {res.notes}")
    return 0 if res.passed else 1


def _cmd_sweep_inviscid(args) -> int:
    config = experiments.RunConfig.from_json(args.config)
    res = experiments.inviscid_sweep(config, args.nu)
    for nu, d in zip(res.params, res.sup_diff_h1 or []):
        print(f"nu={nu:g}  sup||diff||_H1={d:.6e}")
    if res.slope is not None:
        print(f"slope = {res.slope:.6f}, intercept = {res.intercept:.6f}, residual = {res.residual:.6f}")
    print("PASS" if res.passed else f"FAIL: {res.notes}")
    return 0 if res.passed else 1


def _cmd_continuous_dependence(args) -> int:
    config = experiments.RunConfig.from_json(args.config)
    report = experiments.continuous_dependence(config, args.delta, bound_factor=args.bound_factor)
    print(json.dumps(report, indent=2))
    return 0 if report["bounded"] else 1


def _cmd_verify_inequalities(args) -> int:
    grid = Grid(args.grid, args.grid, args.grid)
    reports = inequalities.run_all_checks(grid, trials=args.trials, seed=args.seed)
    if args.out:
        inequalities.write_report_json(args.out, reports)
        print(f"report written to {args.out}")
    hard_ok = True
    for r in reports:
        print(
            f"{r.name}: trials={r.trials} max_ratio={r.max_ratio:.6g} "
            f"violations={r.violations}"
        )
        if r.name == "derivative-exchange" and r.violations > 0:
            hard_ok = False
        if r.violations > 0 and r.name != "derivative-exchange":
            hard_ok = False
    print("PASS" if hard_ok else "FAIL")
    return 0 if hard_ok else 1


def _cmd_linear_validate(args) -> int:
    report = experiments.validate_linear_stepping(
        n_modes=args.modes, dt=args.dt, t_total=args.t_end, seed=args.seed
    )
    print(json.dumps({k: str(v) if isinstance(v, tuple) else v for k, v in report.items()}))
    ok = report["max_error"] <= args.tol
    print("PASS" if ok else f"FAIL: max_error {report['max_error']:.3e} > {args.tol:g}")
    return 0 if ok else 1


def _cmd_report(args) -> int:
    directory = Path(args.dir)
    found = False
    csv = directory / "diagnostics.csv"
    if csv.exists():
        found = True
        data = read_diagnostics_csv(csv)
        t = data["time"]
        print(f"{csv}: {len(t)} samples, t in [{t[0]:g}, {t[-1]:g}]")
        print(
            f"  final h3_sq={data['h3_sq_u'][-1] + data['h3_sq_b'][-1]:.6e} "
            f"E={data['energy_E'][-1]:.6e} "
            f"max div residual={max(data['div_residual_u'].max(), data['div_residual_b'].max()):.3e}"
        )
    for name in ("sweep_inviscid.json", "stability_summary.json", "continuous_dependence.json"):
        path = directory / name
        if path.exists():
            found = True
            with open(path, "r", encoding="utf-8") as fh:
                print(f"{path}:")
                print(json.dumps(json.load(fh), indent=2))
    if not found:
        print(f"no recognized outputs under {directory}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anisomhd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a configured run")
    p.add_argument("config")
    _add_threads(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("resume", help="continue from a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("--t-end", type=float, default=None)
    _add_threads(p)
    p.set_defaults(func=_cmd_resume)

    p = sub.add_parser("sweep-stability", help="initial-size sweep")
    p.add_argument("config")
    p.add_argument("--eps", type=float, nargs="+", required=True)
    p.add_argument("--bound-factor", type=float, default=4.0)
    _add_threads(p)
    p.set_defaults(func=_cmd_sweep_stability)

    p = sub.add_parser("sweep-inviscid", help="vertical-viscosity sweep")
    p.add_argument("config")
    p.add_argument("--nu", type=float, nargs="+", required=True)
    _add_threads(p)
    p.set_defaults(func=_cmd_sweep_inviscid)

    p = sub.add_parser("continuous-dependence", help="initial-data perturbation response")
    p.add_argument("config")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--bound-factor", type=float, default=10.0)
    _add_threads(p)
    p.set_defaults(func=_cmd_continuous_dependence)

    p = sub.add_parser("verify-inequalities", help="run the inequality checks")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--grid", type=int, default=16)
    p.add_argument("--out", default=None)
    _add_threads(p)
    p.set_defaults(func=_cmd_verify_inequalities)

    p = sub.add_parser("linear-validate", help="linearized stepper vs matrix exponential")
    p.add_argument("--modes", type=int, default=50)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--tol", type=float, default=1e-8)
    _add_threads(p)
    p.set_defaults(func=_cmd_linear_validate)

    p = sub.add_parser("report", help="summarize an output directory")
    p.add_argument("dir")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_threads(args)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
