"""Norms, the running energy functional and its bootstrap ratio.

The working Sobolev norm matches the quantity the energy method actually
controls: for order m,

    ||f||_m^2 = ||f||^2 + sum_i ||d_i^m f||^2
              = sum_k (1 + sum_i |k_i|^(2m)) |c(k)|^2 * volume,

with no mixed derivatives.  The full Bessel weight (1 + |k|^2)^m is exposed
as an alternative convention, and the anisotropic product weighting
prod_i (1 + |k_i|^2)^(s_i) (or its homogeneous variant) is available for
completeness; reports always state which convention produced a number.

The energy functional accumulated by the ledger is

    E(t) = sup_{tau <= t} ||(u, b)||_{H3}^2
           + int_0^t [ nu1 ||L1^a u||_{H3}^2 + nu2 ||L2^a u||_{H3}^2 ] dtau
           + sigma nu3 int_0^t ||L3^a u||_{H3}^2 dtau
           + mu int_0^t sum_i ||(L_i'^b, L_i''^b) b_i||_{H3}^2 dtau

with the time integrals advanced by trapezoidal quadrature at the sampling
cadence.  The exact RK4-weighted L2 dissipation integrals carried by the
stepper can be attached to each sample for energy-identity checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .dissipation import MAGNETIC_DIFFUSION_AXES, DissipationSpec
from .dynamics import MhdState
from .spectral import Grid, SpectralScalar, VectorField

__all__ = [
    "h_s_norm",
    "pair_h_norm",
    "anisotropic_pair_norm",
    "anisotropic_sobolev_norm",
    "dissipation_rates_h3",
    "EnergyLedger",
    "BootstrapReport",
    "accumulate",
    "bootstrap_ratio",
    "DIAGNOSTICS_COLUMNS",
    "write_diagnostics_csv",
    "read_diagnostics_csv",
]

SUPPORTED_ORDERS = (0, 1, 3)


@lru_cache(maxsize=32)
def _sobolev_weight(grid: Grid, order: int, convention: str) -> np.ndarray:
    k1, k2, k3 = grid.kvec
    if convention == "axis":
        return 1.0 + np.abs(k1) ** (2 * order) + np.abs(k2) ** (2 * order) + np.abs(k3) ** (2 * order)
    if convention == "bessel":
        return (1.0 + grid.ksq) ** order
    raise ValueError(f"unknown norm convention {convention!r}")


def _weighted_sq(f: SpectralScalar, weight: np.ndarray | float) -> float:
    a = f.coeffs
    return f.grid.volume * float(np.sum(weight * (a.real**2 + a.imag**2)))


def h_s_norm(field: VectorField | SpectralScalar, order: int, convention: str = "axis") -> float:
    """Sobolev norm of order 0, 1 or 3 (order 0 is the plain L2 norm)."""
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported order {order}; supported: {SUPPORTED_ORDERS}")
    comps = field.components if isinstance(field, VectorField) else (field,)
    grid = comps[0].grid
    weight = 1.0 if order == 0 else _sobolev_weight(grid, order, convention)
    return math.sqrt(sum(_weighted_sq(c, weight) for c in comps))


def pair_h_norm(u: VectorField, b: VectorField, order: int) -> float:
    """||(u, b)||_order, the root of the summed squared norms."""
    return math.sqrt(h_s_norm(u, order) ** 2 + h_s_norm(b, order) ** 2)


def anisotropic_pair_norm(b_component: SpectralScalar, i: int, beta: float, order: int = 3) -> float:
    """sqrt(||L_i'^beta f||_order^2 + ||L_i''^beta f||_order^2) for component i.

    This is the cross-axis smoothing norm the magnetic dissipation controls:
    component i carries no smoothing along its own axis.
    """
    if i not in (1, 2, 3):
        raise ValueError(f"component must be 1, 2 or 3, got {i}")
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported order {order}; supported: {SUPPORTED_ORDERS}")
    grid = b_component.grid
    weight = 1.0 if order == 0 else _sobolev_weight(grid, order, "axis")
    total = 0.0
    for axis in MAGNETIC_DIFFUSION_AXES[i]:
        kax = grid.kvec[axis - 1]
        total += _weighted_sq(b_component, np.abs(kax) ** (2 * beta) * weight)
    return math.sqrt(total)


def anisotropic_sobolev_norm(
    f: SpectralScalar, s: tuple[float, float, float], homogeneous: bool = False
) -> float:
    """Product-weighted anisotropic norm, prod_i (1+|k_i|^2)^(s_i) or prod_i |k_i|^(2 s_i)."""
    k1, k2, k3 = f.grid.kvec
    if homogeneous:
        w = np.abs(k1) ** (2 * s[0]) * np.abs(k2) ** (2 * s[1]) * np.abs(k3) ** (2 * s[2])
        w = w.copy()
        w[0, 0, 0] = 0.0
    else:
        w = (1 + k1**2) ** s[0] * (1 + k2**2) ** s[1] * (1 + k3**2) ** s[2]
    return math.sqrt(_weighted_sq(f, w))


def dissipation_rates_h3(state: MhdState, spec: DissipationSpec) -> tuple[float, float, float]:
    """Instantaneous (horizontal, vertical, magnetic) H3-weighted dissipation rates."""
    grid = state.grid
    w3 = _sobolev_weight(grid, 3, "axis")
    k1, k2, k3 = grid.kvec
    a2 = 2.0 * spec.alpha
    b2 = 2.0 * spec.beta
    horiz = sum(
        _weighted_sq(c, (spec.nu1 * np.abs(k1) ** a2 + spec.nu2 * np.abs(k2) ** a2) * w3)
        for c in state.u.components
    )
    vert = (
        sum(_weighted_sq(c, np.abs(k3) ** a2 * w3) for c in state.u.components)
        * spec.sigma
        * spec.nu3
    )
    kv = (k1, k2, k3)
    mag = 0.0
    for i in (1, 2, 3):
        ia, ib = MAGNETIC_DIFFUSION_AXES[i]
        w = (np.abs(kv[ia - 1]) ** b2 + np.abs(kv[ib - 1]) ** b2) * w3
        mag += _weighted_sq(state.b.components[i - 1], w)
    return horiz, vert, spec.mu * mag


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


@dataclass
class BootstrapReport:
    """Empirical constant of the a-priori inequality E(t) <= E(0) + C E(t)^(3/2)."""

    t: float
    e0: float
    et: float
    c_est: float
    exceeded: bool = False


@dataclass
class EnergyLedger:
    """Append-only time series of norms and accumulated dissipation integrals."""

    times: list[float] = field(default_factory=list)
    h3_sq_u: list[float] = field(default_factory=list)
    h3_sq_b: list[float] = field(default_factory=list)
    h1_sq_u: list[float] = field(default_factory=list)
    h1_sq_b: list[float] = field(default_factory=list)
    horiz_diss: list[float] = field(default_factory=list)
    vert_diss: list[float] = field(default_factory=list)
    mag_diss: list[float] = field(default_factory=list)
    div_residual_u: list[float] = field(default_factory=list)
    div_residual_b: list[float] = field(default_factory=list)
    # order-0 pair energy and exact stepper integrals, kept for identity checks
    l2_sq: list[float] = field(default_factory=list)
    exact_diss: list[tuple[float, float, float]] = field(default_factory=list)
    # continuation seeds used when a ledger picks up after a checkpoint
    sup_seed: float = 0.0
    e0_override: float | None = None
    _last_rates: tuple[float, float, float] | None = None

    @property
    def h3_sq(self) -> list[float]:
        return [a + b for a, b in zip(self.h3_sq_u, self.h3_sq_b)]

    def energy_series(self) -> list[float]:
        """E(t) at each sample: running sup of h3_sq plus the integrals."""
        out = []
        sup = self.sup_seed
        for i, h3 in enumerate(self.h3_sq):
            sup = max(sup, h3)
            out.append(sup + self.horiz_diss[i] + self.vert_diss[i] + self.mag_diss[i])
        return out

    def c_bootstrap_series(self) -> list[float]:
        es = self.energy_series()
        if not es:
            return []
        e0 = self.e0_override if self.e0_override is not None else es[0]
        return [((e - e0) / e**1.5 if e > 0 else 0.0) for e in es]

    def sup_energy(self) -> float:
        es = self.energy_series()
        return max(es) if es else 0.0

    def sup_h3_sq(self) -> float:
        return max(self.h3_sq, default=self.sup_seed) if self.times else self.sup_seed


def accumulate(
    ledger: EnergyLedger,
    state: MhdState,
    spec: DissipationSpec,
    dt: float,
    exact_diss: tuple[float, float, float] | None = None,
) -> EnergyLedger:
    """Append one sample and advance the dissipation integrals by trapezoid.

    ``dt`` is the spacing to the previous sample (ignored for the first one);
    the state's own timestamp must agree with it.
    """
    rates = dissipation_rates_h3(state, spec)
    if ledger.times:
        t_prev = ledger.times[-1]
        if state.t <= t_prev:
            raise ValueError(f"non-monotone time: {state.t} after {t_prev}")
        if abs((state.t - t_prev) - dt) > 1e-9 * max(1.0, abs(state.t)):
            raise ValueError(
                f"state time {state.t} inconsistent with ledger tail {t_prev} + dt {dt}"
            )
        last = ledger._last_rates
        assert last is not None
        ledger.horiz_diss.append(ledger.horiz_diss[-1] + 0.5 * dt * (last[0] + rates[0]))
        ledger.vert_diss.append(ledger.vert_diss[-1] + 0.5 * dt * (last[1] + rates[1]))
        ledger.mag_diss.append(ledger.mag_diss[-1] + 0.5 * dt * (last[2] + rates[2]))
    else:
        ledger.horiz_diss.append(0.0)
        ledger.vert_diss.append(0.0)
        ledger.mag_diss.append(0.0)

    ledger.times.append(state.t)
    ledger.h3_sq_u.append(h_s_norm(state.u, 3) ** 2)
    ledger.h3_sq_b.append(h_s_norm(state.b, 3) ** 2)
    ledger.h1_sq_u.append(h_s_norm(state.u, 1) ** 2)
    ledger.h1_sq_b.append(h_s_norm(state.b, 1) ** 2)
    ledger.div_residual_u.append(state.u.divergence_residual())
    ledger.div_residual_b.append(state.b.divergence_residual())
    ledger.l2_sq.append(state.u.l2_norm_sq() + state.b.l2_norm_sq())
    ledger.exact_diss.append(tuple(exact_diss) if exact_diss is not None else (0.0, 0.0, 0.0))
    ledger._last_rates = rates
    return ledger


def bootstrap_ratio(ledger: EnergyLedger, t: float, threshold: float | None = None) -> BootstrapReport:
    """Empirical C estimate (E(t) - E(0)) / E(t)^(3/2) at the sample nearest t."""
    if not ledger.times:
        raise ValueError("empty ledger")
    if t < ledger.times[0] - 1e-12 or t > ledger.times[-1] + 1e-12:
        raise ValueError(f"t={t} outside recorded range [{ledger.times[0]}, {ledger.times[-1]}]")
    idx = int(np.argmin(np.abs(np.asarray(ledger.times) - t)))
    es = ledger.energy_series()
    e0 = ledger.e0_override if ledger.e0_override is not None else es[0]
    et = es[idx]
    c_est = (et - e0) / et**1.5 if et > 0 else 0.0
    exceeded = threshold is not None and c_est > threshold
    return BootstrapReport(t=ledger.times[idx], e0=e0, et=et, c_est=c_est, exceeded=exceeded)


def _format_row(values) -> str:
    return ",".join(f"{v:.17g}" for v in values)


def write_diagnostics_csv(path, ledger: EnergyLedger) -> None:
    es = ledger.energy_series()
    cs = ledger.c_bootstrap_series()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(DIAGNOSTICS_COLUMNS) + "\n")
        for i, t in enumerate(ledger.times):
            row = (
                t,
                ledger.h3_sq_u[i],
                ledger.h3_sq_b[i],
                ledger.h1_sq_u[i],
                ledger.h1_sq_b[i],
                ledger.horiz_diss[i],
                ledger.vert_diss[i],
                ledger.mag_diss[i],
                es[i],
                ledger.div_residual_u[i],
                ledger.div_residual_b[i],
                cs[i],
            )
            fh.write(_format_row(row) + "\n")


def read_diagnostics_csv(path) -> dict[str, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != DIAGNOSTICS_COLUMNS:
            raise ValueError(f"unexpected diagnostics header {header}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        data = data.reshape(0, len(DIAGNOSTICS_COLUMNS))
    return {name: data[:, i] for i, name in enumerate(DIAGNOSTICS_COLUMNS)}
