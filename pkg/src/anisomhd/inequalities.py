"""Numerical checks of the anisotropic Fourier-space inequalities.

Two kinds of check live here:

* hard constant-1 laws, where the discrete proof is a pointwise Hoelder
  argument in frequency space and the inequality must hold with constant 1 up
  to roundoff on every trial (the derivative-exchange check);
* bounded-ratio laws, where the torus constant is unknown and the check
  records the empirical ratio distribution instead of asserting a constant
  (Lebesgue and Sobolev interpolation, triple products).

The triple-product bounds are reconstructions: the source statement is
incomplete, so the exponent pattern is pinned from how the estimates are
used, and two plausible readings are evaluated side by side.  Their report
names carry the "reconstructed" tag.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .randfields import RandomFieldSpec, generate_field
from .spectral import Grid, SpectralScalar, directional_fractional, fractional_laplacian

__all__ = [
    "InequalityReport",
    "lq_norm",
    "check_derivative_exchange",
    "check_lebesgue_interpolation",
    "check_triple_product",
    "check_triple_product_repeated",
    "check_sobolev_interpolation",
    "run_derivative_exchange_trials",
    "run_lebesgue_trials",
    "run_triple_product_trials",
    "run_sobolev_interpolation_trials",
    "run_all_checks",
    "write_report_json",
]

HARD_TOLERANCE = 1e-12


@dataclass
class InequalityReport:
    name: str
    trials: int
    max_ratio: float
    violations: int
    tolerance: float
    seed_range: tuple[int, int] | None = None
    grid: tuple[int, int, int] | None = None


def _mode_norm(f: SpectralScalar, weight) -> float:
    a = f.coeffs
    return math.sqrt(f.grid.volume * float(np.sum(weight * (a.real**2 + a.imag**2))))


def _axis_norm(f: SpectralScalar, order: int) -> float:
    """sqrt(||f||^2 + sum_i ||d_i^order f||^2) for any integer order >= 1."""
    k1, k2, k3 = f.grid.kvec
    w = 1.0 + np.abs(k1) ** (2 * order) + np.abs(k2) ** (2 * order) + np.abs(k3) ** (2 * order)
    return _mode_norm(f, w)


def lq_norm(f: SpectralScalar, q: float) -> float:
    """Lebesgue norm on the physical grid; q may be numpy.inf."""
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")
    vals = f.to_physical()
    if np.isinf(q):
        return float(np.max(np.abs(vals)))
    return float((f.grid.cell_volume * np.sum(np.abs(vals) ** q)) ** (1.0 / q))


def check_derivative_exchange(
    f: SpectralScalar, i: int, j: int, m: int, n: int, s: float
) -> dict[str, float]:
    """Exchange of directional smoothing between two axes.

    With L = ||d_i^(m+1) d_j^n L_j^s f||, the frequency-space Hoelder bound

        L <= ||d_j^(n+1) d_i^m L_i^s f||^s * ||d_j^n d_i^(m+1) L_i^s f||^(1-s)
          <= || L_i^s f ||_{H^(m+n+1)}

    holds with constant exactly 1 on the discrete spectrum.  Returns the three
    quantities and the two ratios (0 where the right side vanishes).
    """
    if i == j or i not in (1, 2, 3) or j not in (1, 2, 3):
        raise ValueError("axes must be distinct members of {1, 2, 3}")
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if m < 0 or n < 0:
        raise ValueError("derivative orders must be non-negative")
    ki = np.abs(f.grid.kvec[i - 1])
    kj = np.abs(f.grid.kvec[j - 1])
    lhs = _mode_norm(f, ki ** (2 * (m + 1)) * kj ** (2 * n) * kj ** (2 * s))
    a = _mode_norm(f, kj ** (2 * (n + 1)) * ki ** (2 * m) * ki ** (2 * s))
    b = _mode_norm(f, kj ** (2 * n) * ki ** (2 * (m + 1)) * ki ** (2 * s))
    mid = a**s * b ** (1.0 - s)
    high = _axis_norm(directional_fractional(f, i, s), m + n + 1)
    return {
        "lhs": lhs,
        "mid": mid,
        "high": high,
        "ratio_lhs_mid": lhs / mid if mid > 0 else 0.0,
        "ratio_mid_high": mid / high if high > 0 else 0.0,
    }


def check_lebesgue_interpolation(f: SpectralScalar, q: float, s: float) -> float:
    """Ratio ||f||_q / (||f||^(1-theta) ||L^s f||^theta), theta = (3/s)(1/2 - 1/q)."""
    inv_q = 0.0 if np.isinf(q) else 1.0 / q
    if q < 2:
        raise ValueError(f"q must be in [2, inf], got {q}")
    if s <= 3.0 * (0.5 - inv_q):
        raise ValueError(f"need s > 3(1/2 - 1/q) = {3.0 * (0.5 - inv_q)}, got s={s}")
    if abs(f.coeffs[0, 0, 0]) > 1e-12 * max(1.0, float(np.max(np.abs(f.coeffs)))):
        raise ValueError("field must be mean-zero")
    theta = (3.0 / s) * (0.5 - inv_q)
    num = lq_norm(f, q)
    l2 = _mode_norm(f, 1.0)
    smooth = _mode_norm(fractional_laplacian(f, s / 2.0), 1.0)
    denom = l2 ** (1.0 - theta) * smooth**theta
    return num / denom if denom > 0 else 0.0


def _directional_factor(f: SpectralScalar, axis: int, e: float) -> float:
    if not 0.5 < e <= 1.0:
        raise ValueError(f"exponents must lie in (1/2, 1], got {e}")
    base = _mode_norm(f, 1.0)
    smooth = _mode_norm(directional_fractional(f, axis, e), 1.0)
    return base ** (1.0 - 0.5 / e) * smooth ** (0.5 / e)


def check_triple_product(
    f: SpectralScalar,
    g: SpectralScalar,
    h: SpectralScalar,
    axes: tuple[int, int, int],
    exponents: tuple[float, float, float],
) -> float:
    """Empirical ratio of int |f g h| dx to the reconstructed anisotropic bound.

    Each field carries the directional smoothing of its own axis:

        int |f g h| <= C prod ||.||^(1 - 1/(2e)) ||L_axis^e .||^(1/(2e)).
    """
    if sorted(axes) != [1, 2, 3]:
        raise ValueError(f"axes must be a permutation of (1, 2, 3), got {axes}")
    lhs = float(
        f.grid.cell_volume
        * np.sum(np.abs(f.to_physical() * g.to_physical() * h.to_physical()))
    )
    denom = 1.0
    for field, axis, e in zip((f, g, h), axes, exponents):
        denom *= _directional_factor(field, axis, e)
    if lhs == 0.0:
        return 0.0
    return lhs / denom if denom > 0 else float("inf")


def check_triple_product_repeated(f: SpectralScalar, g: SpectralScalar, alpha: float) -> float:
    """Second reconstructed reading: repeated field with both horizontal weights.

        int |f f g| <= C ||f||^(2 - 1/a) ||L1^a f||^(1/(2a)) ||L2^a f||^(1/(2a))
                         * ||g||^(1/2) ||d3 g||^(1/2).
    """
    if not 0.5 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (1/2, 1], got {alpha}")
    lhs = float(
        f.grid.cell_volume * np.sum(np.abs(f.to_physical() ** 2 * g.to_physical()))
    )
    k3 = np.abs(f.grid.kvec[2])
    denom = (
        _mode_norm(f, 1.0) ** (2.0 - 1.0 / alpha)
        * _mode_norm(directional_fractional(f, 1, alpha), 1.0) ** (0.5 / alpha)
        * _mode_norm(directional_fractional(f, 2, alpha), 1.0) ** (0.5 / alpha)
        * _mode_norm(g, 1.0) ** 0.5
        * _mode_norm(g, k3**2) ** 0.5
    )
    if lhs == 0.0:
        return 0.0
    return lhs / denom if denom > 0 else float("inf")


def check_sobolev_interpolation(
    f: SpectralScalar, s1: float, s2: float, gamma: float, q1: float, q2: float
) -> float:
    """Gagliardo-Nirenberg style ratio in the Bessel-potential convention.

    s = gamma s1 + (1 - gamma) s2 and 1/q = 1/q1 + 1/q2, with every Lebesgue
    exponent restricted to [2, inf] so the pseudo-spectral evaluation of
    ||L^s f||_{L^q} is meaningful.
    """
    if not (0.0 < gamma < 1.0 and 0.0 < s1 < 1.0 and 0.0 < s2 < 1.0):
        raise ValueError("gamma, s1, s2 must lie in (0, 1)")
    inv_q = (0.0 if np.isinf(q1) else 1.0 / q1) + (0.0 if np.isinf(q2) else 1.0 / q2)
    if inv_q > 0.5 or q1 < 2 or q2 < 2:
        raise ValueError("need q1, q2 in [2, inf] with 1/q1 + 1/q2 <= 1/2")
    q = float("inf") if inv_q == 0.0 else 1.0 / inv_q
    s = gamma * s1 + (1.0 - gamma) * s2
    num = lq_norm(fractional_laplacian(f, s / 2.0), q)
    denom = (
        lq_norm(fractional_laplacian(f, s1 / 2.0), q1) ** gamma
        * lq_norm(fractional_laplacian(f, s2 / 2.0), q2) ** (1.0 - gamma)
    )
    return num / denom if denom > 0 else 0.0


# ---------------------------------------------------------------------------
# Trial drivers.  Each driver is deterministic given (grid, trials, seed) and
# merges per-trial results by max/sum in trial order.


def _trial_fields(grid: Grid, trials: int, seed: int, count: int = 1, decay: float = 1.0,
                  band: int | None = None):
    master = np.random.default_rng(seed)
    band = band if band is not None else min(grid.dealias_band)
    for _ in range(trials):
        seeds = master.integers(0, 2**63 - 1, size=count)
        yield tuple(
            generate_field(RandomFieldSpec(grid, band=band, seed=int(s), amplitude_decay=decay))
            for s in seeds
        )


def run_derivative_exchange_trials(
    grid: Grid,
    trials: int,
    seed: int,
    orders: tuple[int, ...] = (0, 1, 2),
    exponents: tuple[float, ...] = (0.55, 0.75, 1.0 - 1e-9),
    tolerance: float = HARD_TOLERANCE,
) -> InequalityReport:
    """Hard constant-1 property over seeded fields and sampled (i, j, m, n, s)."""
    pairs = [(i, j) for i in (1, 2, 3) for j in (1, 2, 3) if i != j]
    master = np.random.default_rng(seed)
    max_ratio = 0.0
    violations = 0
    band = min(grid.dealias_band)
    for _ in range(trials):
        fseed = int(master.integers(0, 2**63 - 1))
        f = generate_field(RandomFieldSpec(grid, band=band, seed=fseed, amplitude_decay=1.0))
        i, j = pairs[int(master.integers(0, len(pairs)))]
        m = int(orders[int(master.integers(0, len(orders)))])
        n = int(orders[int(master.integers(0, len(orders)))])
        s = float(exponents[int(master.integers(0, len(exponents)))])
        res = check_derivative_exchange(f, i, j, m, n, s)
        max_ratio = max(max_ratio, res["ratio_lhs_mid"], res["ratio_mid_high"])
        if res["ratio_lhs_mid"] > 1.0 + tolerance or res["ratio_mid_high"] > 1.0 + tolerance:
            violations += 1
    return InequalityReport(
        name="derivative-exchange",
        trials=trials,
        max_ratio=max_ratio,
        violations=violations,
        tolerance=tolerance,
        seed_range=(seed, seed),
        grid=grid.shape,
    )


def run_lebesgue_trials(
    grid: Grid,
    trials: int,
    seed: int,
    qs: tuple[float, ...] = (2.0, 4.0, 6.0, np.inf),
    ss: tuple[float, ...] = (1.6, 2.0),
    band: int | None = None,
) -> InequalityReport:
    max_ratio = 0.0
    violations = 0
    master = np.random.default_rng(seed)
    for (f,) in _trial_fields(grid, trials, seed, band=band):
        q = float(qs[int(master.integers(0, len(qs)))])
        s = float(ss[int(master.integers(0, len(ss)))])
        ratio = check_lebesgue_interpolation(f, q, s)
        if not np.isfinite(ratio):
            violations += 1
        else:
            max_ratio = max(max_ratio, ratio)
    return InequalityReport(
        name="lebesgue-interpolation",
        trials=trials,
        max_ratio=max_ratio,
        violations=violations,
        tolerance=float("inf"),
        seed_range=(seed, seed),
        grid=grid.shape,
    )


def run_triple_product_trials(
    grid: Grid,
    trials: int,
    seed: int,
    variant: str = "sym",
    band: int | None = None,
) -> InequalityReport:
    max_ratio = 0.0
    violations = 0
    master = np.random.default_rng(seed)
    if variant == "sym":
        for f, g, h in _trial_fields(grid, trials, seed, count=3, band=band):
            axes_order = [1, 2, 3]
            master.shuffle(axes_order)
            exps = tuple(float(e) for e in master.uniform(0.55, 1.0, size=3))
            ratio = check_triple_product(f, g, h, tuple(axes_order), exps)
            if not np.isfinite(ratio):
                violations += 1
            else:
                max_ratio = max(max_ratio, ratio)
        name = "triple-product-reconstructed-sym"
    elif variant == "repeated":
        for f, g in _trial_fields(grid, trials, seed, count=2, band=band):
            alpha = float(master.uniform(0.55, 1.0))
            ratio = check_triple_product_repeated(f, g, alpha)
            if not np.isfinite(ratio):
                violations += 1
            else:
                max_ratio = max(max_ratio, ratio)
        name = "triple-product-reconstructed-repeated"
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return InequalityReport(
        name=name,
        trials=trials,
        max_ratio=max_ratio,
        violations=violations,
        tolerance=float("inf"),
        seed_range=(seed, seed),
        grid=grid.shape,
    )


def run_sobolev_interpolation_trials(grid: Grid, trials: int, seed: int) -> InequalityReport:
    max_ratio = 0.0
    violations = 0
    master = np.random.default_rng(seed)
    for (f,) in _trial_fields(grid, trials, seed):
        s1 = float(master.uniform(0.2, 0.6))
        s2 = float(master.uniform(0.6, 0.95))
        gamma = float(master.uniform(0.2, 0.8))
        ratio = check_sobolev_interpolation(f, s1, s2, gamma, 4.0, 4.0)
        if not np.isfinite(ratio):
            violations += 1
        else:
            max_ratio = max(max_ratio, ratio)
    return InequalityReport(
        name="sobolev-interpolation",
        trials=trials,
        max_ratio=max_ratio,
        violations=violations,
        tolerance=float("inf"),
        seed_range=(seed, seed),
        grid=grid.shape,
    )


def run_all_checks(grid: Grid, trials: int, seed: int) -> list[InequalityReport]:
    return [
        run_derivative_exchange_trials(grid, trials, seed),
        run_lebesgue_trials(grid, trials, seed + 1),
        run_triple_product_trials(grid, trials, seed + 2, variant="sym"),
        run_triple_product_trials(grid, trials, seed + 3, variant="repeated"),
        run_sobolev_interpolation_trials(grid, trials, seed + 4),
    ]


def write_report_json(path, reports: list[InequalityReport]) -> None:
    payload = []
    for r in reports:
        d = asdict(r)
        if d["tolerance"] == float("inf"):
            d["tolerance"] = None
        payload.append(d)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
