"""Dissipation parameters and their Fourier symbols.

The velocity field is damped along each axis by a directional fractional
multiplier, with the vertical (third-axis) term switched by sigma:

    D_u(k) = nu1 |k1|^(2 alpha) + nu2 |k2|^(2 alpha) + sigma nu3 |k3|^(2 alpha).

Each magnetic component is diffused only along the two axes other than its
own index:

    D_b,i(k) = mu (|k_i'|^(2 beta) + |k_i''|^(2 beta)),   {i, i', i''} = {1, 2, 3}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DissipationSpec",
    "MAGNETIC_DIFFUSION_AXES",
    "velocity_dissipation_symbol",
    "magnetic_dissipation_symbol",
]

# Axes along which magnetic component i diffuses: every axis except i.
MAGNETIC_DIFFUSION_AXES: dict[int, tuple[int, int]] = {1: (2, 3), 2: (1, 3), 3: (1, 2)}


@dataclass(frozen=True)
class DissipationSpec:
    """Fractional orders, per-axis viscosities, sigma switch and diffusivity.

    alpha and beta must lie in (1/2, 1] unless ``allow_out_of_range`` is set,
    which marks a deliberately out-of-theory experiment.
    """

    alpha: float = 1.0
    beta: float = 1.0
    nu1: float = 1.0
    nu2: float = 1.0
    nu3: float = 1.0
    sigma: int = 1
    mu: float = 1.0
    allow_out_of_range: bool = False

    def __post_init__(self) -> None:
        if self.sigma not in (0, 1):
            raise ValueError(f"sigma must be 0 or 1, got {self.sigma}")
        for name, v in (("nu1", self.nu1), ("nu2", self.nu2), ("nu3", self.nu3), ("mu", self.mu)):
            if v < 0:
                raise ValueError(f"{name} must be >= 0, got {v}")
        if not self.allow_out_of_range:
            for name, v in (("alpha", self.alpha), ("beta", self.beta)):
                if not 0.5 < v <= 1.0:
                    raise ValueError(
                        f"{name}={v} outside (1/2, 1]; pass allow_out_of_range=True "
                        "to run an out-of-range experiment"
                    )

    def replace(self, **kwargs) -> "DissipationSpec":
        from dataclasses import replace as _replace

        return _replace(self, **kwargs)


def velocity_dissipation_symbol(spec: DissipationSpec, k) -> np.ndarray | float:
    """nu1 |k1|^(2a) + nu2 |k2|^(2a) + sigma nu3 |k3|^(2a), vectorized over k.

    ``k`` is a triple of wavenumber components (scalars or broadcastable
    arrays, in physical units).
    """
    k1, k2, k3 = k
    a2 = 2.0 * spec.alpha
    out = (
        spec.nu1 * np.abs(k1) ** a2
        + spec.nu2 * np.abs(k2) ** a2
        + spec.sigma * spec.nu3 * np.abs(k3) ** a2
    )
    return out if isinstance(out, np.ndarray) else float(out)


def magnetic_dissipation_symbol(spec: DissipationSpec, component: int, k) -> np.ndarray | float:
    """mu (|k_i'|^(2b) + |k_i''|^(2b)) for magnetic component i."""
    if component not in (1, 2, 3):
        raise ValueError(f"component must be 1, 2 or 3, got {component}")
    b2 = 2.0 * spec.beta
    ia, ib = MAGNETIC_DIFFUSION_AXES[component]
    out = spec.mu * (np.abs(k[ia - 1]) ** b2 + np.abs(k[ib - 1]) ** b2)
    return out if isinstance(out, np.ndarray) else float(out)
