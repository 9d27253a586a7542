"""Seeded band-limited random test fields.

Fields are drawn as complex Gaussian coefficients under a |k|^(-decay)
envelope, restricted to |k_axis| <= band, Hermitian-symmetrized and made
mean-zero, so the physical field is real and the draw is reproducible
bit-for-bit from the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Grid, SpectralScalar, integer_wavenumbers

__all__ = ["RandomFieldSpec", "generate_field"]


@dataclass(frozen=True)
class RandomFieldSpec:
    grid: Grid
    band: int
    seed: int
    amplitude_decay: float = 1.5

    def __post_init__(self) -> None:
        limit = min(self.grid.dealias_band)
        if not 1 <= self.band <= limit:
            raise ValueError(f"band must lie in [1, {limit}] for grid {self.grid.shape}")
        if self.amplitude_decay < 0:
            raise ValueError("amplitude_decay must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def generate_field(spec: RandomFieldSpec) -> SpectralScalar:
    """Draw one deterministic random field for the given spec."""
    g = spec.grid
    rng = np.random.default_rng(spec.seed)
    raw = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)

    k1 = integer_wavenumbers(g.n1)[:, None, None]
    k2 = integer_wavenumbers(g.n2)[None, :, None]
    k3 = integer_wavenumbers(g.n3)[None, None, :]
    kmag = np.sqrt(k1**2 + k2**2 + k3**2).astype(float)
    envelope = np.maximum(kmag, 1.0) ** (-spec.amplitude_decay)
    in_band = (np.abs(k1) <= spec.band) & (np.abs(k2) <= spec.band) & (np.abs(k3) <= spec.band)

    coeffs = raw * envelope * in_band
    coeffs[0, 0, 0] = 0.0
    return SpectralScalar(g, coeffs).hermitian_symmetrized()
