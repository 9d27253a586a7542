"""Periodic-box spectral fields and Fourier-multiplier operators.

Real scalar fields on a uniform n1 x n2 x n3 grid over [0, L)^3 are stored as
full complex coefficient arrays indexed by integer wavenumbers

    k_i in {-n_i/2 + 1, ..., n_i/2},

scaled by 2*pi/L, with the Hermitian symmetry c(-k) = conj(c(k)) that makes
the physical field real.  Every operator in this module is a diagonal Fourier
multiplier except the Leray projection, which mixes the three components of a
vector field mode by mode through I - k k^T / |k|^2.

Conventions:
  * transforms are "forward" normalized (see ``_fft``), so coefficients are
    the trigonometric-polynomial coefficients themselves;
  * sin(x1) therefore has c(+-e1) = -+ i/2, and |c| = 1/2;
  * the k = 0 (mean) mode is left untouched by the Leray projection and the
    dynamics keep it at zero for mean-zero data;
  * dealiasing is the sharp 2/3 rule: zero every mode with any
    |k_axis| > floor(n_axis / 3).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _fft

__all__ = [
    "Grid",
    "SpectralScalar",
    "VectorField",
    "integer_wavenumbers",
    "directional_fractional",
    "fractional_laplacian",
    "partial_derivative",
    "dealias",
    "leray_project",
    "inner_product",
]


def integer_wavenumbers(n: int) -> np.ndarray:
    """Integer wavenumbers along one axis, FFT-ordered, Nyquist at +n/2."""
    k = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
    k[n // 2] = n // 2
    return k


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, length)^3.

    Axis sizes must be even and at least 8 so the 2/3-rule band is nonempty
    and the Nyquist plane is unambiguous.
    """

    n1: int
    n2: int
    n3: int
    length: float = 2.0 * np.pi

    def __post_init__(self) -> None:
        for n in (self.n1, self.n2, self.n3):
            if n < 8 or n % 2 != 0:
                raise ValueError(f"grid sizes must be even and >= 8, got {self.shape}")
        if self.length <= 0:
            raise ValueError("box length must be positive")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3)

    @property
    def npoints(self) -> int:
        return self.n1 * self.n2 * self.n3

    @property
    def volume(self) -> float:
        return self.length**3

    @property
    def cell_volume(self) -> float:
        return self.volume / self.npoints

    @property
    def wavenumber_scale(self) -> float:
        """Physical wavenumber per integer index, 2*pi/length."""
        return 2.0 * np.pi / self.length

    @property
    def dealias_band(self) -> tuple[int, int, int]:
        """Largest retained |k_axis| under the 2/3 rule."""
        return (self.n1 // 3, self.n2 // 3, self.n3 // 3)

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Physical sample coordinates along each axis."""
        h = self.length
        return tuple(np.arange(n) * (h / n) for n in self.shape)  # type: ignore[return-value]

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x1, x2, x3 = self.axes()
        return np.meshgrid(x1, x2, x3, indexing="ij")  # type: ignore[return-value]

    @cached_property
    def kvec(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable physical wavenumber arrays for the full spectrum."""
        s = self.wavenumber_scale
        k1 = s * integer_wavenumbers(self.n1).astype(float)
        k2 = s * integer_wavenumbers(self.n2).astype(float)
        k3 = s * integer_wavenumbers(self.n3).astype(float)
        return (
            k1[:, None, None],
            k2[None, :, None],
            k3[None, None, :],
        )

    @cached_property
    def ksq(self) -> np.ndarray:
        k1, k2, k3 = self.kvec
        return k1**2 + k2**2 + k3**2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        b1, b2, b3 = self.dealias_band
        a1 = np.abs(integer_wavenumbers(self.n1)) <= b1
        a2 = np.abs(integer_wavenumbers(self.n2)) <= b2
        a3 = np.abs(integer_wavenumbers(self.n3)) <= b3
        return a1[:, None, None] & a2[None, :, None] & a3[None, None, :]

    # Half-spectrum (rfft layout along the third axis) tables.  These back the
    # time-stepping hot path; the public field types stay full-spectrum.

    @property
    def half_shape(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3 // 2 + 1)

    @cached_property
    def kvec_half(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        s = self.wavenumber_scale
        k1 = s * integer_wavenumbers(self.n1).astype(float)
        k2 = s * integer_wavenumbers(self.n2).astype(float)
        k3 = s * np.arange(self.n3 // 2 + 1, dtype=float)
        return (
            k1[:, None, None],
            k2[None, :, None],
            k3[None, None, :],
        )

    @cached_property
    def ksq_half(self) -> np.ndarray:
        k1, k2, k3 = self.kvec_half
        return k1**2 + k2**2 + k3**2

    @cached_property
    def dealias_mask_half(self) -> np.ndarray:
        b1, b2, b3 = self.dealias_band
        a1 = np.abs(integer_wavenumbers(self.n1)) <= b1
        a2 = np.abs(integer_wavenumbers(self.n2)) <= b2
        a3 = np.arange(self.n3 // 2 + 1) <= b3
        return a1[:, None, None] & a2[None, :, None] & a3[None, None, :]

    @cached_property
    def parseval_weight_half(self) -> np.ndarray:
        """Multiplicity of each stored half-spectrum mode in the full spectrum."""
        w = np.full(self.n3 // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return np.broadcast_to(w[None, None, :], self.half_shape)

    @cached_property
    def inv_ksq(self) -> np.ndarray:
        ksq = self.ksq
        inv = np.divide(1.0, ksq, out=np.zeros_like(ksq), where=ksq > 0)
        return inv

    @cached_property
    def inv_ksq_half(self) -> np.ndarray:
        ksq = self.ksq_half
        return np.divide(1.0, ksq, out=np.zeros_like(ksq), where=ksq > 0)

    @cached_property
    def ik_dealias_half(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """i * k_axis with the 2/3-rule mask folded in, half-spectrum layout."""
        mask = self.dealias_mask_half
        k1, k2, k3 = self.kvec_half
        return (1j * k1 * mask, 1j * k2 * mask, 1j * k3 * mask)


def _as_grid_array(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if coeffs.shape != grid.shape:
        raise ValueError(f"coefficient shape {coeffs.shape} does not match grid {grid.shape}")
    return coeffs


def _conj_reverse(coeffs: np.ndarray) -> np.ndarray:
    """conj(c(-k)) with -k taken modulo the grid."""
    return np.conj(np.roll(coeffs[::-1, ::-1, ::-1], 1, axis=(0, 1, 2)))


@dataclass
class SpectralScalar:
    """Fourier coefficients of a real scalar field on a periodic grid."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        self.coeffs = _as_grid_array(self.grid, self.coeffs)

    @classmethod
    def from_physical(cls, grid: Grid, values: np.ndarray) -> "SpectralScalar":
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"sample shape {values.shape} does not match grid {grid.shape}")
        return cls(grid, _fft.fftn(values))

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralScalar":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    def to_physical(self) -> np.ndarray:
        return _fft.ifftn(self.coeffs).real

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralScalar":
        return SpectralScalar(self.grid, coeffs)

    def copy(self) -> "SpectralScalar":
        return SpectralScalar(self.grid, self.coeffs.copy())

    def hermitian_defect(self) -> float:
        """max |c(k) - conj(c(-k))| relative to the largest coefficient."""
        defect = np.max(np.abs(self.coeffs - _conj_reverse(self.coeffs)))
        scale = max(1.0, float(np.max(np.abs(self.coeffs))))
        return float(defect) / scale

    def hermitian_symmetrized(self) -> "SpectralScalar":
        return self.with_coeffs(0.5 * (self.coeffs + _conj_reverse(self.coeffs)))

    def l2_norm_sq(self) -> float:
        """Squared L2 norm via Parseval, volume factor included."""
        return self.grid.volume * float(np.vdot(self.coeffs, self.coeffs).real)


@dataclass
class VectorField:
    """Three spectral scalars on a shared grid, usually solenoidal."""

    components: tuple[SpectralScalar, SpectralScalar, SpectralScalar]

    def __post_init__(self) -> None:
        g = self.components[0].grid
        if len(self.components) != 3 or any(c.grid != g for c in self.components):
            raise ValueError("VectorField needs three components on one grid")
        self.components = tuple(self.components)  # type: ignore[assignment]

    @classmethod
    def from_stack(cls, grid: Grid, stack: np.ndarray) -> "VectorField":
        return cls(tuple(SpectralScalar(grid, stack[i]) for i in range(3)))  # type: ignore[arg-type]

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls.from_stack(grid, np.zeros((3,) + grid.shape, dtype=np.complex128))

    @classmethod
    def from_physical(cls, grid: Grid, values: np.ndarray) -> "VectorField":
        return cls(tuple(SpectralScalar.from_physical(grid, values[i]) for i in range(3)))  # type: ignore[arg-type]

    @property
    def grid(self) -> Grid:
        return self.components[0].grid

    def stack(self) -> np.ndarray:
        return np.stack([c.coeffs for c in self.components])

    def to_physical(self) -> np.ndarray:
        return np.stack([c.to_physical() for c in self.components])

    def copy(self) -> "VectorField":
        return VectorField(tuple(c.copy() for c in self.components))  # type: ignore[arg-type]

    def divergence_residual(self) -> float:
        """max over modes of |k . c(k)| / max(1, |c(k)|)."""
        k1, k2, k3 = self.grid.kvec
        c = self.stack()
        kdot = k1 * c[0] + k2 * c[1] + k3 * c[2]
        mag = np.sqrt(np.abs(c[0]) ** 2 + np.abs(c[1]) ** 2 + np.abs(c[2]) ** 2)
        return float(np.max(np.abs(kdot) / np.maximum(1.0, mag)))

    def is_solenoidal(self, tol: float = 1e-10) -> bool:
        return self.divergence_residual() <= tol

    def l2_norm_sq(self) -> float:
        return sum(c.l2_norm_sq() for c in self.components)


def _require_same_grid(f: SpectralScalar, g: SpectralScalar) -> None:
    if f.grid != g.grid:
        raise ValueError("operands live on different grids")


def directional_fractional(f: SpectralScalar, axis: int, s: float) -> SpectralScalar:
    """Apply the single-axis fractional multiplier |k_axis|^s.

    ``s = 0`` is the identity (0^0 = 1 by multiplier convention); any mode
    with k_axis = 0 is annihilated for s > 0.
    """
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}")
    if s < 0:
        raise ValueError(f"fractional order must be >= 0, got {s}")
    k = f.grid.kvec[axis - 1]
    return f.with_coeffs(np.abs(k) ** s * f.coeffs)


def fractional_laplacian(f: SpectralScalar, beta: float) -> SpectralScalar:
    """Apply |k|^(2*beta), the Fourier symbol of the fractional Laplacian."""
    if beta < 0:
        raise ValueError(f"fractional order must be >= 0, got {beta}")
    return f.with_coeffs(f.grid.ksq**beta * f.coeffs)


def partial_derivative(f: SpectralScalar, axis: int, order: int = 1) -> SpectralScalar:
    """Apply (i k_axis)^order; exact on trigonometric polynomials."""
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}")
    if order < 1:
        raise ValueError(f"derivative order must be >= 1, got {order}")
    k = f.grid.kvec[axis - 1]
    return f.with_coeffs((1j * k) ** order * f.coeffs)


def dealias(f: SpectralScalar) -> SpectralScalar:
    """Sharp 2/3-rule truncation; idempotent."""
    return f.with_coeffs(f.coeffs * f.grid.dealias_mask)


def project_stack(grid: Grid, stack: np.ndarray, half: bool = False) -> np.ndarray:
    """Leray-project a stacked (3, ...) coefficient array in place-free form.

    Per mode k != 0: c <- c - k (k . c)/|k|^2.  The mean mode is unchanged.
    """
    k1, k2, k3 = grid.kvec_half if half else grid.kvec
    inv = grid.inv_ksq_half if half else grid.inv_ksq
    kdot = (k1 * stack[0] + k2 * stack[1] + k3 * stack[2]) * inv
    return np.stack([stack[0] - k1 * kdot, stack[1] - k2 * kdot, stack[2] - k3 * kdot])


def leray_project(v: VectorField) -> VectorField:
    """Orthogonal projection onto divergence-free fields, mode by mode."""
    return VectorField.from_stack(v.grid, project_stack(v.grid, v.stack()))


def inner_product(f: SpectralScalar, g: SpectralScalar) -> float:
    """L2 inner product of two real fields via Parseval."""
    _require_same_grid(f, g)
    return f.grid.volume * float(np.vdot(g.coeffs, f.coeffs).real)
