"""Perturbation dynamics near the vertical background magnetic field.

The evolved state is the solenoidal pair (u, b) with zero mean, advanced by

    du/dt = -D_u u + P[ -(u . grad) u + (b . grad) b ] + d3 b
    db/dt = -P D_b b + P[ -(u . grad) b + (b . grad) u ] + d3 u

where D_u is the scalar velocity dissipation symbol, D_b the per-component
magnetic diffusion symbol and P the Leray projection.  The pressure gradient
is eliminated by P on the velocity rows; the magnetic diffusion is wrapped in
P as well because the per-component anisotropic symbol alone does not map
divergence-free fields to divergence-free fields, while P D_b P does and
dissipates at exactly the rate the energy budget records (P is self-adjoint
and fixes solenoidal fields).

Advective terms are evaluated pseudo-spectrally in divergence/curl form,

    -(u . grad) u + (b . grad) b = -div(u x u - b x b)   (outer products)
    -(u . grad) b + (b . grad) u = curl(u x b),

which are identical to the convective forms for exactly solenoidal input and
need 15 transforms per stage instead of 30.  Products are dealiased by the
2/3 rule; band-limited states stay band-limited, so the L2 energy identity
holds to stepping accuracy with no aliasing residue.

Time stepping is integrating-factor RK4: the dissipation (a per-mode scalar
for u, a per-mode 3x3 symmetric matrix for b) is applied through exact
exponential factors, the coupling and advection explicitly.  The stepper
also accumulates the three dissipation time-integrals with the same RK4
stage weights, so the discrete energy identity

    (1/2)||(u,b)(T)||^2 - (1/2)||(u,b)(0)||^2 + integral of dissipation = 0

is satisfied to the integrator's own O(dt^4) accuracy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from . import _fft
from .dissipation import (
    DissipationSpec,
    magnetic_dissipation_symbol,
    velocity_dissipation_symbol,
)
from .spectral import Grid, SpectralScalar, VectorField

__all__ = [
    "MhdState",
    "BlowUpError",
    "nonlinear_rhs",
    "step_ifrk4",
    "Stepper",
    "linear_mode_oracle",
    "linear_generator",
    "recover_pressure",
    "full_to_half",
    "half_to_full",
    "state_to_half",
    "half_to_state",
]

SOLENOIDAL_TOL = 1e-10


class BlowUpError(RuntimeError):
    """Raised when a non-finite coefficient appears during stepping."""

    def __init__(self, time: float, max_amplitude: float):
        self.time = time
        self.max_amplitude = max_amplitude
        super().__init__(
            f"non-finite state at t={time:.6g} (last finite max amplitude {max_amplitude:.3e})"
        )


@dataclass
class MhdState:
    """Solenoidal velocity/magnetic perturbation pair at time t."""

    u: VectorField
    b: VectorField
    t: float = 0.0

    def __post_init__(self) -> None:
        if self.u.grid != self.b.grid:
            raise ValueError("u and b must share a grid")
        if self.t < 0:
            raise ValueError("time must be >= 0")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @classmethod
    def zeros(cls, grid: Grid, t: float = 0.0) -> "MhdState":
        return cls(VectorField.zeros(grid), VectorField.zeros(grid), t)

    def validate(self, tol: float = SOLENOIDAL_TOL) -> None:
        for name, f in (("u", self.u), ("b", self.b)):
            res = f.divergence_residual()
            if res > tol:
                raise ValueError(f"{name} is not solenoidal: divergence residual {res:.3e}")
            mean = max(abs(c.coeffs[0, 0, 0]) for c in f.components)
            if mean > tol:
                raise ValueError(f"{name} has nonzero mean mode {mean:.3e}")

    def copy(self) -> "MhdState":
        return MhdState(self.u.copy(), self.b.copy(), self.t)

    def energy_l2(self) -> float:
        """(1/2) ||(u, b)||^2 in L2."""
        return 0.5 * (self.u.l2_norm_sq() + self.b.l2_norm_sq())


# ---------------------------------------------------------------------------
# Full <-> half spectrum conversions (states are Hermitian, so the half
# spectrum along the third axis is lossless).


def full_to_half(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    m3 = grid.n3 // 2 + 1
    return np.ascontiguousarray(coeffs[..., :m3])


def half_to_full(grid: Grid, half: np.ndarray) -> np.ndarray:
    n3 = grid.n3
    m3 = n3 // 2 + 1
    out = np.empty(half.shape[:-1] + (n3,), dtype=np.complex128)
    out[..., :m3] = half
    flipped = np.roll(half[..., ::-1, ::-1, :], 1, axis=(-3, -2))
    out[..., m3:] = np.conj(flipped[..., m3 - 2 : 0 : -1])
    return out


def state_to_half(state: MhdState) -> tuple[np.ndarray, np.ndarray]:
    g = state.grid
    uh = np.stack([full_to_half(g, c.coeffs) for c in state.u.components])
    bh = np.stack([full_to_half(g, c.coeffs) for c in state.b.components])
    return uh, bh


def half_to_state(grid: Grid, uh: np.ndarray, bh: np.ndarray, t: float) -> MhdState:
    u = VectorField.from_stack(grid, half_to_full(grid, uh))
    b = VectorField.from_stack(grid, half_to_full(grid, bh))
    return MhdState(u, b, t)


# ---------------------------------------------------------------------------
# Right-hand side evaluation on half-spectrum stacks.


def _advection_half(
    grid: Grid, uh: np.ndarray, bh: np.ndarray, want_umax: bool = False
) -> tuple[np.ndarray, np.ndarray, float]:
    """Dealiased advective terms in divergence/curl form.

    One batched inverse transform produces the six physical fields, one
    batched forward transform the nine quadratic products (six symmetric
    entries of u x u - b x b, three of u x b).
    """
    shape = grid.shape
    phys = _fft.irfftn_batch(np.concatenate([uh, bh], axis=0), shape)
    u1, u2, u3, b1, b2, b3 = phys
    umax = float(np.sqrt(np.max(u1 * u1 + u2 * u2 + u3 * u3))) if want_umax else 0.0

    prods = np.empty((9,) + shape)
    tmp = np.empty(shape)
    for idx, (fa, fb, ga, gb) in enumerate(
        (
            (u1, u1, b1, b1),
            (u2, u2, b2, b2),
            (u3, u3, b3, b3),
            (u1, u2, b1, b2),
            (u1, u3, b1, b3),
            (u2, u3, b2, b3),
            (u2, b3, u3, b2),
            (u3, b1, u1, b3),
            (u1, b2, u2, b1),
        )
    ):
        np.multiply(fa, fb, out=prods[idx])
        np.multiply(ga, gb, out=tmp)
        prods[idx] -= tmp
    t11, t22, t33, t12, t13, t23, w1, w2, w3 = _fft.rfftn_batch(prods)

    ik1, ik2, ik3 = grid.ik_dealias_half
    du = np.empty_like(uh)
    du[0] = ik1 * t11 + ik2 * t12 + ik3 * t13
    du[1] = ik1 * t12 + ik2 * t22 + ik3 * t23
    du[2] = ik1 * t13 + ik2 * t23 + ik3 * t33
    np.negative(du, out=du)
    db = np.empty_like(bh)
    db[0] = ik2 * w3 - ik3 * w2
    db[1] = ik3 * w1 - ik1 * w3
    db[2] = ik1 * w2 - ik2 * w1
    return du, db, umax


def _rhs_half(
    grid: Grid,
    uh: np.ndarray,
    bh: np.ndarray,
    *,
    with_advection: bool = True,
    with_coupling: bool = True,
    project_u: bool = True,
    project_b: bool = True,
    want_umax: bool = False,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Explicit (non-dissipative) part of the right-hand side."""
    umax = 0.0
    if with_advection:
        du, db, umax = _advection_half(grid, uh, bh, want_umax=want_umax)
    else:
        du = np.zeros_like(uh)
        db = np.zeros_like(bh)
    if with_coupling:
        k3 = grid.kvec_half[2]
        du += 1j * k3 * bh
        db += 1j * k3 * uh
    if project_u:
        _project_inplace(grid, du)
    if project_b:
        _project_inplace(grid, db)
    return du, db, umax


def _project_inplace(grid: Grid, stack: np.ndarray) -> None:
    k1, k2, k3 = grid.kvec_half
    kdot = k1 * stack[0] + k2 * stack[1] + k3 * stack[2]
    kdot *= grid.inv_ksq_half
    stack[0] -= k1 * kdot
    stack[1] -= k2 * kdot
    stack[2] -= k3 * kdot


def nonlinear_rhs(state: MhdState, spec: DissipationSpec) -> tuple[VectorField, VectorField]:
    """Advective and coupling terms of the system, dissipation excluded.

    Returns (du, db) with du Leray-projected; db is divergence-free by
    structure and is returned unprojected.  Input fields must be solenoidal.
    """
    del spec  # the explicit part does not depend on the dissipation parameters
    state.validate()
    g = state.grid
    uh, bh = state_to_half(state)
    du, db, _ = _rhs_half(g, uh, bh, project_u=True, project_b=False)
    return (
        VectorField.from_stack(g, half_to_full(g, du)),
        VectorField.from_stack(g, half_to_full(g, db)),
    )


# ---------------------------------------------------------------------------
# Integrating-factor RK4 stepper.


def _apply_mats(mats: np.ndarray, stack: np.ndarray) -> np.ndarray:
    """Apply per-mode 3x3 matrices (shape (3, 3, ...)) to a (3, ...) stack."""
    out = np.empty_like(stack)
    for i in range(3):
        out[i] = mats[i, 0] * stack[0] + mats[i, 1] * stack[1] + mats[i, 2] * stack[2]
    return out


class Stepper:
    """Integrating-factor RK4 for one (grid, dissipation, dt) combination.

    Precomputes the exact half-step exponential of the velocity symbol and of
    the Leray-projected magnetic diffusion matrix per mode.  ``step`` advances
    stacked half-spectrum arrays and the running dissipation integrals
    (horizontal, vertical, magnetic; L2-weighted, RK4 stage quadrature).
    """

    def __init__(
        self,
        grid: Grid,
        spec: DissipationSpec,
        dt: float,
        *,
        include_advection: bool = True,
        include_coupling: bool = True,
    ):
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.grid = grid
        self.spec = spec
        self.dt = float(dt)
        self.include_advection = include_advection
        self.include_coupling = include_coupling

        k = grid.kvec_half
        a2 = 2.0 * spec.alpha
        self._w_horiz = spec.nu1 * np.abs(k[0]) ** a2 + spec.nu2 * np.abs(k[1]) ** a2
        self._w_vert = float(spec.sigma) * spec.nu3 * np.abs(k[2]) ** a2
        du_symbol = self._w_horiz + self._w_vert
        self._exp_u_half = np.exp(-0.5 * dt * du_symbol)

        self._db_symbol = np.stack(
            [
                np.broadcast_to(magnetic_dissipation_symbol(spec, i, k), grid.half_shape)
                for i in (1, 2, 3)
            ]
        )
        self._exp_b_half = self._projected_diffusion_exp(0.5 * dt)

        pw = grid.parseval_weight_half * grid.volume
        self._gw_horiz = pw * self._w_horiz
        self._gw_vert = pw * self._w_vert
        self._gw_mag = pw[None] * self._db_symbol

        self.last_umax = 0.0
        self._kmax = grid.wavenumber_scale * max(grid.dealias_band)

    def _projected_diffusion_exp(self, tau: float) -> np.ndarray:
        """exp(-tau * P D_b P) per mode, shape (3, 3, n1, n2, m3)."""
        g = self.grid
        k1, k2, k3 = (np.broadcast_to(a, g.half_shape).ravel() for a in g.kvec_half)
        kv = np.stack([k1, k2, k3], axis=1)
        ksq = np.sum(kv**2, axis=1)
        inv = np.divide(1.0, ksq, out=np.zeros_like(ksq), where=ksq > 0)
        proj = np.eye(3)[None] - kv[:, :, None] * kv[:, None, :] * inv[:, None, None]
        d = self._db_symbol.reshape(3, -1).T
        mat = np.einsum("mij,mj,mjk->mik", proj, d, proj)
        evals, evecs = np.linalg.eigh(mat)
        evals = np.maximum(evals, 0.0)
        expm = np.einsum("mij,mj,mkj->mik", evecs, np.exp(-tau * evals), evecs)
        return np.ascontiguousarray(
            expm.reshape(g.half_shape + (3, 3)).transpose(3, 4, 0, 1, 2)
        )

    def _rhs(
        self, uh: np.ndarray, bh: np.ndarray, want_umax: bool = False
    ) -> tuple[np.ndarray, np.ndarray, float]:
        return _rhs_half(
            self.grid,
            uh,
            bh,
            with_advection=self.include_advection,
            with_coupling=self.include_coupling,
            want_umax=want_umax,
        )

    def dissipation_rates(self, uh: np.ndarray, bh: np.ndarray) -> np.ndarray:
        """Instantaneous (horizontal, vertical, magnetic) L2 dissipation rates."""
        au = (uh.real**2 + uh.imag**2).sum(axis=0)
        ab = bh.real**2 + bh.imag**2
        return np.array(
            [
                float(np.sum(self._gw_horiz * au)),
                float(np.sum(self._gw_vert * au)),
                float(np.sum(self._gw_mag * ab)),
            ]
        )

    def _warn_cfl(self, umax: float) -> None:
        self.last_umax = umax
        if self.dt * umax * self._kmax > 0.5:
            warnings.warn(
                f"advective CFL exceeded: dt*max|u|*kmax = {self.dt * umax * self._kmax:.3f} > 0.5",
                RuntimeWarning,
                stacklevel=4,
            )

    def step(
        self,
        uh: np.ndarray,
        bh: np.ndarray,
        t: float,
        diss: np.ndarray | None = None,
        check_cfl: bool = False,
    ) -> tuple[np.ndarray, np.ndarray, float, np.ndarray]:
        """Advance one step; returns (uh, bh, t + dt, dissipation integrals)."""
        dt = self.dt
        eu2 = self._exp_u_half
        eb2 = self._exp_b_half
        if diss is None:
            diss = np.zeros(3)

        # overflow in a diverging run is detected after the stage arithmetic
        with np.errstate(invalid="ignore", over="ignore"):
            return self._step_stages(uh, bh, t, diss, check_cfl, dt, eu2, eb2)

    def _step_stages(self, uh, bh, t, diss, check_cfl, dt, eu2, eb2):
        k1u, k1b, umax = self._rhs(uh, bh, want_umax=check_cfl)
        if check_cfl and self.include_advection:
            self._warn_cfl(umax)
        g1 = self.dissipation_rates(uh, bh)

        eu2_u0 = eu2 * uh
        eb2_b0 = _apply_mats(eb2, bh)
        eu2_k1u = eu2 * k1u
        eb2_k1b = _apply_mats(eb2, k1b)

        y2u = eu2_u0 + (0.5 * dt) * eu2_k1u
        y2b = eb2_b0 + (0.5 * dt) * eb2_k1b
        k2u, k2b, _ = self._rhs(y2u, y2b)
        g2 = self.dissipation_rates(y2u, y2b)

        y3u = eu2_u0 + (0.5 * dt) * k2u
        y3b = eb2_b0 + (0.5 * dt) * k2b
        k3u, k3b, _ = self._rhs(y3u, y3b)
        g3 = self.dissipation_rates(y3u, y3b)

        eu_u0 = eu2 * eu2_u0
        eb_b0 = _apply_mats(eb2, eb2_b0)
        y4u = eu_u0 + dt * (eu2 * k3u)
        y4b = eb_b0 + dt * _apply_mats(eb2, k3b)
        k4u, k4b, _ = self._rhs(y4u, y4b)
        g4 = self.dissipation_rates(y4u, y4b)

        # Combine in place, consuming the stage arrays:
        #   u <- Eu u0 + dt/6 (Eu k1 + 2 Eu2 (k2 + k3) + k4)
        k2u += k3u
        k2u *= eu2
        k2u *= 2.0
        eu2_k1u *= eu2
        k2u += eu2_k1u
        k2u += k4u
        k2u *= dt / 6.0
        u_new = eu_u0
        u_new += k2u

        k2b += k3b
        k2b = _apply_mats(eb2, k2b)
        k2b *= 2.0
        k2b += _apply_mats(eb2, eb2_k1b)
        k2b += k4b
        k2b *= dt / 6.0
        b_new = eb_b0
        b_new += k2b

        diss = diss + (dt / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4)

        if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(b_new))):
            amp = max(
                float(np.max(np.abs(uh))),
                float(np.max(np.abs(bh))),
            )
            raise BlowUpError(t + dt, amp)
        return u_new, b_new, t + dt, diss


@lru_cache(maxsize=8)
def _cached_stepper(
    grid: Grid,
    spec: DissipationSpec,
    dt: float,
    include_advection: bool,
    include_coupling: bool,
) -> Stepper:
    return Stepper(
        grid,
        spec,
        dt,
        include_advection=include_advection,
        include_coupling=include_coupling,
    )


def step_ifrk4(
    state: MhdState,
    spec: DissipationSpec,
    dt: float,
    *,
    include_advection: bool = True,
    include_coupling: bool = True,
) -> MhdState:
    """Advance a state by one integrating-factor RK4 step."""
    stepper = _cached_stepper(state.grid, spec, float(dt), include_advection, include_coupling)
    uh, bh = state_to_half(state)
    uh, bh, t, _ = stepper.step(uh, bh, state.t, check_cfl=True)
    return half_to_state(state.grid, uh, bh, t)


# ---------------------------------------------------------------------------
# Single-mode linear oracle.


def linear_generator(spec: DissipationSpec, k) -> np.ndarray:
    """6x6 generator of the linearized per-mode dynamics, projection included."""
    kv = np.asarray(k, dtype=float)
    if kv.shape != (3,) or np.all(kv == 0):
        raise ValueError("wavevector must be a nonzero triple")
    ksq = float(kv @ kv)
    proj = np.eye(3) - np.outer(kv, kv) / ksq
    du = float(velocity_dissipation_symbol(spec, kv))
    db = np.diag([float(magnetic_dissipation_symbol(spec, i, kv)) for i in (1, 2, 3)])
    coup = 1j * kv[2] * proj
    a = np.zeros((6, 6), dtype=np.complex128)
    a[:3, :3] = -du * proj
    a[:3, 3:] = coup
    a[3:, :3] = coup
    a[3:, 3:] = -proj @ db @ proj
    return a


def linear_mode_oracle(spec: DissipationSpec, k, init, t: float) -> np.ndarray:
    """Exact single-mode solution of the linearized system via expm.

    ``init`` holds the six complex amplitudes (u1, u2, u3, b1, b2, b3); both
    triples must be orthogonal to k.
    """
    y0 = np.asarray(init, dtype=np.complex128)
    if y0.shape != (6,):
        raise ValueError("init must hold six complex amplitudes")
    kv = np.asarray(k, dtype=float)
    a = linear_generator(spec, kv)
    scale = max(1.0, float(np.max(np.abs(y0))))
    for part, name in ((y0[:3], "u"), (y0[3:], "b")):
        if abs(kv @ part) > 1e-8 * scale:
            raise ValueError(f"initial {name} amplitudes are not orthogonal to k")
    return scipy.linalg.expm(a * t) @ y0


# ---------------------------------------------------------------------------
# Pressure diagnostic.


def recover_pressure(state: MhdState, spec: DissipationSpec) -> SpectralScalar:
    """Solve the mode-wise Poisson relation for the pressure.

    p is defined so that F - grad p is solenoidal, where F is the unprojected
    velocity right-hand side (dissipation, advection and coupling); the mean
    mode is set to zero.  Diagnostic only: stepping never uses it.
    """
    state.validate()
    g = state.grid
    uh, bh = state_to_half(state)
    fu, _, _ = _rhs_half(g, uh, bh, project_u=False, project_b=False)
    k = g.kvec_half
    du_symbol = velocity_dissipation_symbol(spec, k)
    fu = fu - du_symbol * uh
    ksq = g.ksq_half
    inv = np.divide(1.0, ksq, out=np.zeros_like(ksq), where=ksq > 0)
    phat = -1j * (k[0] * fu[0] + k[1] * fu[1] + k[2] * fu[2]) * inv
    return SpectralScalar(g, half_to_full(g, phat))
