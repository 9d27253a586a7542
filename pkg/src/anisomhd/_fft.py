"""Transform provider.

All transforms use the "forward" normalization, so a spectral array holds the
plain trigonometric-polynomial coefficients c(k) of

    f(x) = sum_k c(k) exp(i k . x).

The provider is scipy.fft; the contract the rest of the package relies on is
only the round-trip and Parseval accuracy, not the provider itself.  Worker
count is read from the AMHD_THREADS environment variable on every call so a
CLI override takes effect without re-imports.  Reductions elsewhere use fixed
numpy summation order, so results are identical for any worker count.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.fft as _sfft

THREADS_ENV = "AMHD_THREADS"
_NCPU = os.cpu_count() or 1


def workers() -> int:
    """Worker count for the FFT provider (default: all CPUs).

    pocketfft computes each transform line with the same serial kernel no
    matter how the lines are scheduled, so results are bitwise identical for
    every worker count; the default is therefore safe for reproducibility.
    """
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return _NCPU
    n = int(raw)
    if n <= 0:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def fftn(a: np.ndarray) -> np.ndarray:
    return _sfft.fftn(a, norm="forward", workers=workers())


def ifftn(c: np.ndarray) -> np.ndarray:
    return _sfft.ifftn(c, norm="forward", workers=workers())


def rfftn(a: np.ndarray) -> np.ndarray:
    return _sfft.rfftn(a, norm="forward", workers=workers())


def irfftn(c: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    return _sfft.irfftn(c, s=shape, norm="forward", workers=workers())


def rfftn_batch(a: np.ndarray) -> np.ndarray:
    """Real-to-complex transform of the last three axes for a stack of fields."""
    return _sfft.rfftn(a, axes=(-3, -2, -1), norm="forward", workers=workers())


def irfftn_batch(c: np.ndarray, shape: tuple[int, int, int]) -> np.ndarray:
    return _sfft.irfftn(c, s=shape, axes=(-3, -2, -1), norm="forward", workers=workers())
