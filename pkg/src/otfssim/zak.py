"""Discrete Zak transform modem and frame cyclic prefix handling.

A delay-Doppler grid X (M delay rows, N Doppler columns) is modulated to
time samples by an inverse DFT across the Doppler axis followed by
column-major vectorization:

    s[l + n*M] = (1/sqrt(N)) * sum_k X[l, k] * exp(2j*pi*n*k/N)

Both directions are unitary, so norms are preserved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import unvec, vec

__all__ = ["FrameConfig", "idzt", "dzt", "add_cp", "remove_cp"]


@dataclass(frozen=True)
class FrameConfig:
    """Grid geometry and channel spread bounds, in bin/sample units."""

    M: int = 32        # delay bins per frame
    N: int = 16        # Doppler bins per frame
    cp_len: int = 8    # frame cyclic prefix length in samples
    ell_max: int = 8   # maximum channel delay in bins
    k_max: int = 4     # maximum channel Doppler in bins

    @property
    def grid_size(self) -> int:
        return self.M * self.N


def idzt(grid):
    """Delay-Doppler grid -> length M*N time vector."""
    grid = np.asarray(grid, dtype=np.complex128)
    if grid.ndim != 2:
        raise ValueError("expected a 2-d delay-Doppler grid")
    n = grid.shape[1]
    return vec(np.fft.ifft(grid, axis=1) * np.sqrt(n))


def dzt(samples, n_rows, n_cols):
    """Length M*N time vector -> delay-Doppler grid (inverse of idzt)."""
    r = unvec(np.asarray(samples, dtype=np.complex128), n_rows, n_cols)
    return np.fft.fft(r, axis=1) / np.sqrt(n_cols)


def add_cp(samples, cp_len):
    """Prepend the last ``cp_len`` samples as a cyclic prefix."""
    samples = np.asarray(samples)
    if cp_len < 0 or cp_len > samples.size:
        raise ValueError(f"cp_len {cp_len} outside [0, {samples.size}]")
    if cp_len == 0:
        return samples.copy()
    return np.concatenate([samples[-cp_len:], samples])


def remove_cp(samples, cp_len):
    """Drop the first ``cp_len`` samples."""
    samples = np.asarray(samples)
    if cp_len < 0 or cp_len >= samples.size:
        raise ValueError(f"cp_len {cp_len} outside [0, {samples.size})")
    return samples[cp_len:].copy()
