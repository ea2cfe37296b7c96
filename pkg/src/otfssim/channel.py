"""Sparse integer delay-Doppler channels.

A realization is a set of taps (h_i, ell_i, k_i) with complex gains and
integer delay/Doppler bins.  The time-domain action on one frame body of
length M*N is

    r[t] = sum_i h_i * exp(2j*pi*k_i*(t - ell_i)/(M*N)) * s[(t - ell_i) mod M*N]

which the frame cyclic prefix turns into plain (linear) convolution on the
prefixed signal.  ``dd_io_direct`` evaluates the equivalent delay-Doppler
grid relation without leaving the grid domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = [
    "ChannelRealization",
    "sample_channel",
    "apply_channel_time",
    "dd_io_direct",
    "build_g_matrix",
    "build_h_matrix",
]


@dataclass
class ChannelRealization:
    gains: np.ndarray
    delays: np.ndarray
    dopplers: np.ndarray

    def __post_init__(self):
        self.gains = np.asarray(self.gains, dtype=np.complex128).reshape(-1)
        self.delays = np.asarray(self.delays, dtype=np.int64).reshape(-1)
        self.dopplers = np.asarray(self.dopplers, dtype=np.int64).reshape(-1)
        if not (self.gains.size == self.delays.size == self.dopplers.size):
            raise ValueError("gains, delays and dopplers must have equal length")
        if np.any(self.delays < 0):
            raise ValueError("delays must be non-negative")

    @property
    def n_paths(self) -> int:
        return self.gains.size

    def as_arrays(self):
        return self.gains, self.delays, self.dopplers


def sample_channel(rng, n_paths, ell_max, k_max, distinct=True):
    """Draw a random channel realization.

    Gains are i.i.d. circular Gaussian with variance 1/n_paths (unit
    expected total power).  Delays are uniform on {0..ell_max}, Dopplers
    uniform on {-k_max+1..k_max}; with ``distinct`` the (delay, Doppler)
    pairs are drawn without replacement.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    n_cells = (ell_max + 1) * 2 * k_max
    if distinct:
        if n_paths > n_cells:
            raise ValueError(f"cannot place {n_paths} distinct taps in {n_cells} cells")
        flat = rng.choice(n_cells, size=n_paths, replace=False)
        delays = flat // (2 * k_max)
        j = flat % (2 * k_max)
        dopplers = np.where(j <= k_max, j, j - 2 * k_max)
    else:
        delays = rng.integers(0, ell_max + 1, size=n_paths)
        dopplers = rng.integers(-k_max + 1, k_max + 1, size=n_paths)
    scale = np.sqrt(1.0 / (2 * n_paths))
    gains = scale * (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths))
    return ChannelRealization(gains, delays, dopplers)


def apply_channel_time(sig, cp_len, channel, noise_var, rng=None):
    """Pass a prefixed time signal through the channel and add noise.

    The first ``cp_len`` output samples are transient and meant to be
    discarded; after that the output equals the circular channel acting on
    the frame body, provided ``cp_len`` covers the largest delay.  Noise is
    complex Gaussian with per-sample variance ``noise_var``.
    """
    sig = np.ascontiguousarray(sig, dtype=np.complex128)
    if channel.n_paths and int(channel.delays.max()) > cp_len:
        raise ValueError("cyclic prefix shorter than the channel delay spread")
    out = kernels.time_apply_taps(sig, cp_len, *channel.as_arrays())
    if noise_var > 0:
        if rng is None:
            raise ValueError("rng required when noise_var > 0")
        scale = np.sqrt(noise_var / 2.0)
        out = out + scale * (rng.standard_normal(sig.size)
                             + 1j * rng.standard_normal(sig.size))
    return out


def dd_io_direct(grid, channel):
    """Delay-Doppler grid after the channel, computed entirely on the grid."""
    grid = np.ascontiguousarray(grid, dtype=np.complex128)
    m_bins = grid.shape[0]
    if channel.n_paths and int(channel.delays.max()) >= m_bins:
        raise ValueError("tap delay exceeds the number of delay bins")
    return kernels.dd_apply_taps(grid, *channel.as_arrays())


def build_g_matrix(channel, m_bins, n_bins):
    """Dense time-domain channel matrix G with r = G s (circular)."""
    nm = m_bins * n_bins
    g = np.zeros((nm, nm), dtype=np.complex128)
    t = np.arange(nm)
    for h, ell, k in zip(*channel.as_arrays()):
        g[t, (t - ell) % nm] += h * np.exp(2j * np.pi * k * (t - ell) / nm)
    return g


def build_h_matrix(channel, m_bins, n_bins):
    """Dense delay-Doppler channel matrix H with vec(Y) = H vec(X).

    Equals the time-domain G conjugated by the (unitary) Zak transform
    pair; built here directly from the per-tap twisted shifts.
    """
    nm = m_bins * n_bins
    out = np.zeros((nm, nm), dtype=np.complex128)
    m = np.arange(m_bins)[:, None]
    c = np.arange(n_bins)[None, :]
    for h, ell, k in zip(*channel.as_arrays()):
        if ell >= m_bins:
            raise ValueError("tap delay exceeds the number of delay bins")
        phase = np.exp(2j * np.pi * k * (m - ell) / nm) * np.where(
            m < ell, np.exp(-2j * np.pi * (c - k) / n_bins), 1.0)
        rows = m + c * m_bins
        cols = ((m - ell) % m_bins) + ((c - k) % n_bins) * m_bins
        out[rows.ravel(), cols.ravel()] += (h * phase).ravel()
    return out
