"""Numba-compiled hot loops.

Same contracts and accumulation order as ``_kernels_numpy``; that module is
the reference implementation.  Compiled artifacts are cached on disk so the
JIT cost is paid once per environment.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def dd_apply_taps(grid, gains, delays, dopplers):
    m_bins, n_bins = grid.shape
    nm = m_bins * n_bins
    out = np.zeros((m_bins, n_bins), dtype=np.complex128)
    for i in range(gains.shape[0]):
        h = gains[i]
        ell = delays[i]
        k = dopplers[i]
        for m in range(m_bins):
            ph = h * np.exp(2j * np.pi * k * (m - ell) / nm)
            src_m = (m - ell) % m_bins
            if m < ell:
                # delay shift wrapped this row across the grid boundary
                for c in range(n_bins):
                    wrap = np.exp(-2j * np.pi * (c - k) / n_bins)
                    out[m, c] += ph * wrap * grid[src_m, (c - k) % n_bins]
            else:
                for c in range(n_bins):
                    out[m, c] += ph * grid[src_m, (c - k) % n_bins]
    return out


@njit(cache=True)
def time_apply_taps(sig, cp_len, gains, delays, dopplers):
    total = sig.shape[0]
    body = total - cp_len
    out = np.zeros(total, dtype=np.complex128)
    for i in range(gains.shape[0]):
        h = gains[i]
        ell = delays[i]
        k = dopplers[i]
        for t in range(ell, total):
            phase = np.exp(2j * np.pi * k * (t - cp_len - ell) / body)
            out[t] += h * phase * sig[t - ell]
    return out


@njit(cache=True)
def mrc_sweep(resid, est, mask, data_rows, gains, delays, dopplers,
              row_phase, denom, max_sweeps, tol):
    n_taps = gains.shape[0]
    n_bins = resid.shape[1]
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        worst = 0.0
        for ri in range(data_rows.shape[0]):
            m = data_rows[ri]
            for c in range(n_bins):
                if not mask[m, c]:
                    continue
                num = 0.0 + 0.0j
                for i in range(n_taps):
                    b = row_phase[i, m]
                    obs = resid[m + delays[i], (c + dopplers[i]) % n_bins]
                    num += np.conj(b) * (obs + b * est[m, c])
                new = num / denom
                delta = new - est[m, c]
                change = abs(delta)
                if change > worst:
                    worst = change
                if change > 0.0:
                    est[m, c] = new
                    for i in range(n_taps):
                        resid[m + delays[i], (c + dopplers[i]) % n_bins] -= (
                            row_phase[i, m] * delta)
        if worst < tol:
            return sweeps, True
    return sweeps, False
