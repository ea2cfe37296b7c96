"""Pure-numpy implementations of the hot inner loops.

These are the reference semantics for the numba kernels in
``_kernels_numba``; both backends must agree to floating-point roundoff.
Keep the accumulation order identical between the two files.
"""

from __future__ import annotations

import numpy as np


def dd_apply_taps(grid, gains, delays, dopplers):
    """Apply integer delay-Doppler taps to a grid.

    Each tap (h, ell, k) contributes a twisted cyclic shift::

        out[m, c] += h * exp(2j*pi*k*(m - ell)/(M*N))
                       * wrap(m, c) * grid[(m - ell) % M, (c - k) % N]

    where wrap(m, c) = exp(-2j*pi*(c - k)/N) on the rows m < ell that the
    delay shift pulled across the grid boundary, and 1 elsewhere.  Delays
    must lie in [0, M); Doppler indices are signed integers.
    """
    grid = np.asarray(grid, dtype=np.complex128)
    m_bins, n_bins = grid.shape
    nm = m_bins * n_bins
    rows = np.arange(m_bins)
    cols = np.arange(n_bins)
    out = np.zeros((m_bins, n_bins), dtype=np.complex128)
    for h, ell, k in zip(gains, delays, dopplers):
        shifted = np.roll(np.roll(grid, ell, axis=0), k, axis=1)
        row_phase = np.exp(2j * np.pi * k * (rows - ell) / nm)
        wrap = np.exp(-2j * np.pi * (cols - k) / n_bins)
        phase = row_phase[:, None] * np.where((rows < ell)[:, None], wrap[None, :], 1.0)
        out += h * phase * shifted
    return out


def time_apply_taps(sig, cp_len, gains, delays, dopplers):
    """Faded copy of a prefixed time signal (noise-free).

    The Doppler phase ramp is referenced to the first body sample, so the
    retained body equals the circular channel acting on the body alone.
    Samples that would need data from before the signal start are left at
    zero; they fall inside the discarded prefix whenever cp_len covers the
    maximum delay.
    """
    sig = np.asarray(sig, dtype=np.complex128)
    total = sig.shape[0]
    body = total - cp_len
    t = np.arange(total)
    out = np.zeros(total, dtype=np.complex128)
    for h, ell, k in zip(gains, delays, dopplers):
        src = t - ell
        ok = src >= 0
        phase = np.exp(2j * np.pi * k * (t - cp_len - ell) / body)
        out[ok] += h * phase[ok] * sig[src[ok]]
    return out


def mrc_sweep(resid, est, mask, data_rows, gains, delays, dopplers,
              row_phase, denom, max_sweeps, tol):
    """Gauss-Seidel maximal-ratio-combining sweeps over the data rows.

    ``resid`` holds the received grid minus the contribution of the current
    estimate ``est``; both are updated in place.  Cells are visited in a
    fixed order (rows as listed in ``data_rows``, Doppler bins ascending)
    and each update is applied immediately, so the iteration is a true
    Gauss-Seidel pass on the regularized normal equations and converges
    for any tap set.  For cell (m, c) the per-tap branch observations are
    combined with conjugate weights row_phase[i, m] =
    gains[i]*exp(2j*pi*k_i*m/(M*N)) and normalized by ``denom``.  Returns
    (sweeps_used, converged); convergence means the largest per-cell change
    in a full sweep fell below ``tol``.
    """
    n_taps = gains.shape[0]
    n_bins = resid.shape[1]
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        worst = 0.0
        for m in data_rows:
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
