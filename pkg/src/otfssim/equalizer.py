"""Interference cancellation and symbol detection.

The receiver first removes the (estimated) pilot contribution from the
received grid, then detects data with either a dense LMMSE solve or an
iterative maximal-ratio-combining detector that works row by row in the
delay domain.  ``iterative_receive`` wraps the estimate / cancel / detect
loop: hard data decisions are re-modulated, their channel image subtracted
from the original received signal, and the channel re-estimated on the
cleaned observation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel import build_h_matrix
from .estimator import (SensingMatrix, build_sensing_matrix, default_threshold,
                        estimate_channel, omp, select_observation,
                        vector_to_taps)
from .numerics import QamConstellation, qam_demap, qam_map, unvec, vec
from .pilot import FrameLayout

__all__ = [
    "DetectionResult",
    "cancel_pilot",
    "cancel_data",
    "lmmse_equalize",
    "mrc_equalize",
    "equalize",
    "iterative_receive",
]


@dataclass
class DetectionResult:
    symbols: np.ndarray   # data-cell estimates at unit constellation scale
    bits: np.ndarray
    iterations: int = 1
    converged: bool = True


def cancel_pilot(y, h_hat, sensing: SensingMatrix):
    """Subtract the estimated pilot contribution from the received vec."""
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    return y - sensing.full @ np.asarray(h_hat, dtype=np.complex128)


def _decided_data_grid(bits, layout: FrameLayout, constellation: QamConstellation):
    syms = qam_map(bits, constellation) * np.sqrt(layout.data_energy)
    flat = np.zeros(layout.config.grid_size, dtype=np.complex128)
    flat[layout.data_positions] = syms
    return unvec(flat, layout.config.M, layout.config.N)


def cancel_data(y, data_bits, h_hat, layout: FrameLayout,
                constellation: QamConstellation):
    """Subtract the channel image of hard data decisions from the received vec.

    The decisions are re-modulated at the nominal data scale and pushed
    through the estimated taps, leaving (ideally) pilot plus noise.
    """
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    taps = vector_to_taps(h_hat, layout.config.k_max)
    if taps.n_paths == 0:
        return y.copy()
    grid = _decided_data_grid(data_bits, layout, constellation)
    image = kernels.dd_apply_taps(np.ascontiguousarray(grid), *taps.as_arrays())
    return y - vec(image)


def _empty_detection(layout, constellation):
    n_cells = layout.n_data_cells
    syms = np.zeros(n_cells, dtype=np.complex128)
    return DetectionResult(syms, qam_demap(syms, constellation), 0, False)


def lmmse_equalize(y_d, h_hat, noise_var, layout: FrameLayout,
                   constellation: QamConstellation):
    """Linear MMSE detection with a dense channel matrix.

    Solves (H^H H + (noise_var/E_d) I) x = H^H y and hard-demaps the data
    cells.  Falls back to least squares if the regularized normal matrix
    is singular (only possible when noise_var is zero).
    """
    cfg = layout.config
    taps = vector_to_taps(h_hat, cfg.k_max)
    if taps.n_paths == 0:
        return _empty_detection(layout, constellation)
    y_d = np.asarray(y_d, dtype=np.complex128).reshape(-1)
    h_mat = build_h_matrix(taps, cfg.M, cfg.N)
    gram = h_mat.conj().T @ h_mat
    gram[np.diag_indices_from(gram)] += noise_var / layout.data_energy
    rhs = h_mat.conj().T @ y_d
    try:
        x = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        x, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
    syms = x[layout.data_positions] / np.sqrt(layout.data_energy)
    return DetectionResult(syms, qam_demap(syms, constellation), 1, True)


def mrc_equalize(y_d, h_hat, noise_var, layout: FrameLayout,
                 constellation: QamConstellation,
                 max_inner_iter=15, tol=1e-6):
    """Iterative delay-domain maximal-ratio-combining detection.

    Parameters
    ----------
    y_d : array
        Received vec after pilot cancellation.
    h_hat : array
        Atom-grid channel estimate (only its nonzero taps are used).
    noise_var : float
        Per-sample noise variance; regularizes the combining denominator
        sum_i |h_i|^2 + noise_var.
    layout, constellation
        Frame layout and symbol alphabet used to place and demap data.
    max_inner_iter, tol : int, float
        Sweep budget and stop tolerance on the largest per-entry change.

    Returns a DetectionResult whose ``iterations`` counts the sweeps used;
    ``converged`` is False when the budget ran out, in which case the last
    iterate is still returned.
    """
    cfg = layout.config
    taps = vector_to_taps(h_hat, cfg.k_max)
    if taps.n_paths == 0:
        return _empty_detection(layout, constellation)
    gains, delays, dopplers = taps.as_arrays()
    if int(delays.max()) > cfg.ell_max:
        raise ValueError("estimated delay exceeds ell_max")
    resid = np.ascontiguousarray(unvec(np.asarray(y_d, dtype=np.complex128),
                                       cfg.M, cfg.N)).copy()
    est = np.zeros((cfg.M, cfg.N), dtype=np.complex128)
    data_rows = np.flatnonzero(layout.data_mask.any(axis=1)).astype(np.int64)
    # every cell of a data-bearing row is estimated; the detector leans on
    # the empty bottom rows, not on intra-row guard cells
    mask = np.zeros((cfg.M, cfg.N), dtype=np.bool_)
    mask[data_rows, :] = True
    row_phase = gains[:, None] * np.exp(
        2j * np.pi * dopplers[:, None] * np.arange(cfg.M)[None, :] / cfg.grid_size)
    denom = float(np.sum(np.abs(gains) ** 2) + noise_var)
    sweeps, converged = kernels.mrc_sweep(
        resid, est, mask, data_rows, gains, delays, dopplers,
        np.ascontiguousarray(row_phase), denom, int(max_inner_iter), float(tol))
    syms = vec(est)[layout.data_positions] / np.sqrt(layout.data_energy)
    return DetectionResult(syms, qam_demap(syms, constellation),
                           int(sweeps), bool(converged))


def equalize(equalizer, y_d, h_hat, noise_var, layout, constellation,
             mrc_max_iter=15, mrc_tol=1e-6):
    """Dispatch to the named equalizer ("lmmse" or "mrc")."""
    if equalizer == "lmmse":
        return lmmse_equalize(y_d, h_hat, noise_var, layout, constellation)
    if equalizer == "mrc":
        return mrc_equalize(y_d, h_hat, noise_var, layout, constellation,
                            mrc_max_iter, mrc_tol)
    raise ValueError(f"unknown equalizer {equalizer!r}")


def iterative_receive(y, layout: FrameLayout, constellation: QamConstellation,
                      noise_var, equalizer="mrc", threshold=None, n_iter=1,
                      sensing=None, mrc_max_iter=15, mrc_tol=1e-6, est_y=None):
    """Estimation / detection loop with decision-directed data cancellation.

    ``n_iter`` counts channel estimation passes in total: the first pass
    estimates from the raw observation, every further pass re-estimates
    after subtracting the current hard data decisions from the original
    received signal.  Detection always runs on the pilot-cancelled signal.
    ``est_y`` overrides the first-pass estimation input (the embedded
    layout feeds a data-free observation here; detection still uses ``y``).
    A fixed ``threshold`` applies verbatim on every pass; leaving it None
    selects the per-pass default, with residual recalibration for the
    superimposed layout.  Returns ``(h_hat, detection, trace)`` where trace
    lists the ``(h_hat, detection)`` pair of every pass.
    """
    if n_iter < 1:
        raise ValueError("n_iter must be >= 1")
    if sensing is None:
        sensing = build_sensing_matrix(layout)
    noise_std = float(np.sqrt(noise_var))
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    y_current = y if est_y is None else np.asarray(est_y, dtype=np.complex128).reshape(-1)
    trace = []
    h_hat = None
    detection = None
    for it in range(n_iter):
        obs = select_observation(y_current, layout)
        if threshold is None:
            tau = default_threshold(layout.scheme, noise_std,
                                    layout.data_energy, first_pass=(it == 0))
            h_hat = estimate_channel(obs, sensing, tau, noise_std,
                                     recalibrate=(layout.scheme == "s1d"))
        else:
            h_hat = omp(obs, sensing, threshold)
        y_d = cancel_pilot(y, h_hat, sensing)
        detection = equalize(equalizer, y_d, h_hat, noise_var, layout,
                             constellation, mrc_max_iter, mrc_tol)
        trace.append((h_hat, detection))
        if it < n_iter - 1:
            y_current = cancel_data(y, detection.bits, h_hat, layout, constellation)
    return h_hat, detection, trace
