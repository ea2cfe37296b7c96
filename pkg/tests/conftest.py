"""Shared fixtures and brute-force reference implementations.

The references here deliberately avoid FFTs, rolls and vectorized index
tricks: package outputs are checked against plain-loop evaluations of the
same definitions, so a shared bug in a clever code path cannot hide.
"""

import numpy as np
import pytest

from otfssim.zak import FrameConfig


@pytest.fixture
def frame():
    return FrameConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_grid(rng, m, n):
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))


def idzt_loops(grid):
    """s[l + n*M] = (1/sqrt(N)) sum_k X[l, k] exp(2j pi n k / N), all loops."""
    m, n = grid.shape
    out = np.zeros(m * n, dtype=np.complex128)
    for ell in range(m):
        for slot in range(n):
            acc = 0.0 + 0.0j
            for k in range(n):
                acc += grid[ell, k] * np.exp(2j * np.pi * slot * k / n)
            out[ell + slot * m] = acc / np.sqrt(n)
    return out


def dzt_loops(samples, m, n):
    """Inverse of idzt_loops, again without FFTs."""
    out = np.zeros((m, n), dtype=np.complex128)
    for ell in range(m):
        for k in range(n):
            acc = 0.0 + 0.0j
            for slot in range(n):
                acc += samples[ell + slot * m] * np.exp(-2j * np.pi * slot * k / n)
            out[ell, k] = acc / np.sqrt(n)
    return out


def channel_time_loops(body, gains, delays, dopplers):
    """Circular channel action on one frame body of length M*N."""
    nm = body.size
    out = np.zeros(nm, dtype=np.complex128)
    for h, ell, k in zip(gains, delays, dopplers):
        for t in range(nm):
            out[t] += (h * np.exp(2j * np.pi * k * (t - ell) / nm)
                       * body[(t - ell) % nm])
    return out


def dd_channel_loops(grid, gains, delays, dopplers):
    """Grid in, grid out, going through the loop-built time domain."""
    m, n = grid.shape
    body = channel_time_loops(idzt_loops(grid), gains, delays, dopplers)
    return dzt_loops(body, m, n)


def h_matrix_loops(gains, delays, dopplers, m, n):
    """Dense delay-Doppler channel matrix from unit-grid probes."""
    nm = m * n
    out = np.zeros((nm, nm), dtype=np.complex128)
    for col in range(nm):
        probe = np.zeros((m, n), dtype=np.complex128)
        probe[col % m, col // m] = 1.0
        resp = dd_channel_loops(probe, gains, delays, dopplers)
        out[:, col] = resp.reshape(-1, order="F")
    return out
