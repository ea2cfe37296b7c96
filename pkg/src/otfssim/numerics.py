"""Grid vectorization and Gray-labeled QAM mapping."""

from __future__ import annotations

import numpy as np

__all__ = ["vec", "unvec", "QamConstellation", "qam_map", "qam_demap"]


def vec(grid):
    """Column-major flattening: ``out[l + k*M] = grid[l, k]``."""
    return np.asarray(grid).reshape(-1, order="F")


def unvec(v, n_rows, n_cols):
    """Inverse of :func:`vec`; raises if the length does not match."""
    v = np.asarray(v)
    if v.size != n_rows * n_cols:
        raise ValueError(f"cannot reshape length-{v.size} vector into {n_rows}x{n_cols}")
    return v.reshape((n_rows, n_cols), order="F")


# Per-axis Gray labeling for 16-QAM, MSB first: 00 -> +3, 01 -> +1,
# 11 -> -1, 10 -> -3.  Adjacent amplitude levels differ in one bit.
_PAM4_GRAY = {(0, 0): 3.0, (0, 1): 1.0, (1, 1): -1.0, (1, 0): -3.0}


class QamConstellation:
    """Square QAM with unit average symbol energy and Gray bit labels.

    ``points[i]`` is the symbol whose label is the MSB-first binary
    expansion of ``i``.  4-QAM maps bits (b0, b1) to
    ((1 - 2*b0) + 1j*(1 - 2*b1)) / sqrt(2), so the all-zero label sits at
    (+1+1j)/sqrt(2).  16-QAM uses the per-axis Gray code above on the real
    axis (b0, b1) and the imaginary axis (b2, b3), scaled by 1/sqrt(10).
    """

    def __init__(self, order: int):
        if order not in (4, 16):
            raise ValueError(f"supported orders are 4 and 16, got {order}")
        self.order = order
        self.bits_per_symbol = order.bit_length() - 1
        if order == 4:
            pts = [((1 - 2 * b0) + 1j * (1 - 2 * b1)) / np.sqrt(2)
                   for b0 in (0, 1) for b1 in (0, 1)]
        else:
            pts = [(_PAM4_GRAY[b0, b1] + 1j * _PAM4_GRAY[b2, b3]) / np.sqrt(10)
                   for b0 in (0, 1) for b1 in (0, 1)
                   for b2 in (0, 1) for b3 in (0, 1)]
        self.points = np.asarray(pts, dtype=np.complex128)

    def __repr__(self):
        return f"QamConstellation(order={self.order})"


def qam_map(bits, constellation: QamConstellation):
    """Map a flat bit array (length divisible by bits_per_symbol) to symbols."""
    bits = np.asarray(bits)
    b = constellation.bits_per_symbol
    if bits.size % b:
        raise ValueError(f"bit count {bits.size} not divisible by {b}")
    groups = bits.reshape(-1, b)
    idx = groups @ (1 << np.arange(b - 1, -1, -1))
    return constellation.points[idx]


def qam_demap(symbols, constellation: QamConstellation):
    """Nearest-point hard decisions; ties go to the lowest point index."""
    symbols = np.asarray(symbols, dtype=np.complex128).reshape(-1)
    dist = np.abs(symbols[:, None] - constellation.points[None, :])
    idx = np.argmin(dist, axis=1)
    b = constellation.bits_per_symbol
    shifts = np.arange(b - 1, -1, -1)
    return ((idx[:, None] >> shifts[None, :]) & 1).reshape(-1)
