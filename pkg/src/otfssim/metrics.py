"""Per-frame link quality metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["papr", "ber", "spectral_efficiency", "TrialRecord"]


def papr(samples):
    """Peak-to-average power ratio of a sampled signal, in dB."""
    power = np.abs(np.asarray(samples).reshape(-1)) ** 2
    if power.size == 0:
        raise ValueError("PAPR undefined for an empty signal")
    mean = power.mean()
    if mean == 0.0:
        raise ValueError("PAPR undefined for an all-zero signal")
    return float(10.0 * np.log10(power.max() / mean))


def ber(bits_tx, bits_rx):
    """Fraction of differing bits."""
    a = np.asarray(bits_tx).reshape(-1)
    b = np.asarray(bits_rx).reshape(-1)
    if a.size != b.size:
        raise ValueError(f"bit vectors differ in length: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("BER undefined for empty bit vectors")
    return float(np.count_nonzero(a != b) / a.size)


def spectral_efficiency(bits_correct, cfg, scheme):
    """Correct bits per transmitted sample.

    The superimposed layout pays for its frame cyclic prefix; the embedded
    layout's trailing zero rows already isolate consecutive frames, so its
    frame length is the bare grid size.
    """
    if bits_correct < 0:
        raise ValueError("bits_correct must be non-negative")
    frame_len = cfg.grid_size + (cfg.cp_len if scheme == "s1d" else 0)
    return float(bits_correct / frame_len)


@dataclass
class TrialRecord:
    """Outcome of one simulated frame."""

    seed: int
    scheme: str
    equalizer: str
    alpha: float
    nmse: float
    ber: float
    papr_db: float
    se: float
    iterations: int   # channel estimation passes (0 with perfect CSI)
    bits_total: int
    bit_errors: int
