"""Pilot sequences and frame construction.

Two pilot layouts share one energy budget ``total_energy`` split by
``alpha`` between pilot and data:

* ``s1d`` - a Chu sequence of length M - ell_max, extended by its own
  cyclic prefix to fill a full pilot column, superimposed on the data.
  Data symbols occupy every Doppler column of the first M - ell_max delay
  rows; the remaining rows carry only the pilot column (zero padding
  elsewhere), which keeps delayed data copies inside the frame.
* ``ep`` - a single pilot cell surrounded by an empty guard rectangle
  spanning delays ell_p - ell_max .. ell_p + ell_max and Doppler offsets
  -k_max+1 .. k_max, so every channel-shifted pilot copy lands on a
  guarded cell.  The last ell_max delay rows are again data-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .numerics import unvec, vec
from .zak import FrameConfig

__all__ = [
    "chu",
    "build_pilot_cp_vector",
    "EnergySplit",
    "FrameLayout",
    "build_s1d_frame",
    "build_ep_frame",
    "validate_config",
    "s1d_data_mask",
    "ep_data_mask",
    "default_ep_location",
]


def chu(length, root=1):
    """Polyphase Chu sequence: unit modulus, zero periodic autocorrelation.

    a[y] = exp(j*pi*root*y^2/length) for even length and
    exp(j*pi*root*y*(y+1)/length) for odd length; ``root`` must be coprime
    with ``length``.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if gcd(length, root) != 1:
        raise ValueError(f"root {root} not coprime with length {length}")
    y = np.arange(length)
    if length % 2 == 0:
        phase = root * y * y / length
    else:
        phase = root * y * (y + 1) / length
    return np.exp(1j * np.pi * phase)


def build_pilot_cp_vector(seq, guard_len):
    """Prefix a sequence with its last ``guard_len`` entries (cyclic)."""
    seq = np.asarray(seq)
    if guard_len < 0 or guard_len > seq.size:
        raise ValueError(f"guard_len {guard_len} outside [0, {seq.size}]")
    if guard_len == 0:
        return seq.copy()
    return np.concatenate([seq[seq.size - guard_len:], seq])


@dataclass(frozen=True)
class EnergySplit:
    """Fraction ``alpha`` of ``total_energy`` assigned to the pilot."""

    alpha: float
    total_energy: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.total_energy <= 0.0:
            raise ValueError("total_energy must be positive")


@dataclass
class FrameLayout:
    """Where pilot and data live in a built frame, plus their energies."""

    scheme: str
    config: FrameConfig
    alpha: float
    total_energy: float
    pilot_grid: np.ndarray        # M x N, pilot contribution only
    pilot_scale: float            # amplitude applied to the unit pilot pattern
    data_mask: np.ndarray         # M x N bool, True on data cells
    data_positions: np.ndarray    # column-major flat indices of data cells
    data_energy: float            # nominal per-symbol energy E_d
    pilot_column: int | None = None      # s1d only
    pilot_location: tuple | None = None  # ep only

    @property
    def n_data_cells(self) -> int:
        return self.data_positions.size


def validate_config(cfg: FrameConfig):
    """Return a list of violated constraints (empty when usable)."""
    problems = []
    if cfg.M < 1 or cfg.N < 1:
        problems.append("grid dimensions must be positive")
    if cfg.ell_max < 0 or cfg.k_max < 0 or cfg.cp_len < 0:
        problems.append("spread bounds and cp_len must be non-negative")
    if cfg.ell_max >= cfg.M:
        problems.append(f"ell_max={cfg.ell_max} must be < M={cfg.M}")
    if 2 * cfg.k_max + 1 > cfg.N:
        problems.append(f"2*k_max+1={2 * cfg.k_max + 1} exceeds N={cfg.N}")
    if cfg.cp_len < cfg.ell_max:
        problems.append(f"cp_len={cfg.cp_len} shorter than ell_max={cfg.ell_max}")
    if cfg.M - cfg.ell_max < cfg.ell_max:
        problems.append(
            f"pilot sequence length M-ell_max={cfg.M - cfg.ell_max} "
            f"cannot carry a cyclic prefix of {cfg.ell_max}")
    return problems


def _check_config(cfg):
    problems = validate_config(cfg)
    if problems:
        raise ValueError("; ".join(problems))


def s1d_data_mask(cfg: FrameConfig):
    mask = np.zeros((cfg.M, cfg.N), dtype=bool)
    mask[: cfg.M - cfg.ell_max, :] = True
    return mask


def default_ep_location(cfg: FrameConfig):
    return (cfg.ell_max, cfg.N // 2)


def ep_data_mask(cfg: FrameConfig, pilot_location=None):
    """Data mask for the embedded layout; validates the guard placement."""
    lp, kp = pilot_location if pilot_location is not None else default_ep_location(cfg)
    if lp - cfg.ell_max < 0 or lp + cfg.ell_max > cfg.M - cfg.ell_max - 1:
        raise ValueError(f"pilot delay {lp} puts the guard outside the data rows")
    c_lo = kp - cfg.k_max + 1
    c_hi = kp + cfg.k_max
    if c_lo < 0 or c_hi > cfg.N - 1:
        raise ValueError(f"pilot Doppler {kp} puts the guard outside the grid")
    mask = np.ones((cfg.M, cfg.N), dtype=bool)
    mask[cfg.M - cfg.ell_max:, :] = False
    mask[lp - cfg.ell_max: lp + cfg.ell_max + 1, c_lo: c_hi + 1] = False
    return mask


def _positions(mask):
    return np.flatnonzero(vec(mask))


def _place_data(data_syms, positions, scale, cfg):
    data_syms = np.asarray(data_syms, dtype=np.complex128).reshape(-1)
    if data_syms.size != positions.size:
        raise ValueError(f"expected {positions.size} data symbols, got {data_syms.size}")
    flat = np.zeros(cfg.grid_size, dtype=np.complex128)
    flat[positions] = scale * data_syms
    return unvec(flat, cfg.M, cfg.N)


def build_s1d_frame(data_syms, cfg, split, root=1, pilot_column=0):
    """Superimposed frame: full-column Chu pilot plus scaled data symbols.

    Returns ``(grid, layout)``.  Data symbols are taken at unit scale and
    multiplied by sqrt(E_d) with E_d = (1-alpha)*total/(data cell count);
    the pilot column is scaled so its total energy is alpha*total.
    """
    _check_config(cfg)
    if not 0 <= pilot_column < cfg.N:
        raise ValueError(f"pilot_column {pilot_column} outside [0, {cfg.N})")
    seq = chu(cfg.M - cfg.ell_max, root)
    column = build_pilot_cp_vector(seq, cfg.ell_max)
    pilot_scale = float(np.sqrt(split.alpha * split.total_energy / cfg.M))
    pilot_grid = np.zeros((cfg.M, cfg.N), dtype=np.complex128)
    pilot_grid[:, pilot_column] = pilot_scale * column
    mask = s1d_data_mask(cfg)
    positions = _positions(mask)
    e_d = (1.0 - split.alpha) * split.total_energy / positions.size
    grid = pilot_grid + _place_data(data_syms, positions, np.sqrt(e_d), cfg)
    layout = FrameLayout(
        scheme="s1d", config=cfg, alpha=split.alpha, total_energy=split.total_energy,
        pilot_grid=pilot_grid, pilot_scale=pilot_scale, data_mask=mask,
        data_positions=positions, data_energy=e_d, pilot_column=pilot_column)
    return grid, layout


def build_ep_frame(data_syms, cfg, split, pilot_location=None):
    """Embedded frame: one pilot cell, guarded rectangle, scaled data."""
    _check_config(cfg)
    loc = pilot_location if pilot_location is not None else default_ep_location(cfg)
    mask = ep_data_mask(cfg, loc)
    positions = _positions(mask)
    if positions.size == 0:
        raise ValueError("embedded layout leaves no data cells")
    pilot_scale = float(np.sqrt(split.alpha * split.total_energy))
    pilot_grid = np.zeros((cfg.M, cfg.N), dtype=np.complex128)
    pilot_grid[loc[0], loc[1]] = pilot_scale
    e_d = (1.0 - split.alpha) * split.total_energy / positions.size
    grid = pilot_grid + _place_data(data_syms, positions, np.sqrt(e_d), cfg)
    layout = FrameLayout(
        scheme="ep", config=cfg, alpha=split.alpha, total_energy=split.total_energy,
        pilot_grid=pilot_grid, pilot_scale=pilot_scale, data_mask=mask,
        data_positions=positions, data_energy=e_d, pilot_location=tuple(loc))
    return grid, layout
