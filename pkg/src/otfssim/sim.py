"""Monte Carlo sweep driver.

Energy convention: every frame spends ``total_energy = M*N``, so a frame
of M*N equal-power symbols would put unit energy on each.  The per-sample
noise variance is therefore ``10**(-snr_db/10)`` and ``snr_db`` is the SNR
such a full-budget frame would see.  ``snr_db=None`` disables noise.

Trial ``i`` of every grid point uses seed ``base_seed + i``, so all points
share channel, bit and noise draws (paired comparisons across alpha and
scheme).  Within a trial the stream is consumed in a fixed order: data
bits, then channel taps, then noise.  Results are reproducible bit for bit
for a given kernel backend, regardless of worker count.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .channel import sample_channel, apply_channel_time
from .equalizer import cancel_pilot, equalize, iterative_receive
from .estimator import channel_to_vector, n_atoms, nmse
from .metrics import TrialRecord, ber, papr, spectral_efficiency
from .numerics import QamConstellation, qam_map, vec
from .pilot import (EnergySplit, FrameLayout, build_ep_frame, build_pilot_cp_vector,
                    build_s1d_frame, chu, default_ep_location, ep_data_mask,
                    s1d_data_mask, validate_config)
from .estimator import build_sensing_matrix
from .zak import FrameConfig, add_cp, dzt, idzt, remove_cp

try:
    from importlib.metadata import version as _pkg_version
    _VERSION = _pkg_version("otfssim")
except Exception:  # pragma: no cover - metadata missing in odd installs
    _VERSION = "unknown"

__all__ = ["SweepConfig", "PointSummary", "SweepResult",
           "run_trial", "run_sweep", "export"]

_DEFAULT_ALPHAS = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@dataclass(frozen=True)
class SweepConfig:
    frame: FrameConfig = FrameConfig()
    n_paths: int = 5
    snr_db: float | None = 15.0
    qam_order: int = 4
    schemes: tuple = ("s1d", "ep")
    equalizers: tuple = ("mrc", "lmmse")
    alphas: tuple = _DEFAULT_ALPHAS
    n_iter: int = 1
    icsi: bool = False
    trials: int = 200
    base_seed: int = 1
    omp_threshold: float | None = None
    mrc_max_iter: int = 15
    mrc_tol: float = 1e-6
    chu_root: int = 1
    pilot_column: int = 0
    ep_pilot_location: tuple | None = None
    keep_records: bool = False

    @property
    def noise_var(self) -> float:
        return 0.0 if self.snr_db is None else float(10.0 ** (-self.snr_db / 10.0))

    def to_dict(self):
        d = asdict(self)
        d["frame"] = asdict(self.frame)
        for key in ("schemes", "equalizers", "alphas"):
            d[key] = list(d[key])
        if d["ep_pilot_location"] is not None:
            d["ep_pilot_location"] = list(d["ep_pilot_location"])
        return d

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "frame" in data:
            data["frame"] = FrameConfig(**data["frame"])
        for key in ("schemes", "equalizers", "alphas"):
            if key in data:
                data[key] = tuple(data[key])
        if data.get("ep_pilot_location") is not None:
            data["ep_pilot_location"] = tuple(data["ep_pilot_location"])
        return cls(**data)

    def validate(self):
        """Return a list of violated constraints (empty when runnable)."""
        problems = validate_config(self.frame)
        if self.n_paths < 1:
            problems.append("n_paths must be >= 1")
        elif self.n_paths > n_atoms(self.frame.ell_max, self.frame.k_max):
            problems.append("n_paths exceeds the number of distinct tap cells")
        if self.qam_order not in (4, 16):
            problems.append(f"qam_order must be 4 or 16, got {self.qam_order}")
        for s in self.schemes:
            if s not in ("s1d", "ep"):
                problems.append(f"unknown scheme {s!r}")
        for e in self.equalizers:
            if e not in ("mrc", "lmmse"):
                problems.append(f"unknown equalizer {e!r}")
        if not self.schemes:
            problems.append("schemes must not be empty")
        if not self.equalizers:
            problems.append("equalizers must not be empty")
        if not self.alphas:
            problems.append("alphas must not be empty")
        for a in self.alphas:
            if not 0.0 < a < 1.0:
                problems.append(f"alpha {a} outside (0, 1)")
        if self.n_iter < 1:
            problems.append("n_iter must be >= 1")
        if self.trials < 1:
            problems.append("trials must be >= 1")
        if self.base_seed < 0:
            problems.append("base_seed must be non-negative")
        if self.omp_threshold is not None and self.omp_threshold <= 0:
            problems.append("omp_threshold must be positive when given")
        if self.snr_db is not None and not np.isfinite(self.snr_db):
            problems.append("snr_db must be finite or null")
        if not 0 <= self.pilot_column < self.frame.N:
            problems.append(f"pilot_column {self.pilot_column} outside [0, {self.frame.N})")
        if not problems and "ep" in self.schemes:
            try:
                ep_data_mask(self.frame, self.ep_pilot_location)
            except ValueError as err:
                problems.append(str(err))
        return problems


@dataclass
class PointSummary:
    scheme: str
    equalizer: str
    alpha: float
    trials: int
    nmse: float
    ber: float
    papr_mean_db: float
    papr_p99_db: float
    se: float
    nmse_ci: float
    ber_ci: float
    papr_ci: float
    se_ci: float


@dataclass
class SweepResult:
    config: SweepConfig
    points: list
    records: dict | None = None


@lru_cache(maxsize=32)
def _unit_sensing(frame: FrameConfig, scheme, placement, root):
    """Sensing matrix for a unit-amplitude pilot (scaled per trial)."""
    pilot = np.zeros((frame.M, frame.N), dtype=np.complex128)
    if scheme == "s1d":
        pilot[:, placement] = build_pilot_cp_vector(
            chu(frame.M - frame.ell_max, root), frame.ell_max)
        mask = s1d_data_mask(frame)
        layout = FrameLayout(
            scheme=scheme, config=frame, alpha=0.5, total_energy=1.0,
            pilot_grid=pilot, pilot_scale=1.0, data_mask=mask,
            data_positions=np.flatnonzero(vec(mask)), data_energy=1.0,
            pilot_column=placement)
    else:
        pilot[placement[0], placement[1]] = 1.0
        mask = ep_data_mask(frame, placement)
        layout = FrameLayout(
            scheme=scheme, config=frame, alpha=0.5, total_energy=1.0,
            pilot_grid=pilot, pilot_scale=1.0, data_mask=mask,
            data_positions=np.flatnonzero(vec(mask)), data_energy=1.0,
            pilot_location=placement)
    return build_sensing_matrix(layout)


def _sensing_for(cfg: SweepConfig, layout: FrameLayout):
    if layout.scheme == "s1d":
        unit = _unit_sensing(layout.config, "s1d", layout.pilot_column, cfg.chu_root)
    else:
        unit = _unit_sensing(layout.config, "ep", layout.pilot_location, cfg.chu_root)
    return unit.scaled(layout.pilot_scale)


def run_trial(cfg: SweepConfig, scheme, equalizer, alpha, seed, with_trace=False):
    """Simulate one frame end to end and return its TrialRecord.

    RNG draw order (fixed for reproducibility): data bits, channel taps,
    then channel noise.  With ``with_trace`` a list of per-pass
    ``{"iteration", "nmse", "ber"}`` dicts is returned alongside.
    """
    frame = cfg.frame
    rng = np.random.default_rng(seed)
    constellation = QamConstellation(cfg.qam_order)
    if scheme == "s1d":
        n_data = int(np.count_nonzero(s1d_data_mask(frame)))
    elif scheme == "ep":
        n_data = int(np.count_nonzero(ep_data_mask(frame, cfg.ep_pilot_location)))
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    bits = rng.integers(0, 2, size=n_data * constellation.bits_per_symbol)
    symbols = qam_map(bits, constellation)
    split = EnergySplit(float(alpha), float(frame.grid_size))
    if scheme == "s1d":
        grid, layout = build_s1d_frame(symbols, frame, split, root=cfg.chu_root,
                                       pilot_column=cfg.pilot_column)
    else:
        grid, layout = build_ep_frame(symbols, frame, split,
                                      pilot_location=cfg.ep_pilot_location)
    tx = add_cp(idzt(grid), frame.cp_len)
    papr_db = papr(tx)
    channel = sample_channel(rng, cfg.n_paths, frame.ell_max, frame.k_max)
    noise_var = cfg.noise_var
    rx = apply_channel_time(tx, frame.cp_len, channel, noise_var, rng)
    y = vec(dzt(remove_cp(rx, frame.cp_len), frame.M, frame.N))
    sensing = _sensing_for(cfg, layout)
    # The embedded layout is estimated on a data-free window: its design
    # premise is data-pilot orthogonality, so the simulator strips the data
    # image from the estimation input.  Detection always sees the full y.
    est_y = None
    if scheme == "ep":
        data_image = kernels.dd_apply_taps(grid - layout.pilot_grid,
                                           *channel.as_arrays())
        est_y = y - vec(data_image)

    if cfg.icsi:
        h_hat = channel_to_vector(channel, frame.ell_max, frame.k_max)
        y_d = cancel_pilot(y, h_hat, sensing)
        detection = equalize(equalizer, y_d, h_hat, noise_var, layout,
                             constellation, cfg.mrc_max_iter, cfg.mrc_tol)
        trace = [(h_hat, detection)]
        nmse_val = 0.0
        passes = 0
    else:
        h_hat, detection, trace = iterative_receive(
            y, layout, constellation, noise_var, equalizer=equalizer,
            threshold=cfg.omp_threshold, n_iter=cfg.n_iter, sensing=sensing,
            mrc_max_iter=cfg.mrc_max_iter, mrc_tol=cfg.mrc_tol, est_y=est_y)
        nmse_val = nmse(h_hat, channel, frame)
        passes = cfg.n_iter

    errors = int(np.count_nonzero(bits != detection.bits))
    record = TrialRecord(
        seed=int(seed), scheme=scheme, equalizer=equalizer, alpha=float(alpha),
        nmse=nmse_val, ber=ber(bits, detection.bits), papr_db=papr_db,
        se=spectral_efficiency(bits.size - errors, frame, scheme),
        iterations=passes, bits_total=int(bits.size), bit_errors=errors)
    if not with_trace:
        return record
    rows = [{"iteration": i + 1,
             "nmse": 0.0 if cfg.icsi else nmse(h, channel, frame),
             "ber": ber(bits, det.bits)}
            for i, (h, det) in enumerate(trace)]
    return record, rows


def _half_width(values):
    n = len(values)
    if n < 2:
        return 0.0
    return float(1.96 * np.std(values, ddof=1) / np.sqrt(n))


def _summarize(scheme, equalizer, alpha, records):
    nmses = [r.nmse for r in records]
    bers = [r.ber for r in records]
    paprs = [r.papr_db for r in records]
    ses = [r.se for r in records]
    return PointSummary(
        scheme=scheme, equalizer=equalizer, alpha=float(alpha), trials=len(records),
        nmse=float(np.mean(nmses)), ber=float(np.mean(bers)),
        papr_mean_db=float(np.mean(paprs)),
        papr_p99_db=float(np.percentile(paprs, 99.0)),
        se=float(np.mean(ses)),
        nmse_ci=_half_width(nmses), ber_ci=_half_width(bers),
        papr_ci=_half_width(paprs), se_ci=_half_width(ses))


_WORKER_CFG = None


def _init_worker(cfg):
    global _WORKER_CFG
    _WORKER_CFG = cfg


def _run_task(task):
    scheme, equalizer, alpha, seed = task
    return run_trial(_WORKER_CFG, scheme, equalizer, alpha, seed)


def run_sweep(cfg: SweepConfig, threads=1, progress=None):
    """Run the full (scheme, equalizer, alpha) grid of ``cfg``.

    ``threads`` > 1 distributes trials over worker processes; because every
    trial is a pure function of (config, seed) and results are re-assembled
    in submission order, the output is identical to a serial run.
    """
    problems = cfg.validate()
    if problems:
        raise ValueError("; ".join(problems))
    grid = [(s, e, a) for s in cfg.schemes for e in cfg.equalizers for a in cfg.alphas]
    tasks = [(s, e, a, cfg.base_seed + i) for (s, e, a) in grid
             for i in range(cfg.trials)]
    if threads > 1:
        chunk = max(1, len(tasks) // (threads * 8))
        with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker,
                                 initargs=(cfg,)) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=chunk))
    else:
        records = [run_trial(cfg, s, e, a, seed) for (s, e, a, seed) in tasks]
    points = []
    kept = {} if cfg.keep_records else None
    for j, (s, e, a) in enumerate(grid):
        batch = records[j * cfg.trials:(j + 1) * cfg.trials]
        summary = _summarize(s, e, a, batch)
        points.append(summary)
        if kept is not None:
            kept[(s, e, a)] = batch
        if progress is not None:
            progress(summary)
    return SweepResult(config=cfg, points=points, records=kept)


_CSV_COLUMNS = ("scheme", "equalizer", "alpha", "trials", "nmse", "ber",
                "papr_mean_db", "papr_p99_db", "se",
                "nmse_ci", "ber_ci", "papr_ci", "se_ci")


def _fmt(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def export(result: SweepResult, out_dir):
    """Write ``sweep.csv`` and ``manifest.json``; returns their paths.

    Output bytes are a pure function of (config, seeds, backend): floats
    use a 17-significant-digit round-trip format and the manifest holds
    only deterministic fields.
    """
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "sweep.csv")
    lines = [",".join(_CSV_COLUMNS)]
    for p in result.points:
        lines.append(",".join(_fmt(getattr(p, col)) for col in _CSV_COLUMNS))
    with open(csv_path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    manifest = {
        "base_seed": result.config.base_seed,
        "config": result.config.to_dict(),
        "kernel_backend": kernels.BACKEND,
        "package": {"name": "otfssim", "version": _VERSION},
        "versions": {"numpy": np.__version__},
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, manifest_path
