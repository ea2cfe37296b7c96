"""Delay-Doppler (OTFS) link simulation toolkit.

Builds pilot-bearing delay-Doppler frames (a superimposed spread pilot or a
classic embedded pilot), passes them through sparse doubly-dispersive
channels, recovers the taps with orthogonal matching pursuit and detects the
data with LMMSE or maximal-ratio-combining equalizers.  ``sim.run_sweep``
drives reproducible Monte Carlo grids over the pilot energy split.
"""

from .channel import (ChannelRealization, apply_channel_time, build_g_matrix,
                      build_h_matrix, dd_io_direct, sample_channel)
from .equalizer import (DetectionResult, cancel_data, cancel_pilot, equalize,
                        iterative_receive, lmmse_equalize, mrc_equalize)
from .estimator import (SensingMatrix, build_sensing_matrix, channel_to_vector,
                        dd_index, dd_index_inv, default_threshold,
                        estimate_channel, n_atoms, nmse, observation_indices,
                        omp, select_observation, vector_to_taps)
from .metrics import TrialRecord, ber, papr, spectral_efficiency
from .numerics import QamConstellation, qam_demap, qam_map, unvec, vec
from .pilot import (EnergySplit, FrameLayout, build_ep_frame, build_pilot_cp_vector,
                    build_s1d_frame, chu, default_ep_location, ep_data_mask,
                    s1d_data_mask, validate_config)
from .sim import (PointSummary, SweepConfig, SweepResult, export, run_sweep,
                  run_trial)
from .zak import FrameConfig, add_cp, dzt, idzt, remove_cp

__version__ = "0.1.0"

__all__ = [
    "ChannelRealization", "apply_channel_time", "build_g_matrix",
    "build_h_matrix", "dd_io_direct", "sample_channel",
    "DetectionResult", "cancel_data", "cancel_pilot", "equalize",
    "iterative_receive", "lmmse_equalize", "mrc_equalize",
    "SensingMatrix", "build_sensing_matrix", "channel_to_vector",
    "dd_index", "dd_index_inv", "default_threshold", "estimate_channel",
    "n_atoms", "nmse",
    "observation_indices", "omp", "select_observation", "vector_to_taps",
    "TrialRecord", "ber", "papr", "spectral_efficiency",
    "QamConstellation", "qam_demap", "qam_map", "unvec", "vec",
    "EnergySplit", "FrameLayout", "build_ep_frame", "build_pilot_cp_vector",
    "build_s1d_frame", "chu", "default_ep_location", "ep_data_mask",
    "s1d_data_mask", "validate_config",
    "PointSummary", "SweepConfig", "SweepResult", "export", "run_sweep",
    "run_trial",
    "FrameConfig", "add_cp", "dzt", "idzt", "remove_cp",
    "__version__",
]
