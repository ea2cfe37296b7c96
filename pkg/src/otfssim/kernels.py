"""Kernel backend selection.

The hot loops exist twice: numba-compiled (``_kernels_numba``) and pure
numpy (``_kernels_numpy``).  The environment variable ``OTFSSIM_BACKEND``
picks one at import time:

* ``auto`` (default) - numba when importable, numpy otherwise
* ``numba``          - require numba, fail if unavailable
* ``numpy``          - force the pure-numpy fallback

Results are deterministic within a backend; across backends they agree to
floating-point roundoff but not necessarily bit for bit.
"""

from __future__ import annotations

import os

_ENV_VAR = "OTFSSIM_BACKEND"


def _resolve():
    choice = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"{_ENV_VAR} must be auto, numba or numpy, got {choice!r}")
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
        return "numba"
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"


BACKEND = _resolve()

if BACKEND == "numba":
    from ._kernels_numba import dd_apply_taps, time_apply_taps, mrc_sweep
else:
    from ._kernels_numpy import dd_apply_taps, time_apply_taps, mrc_sweep

__all__ = ["BACKEND", "dd_apply_taps", "time_apply_taps", "mrc_sweep"]
