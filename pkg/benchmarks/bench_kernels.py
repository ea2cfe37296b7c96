"""Time the numba kernels against the pure-numpy reference.

Run with ``python benchmarks/bench_kernels.py``.  Each kernel is checked for
agreement between backends before timing.  If numba is not installed only
the numpy column is reported.
"""

import time

import numpy as np

from otfssim import _kernels_numpy as knp

try:
    from otfssim import _kernels_numba as knb
except ImportError:
    knb = None

M, N, P = 32, 16, 5
REPEATS = 200


def make_inputs(seed=7):
    rng = np.random.default_rng(seed)
    grid = (rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N)))
    gains = (rng.standard_normal(P) + 1j * rng.standard_normal(P)) / np.sqrt(2 * P)
    delays = rng.integers(0, 9, size=P).astype(np.int64)
    dopplers = rng.integers(-3, 5, size=P).astype(np.int64)
    return grid.astype(np.complex128), gains.astype(np.complex128), delays, dopplers


def mrc_inputs(seed=11):
    grid, gains, delays, dopplers = make_inputs(seed)
    rng = np.random.default_rng(seed + 1)
    resid = (rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N)))
    est = np.zeros((M, N), dtype=np.complex128)
    mask = np.zeros((M, N), dtype=np.bool_)
    mask[: M - 8, :] = True
    data_rows = np.arange(M - 8, dtype=np.int64)
    row_phase = gains[:, None] * np.exp(
        2j * np.pi * dopplers[:, None] * np.arange(M)[None, :] / (M * N))
    denom = float(np.sum(np.abs(gains) ** 2) + 0.03)
    return (resid.astype(np.complex128), est, mask, data_rows,
            gains, delays, dopplers, row_phase.astype(np.complex128), denom, 15, 1e-6)


def timeit(fn, args, repeats=REPEATS, fresh=None):
    best = np.inf
    for _ in range(repeats):
        call_args = fresh() if fresh is not None else args
        t0 = time.perf_counter()
        fn(*call_args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    grid, gains, delays, dopplers = make_inputs()
    sig = np.concatenate([np.zeros(8), (grid.real + 1j * grid.imag).ravel(order="F")])
    cases = {
        "dd_apply_taps": ((grid, gains, delays, dopplers), None),
        "time_apply_taps": ((sig, 8, gains, delays, dopplers), None),
        "mrc_sweep": (None, mrc_inputs_fresh),
    }

    print(f"grid {M}x{N}, {P} taps, best of {REPEATS} runs")
    header = f"{'kernel':<16}{'numpy':>12}"
    if knb is not None:
        header += f"{'numba':>12}{'speedup':>10}"
    print(header)

    for name, (args, fresh) in cases.items():
        f_np = getattr(knp, name)
        t_np = timeit(f_np, args, fresh=fresh)
        line = f"{name:<16}{t_np * 1e6:>10.1f}us"
        if knb is not None:
            f_nb = getattr(knb, name)
            a_np = fresh() if fresh is not None else args
            a_nb = fresh() if fresh is not None else args
            r_np, r_nb = f_np(*a_np), f_nb(*a_nb)
            check_agreement(name, a_np, a_nb, r_np, r_nb)
            f_nb(*(fresh() if fresh is not None else args))  # warm the JIT
            t_nb = timeit(f_nb, args, fresh=fresh)
            line += f"{t_nb * 1e6:>10.1f}us{t_np / t_nb:>9.1f}x"
        print(line)


def mrc_inputs_fresh():
    return mrc_inputs()


def check_agreement(name, a_np, a_nb, r_np, r_nb):
    if name == "mrc_sweep":
        # outputs live in the resid/est buffers
        np.testing.assert_allclose(a_nb[0], a_np[0], atol=1e-10)
        np.testing.assert_allclose(a_nb[1], a_np[1], atol=1e-10)
    else:
        np.testing.assert_allclose(r_nb, r_np, atol=1e-10)


if __name__ == "__main__":
    main()
