"""Runtime measurement of the two alignment routes.

Medians of repeated runs on seeded random smooth signal pairs, with one
untimed warm-up per size (which also absorbs JIT compilation), and fitted
log-log slopes as the empirical complexity exponents.
"""

from __future__ import annotations

import time

import numpy as np

from .matching import dtw_distance, ust_distance
from .synth import smooth_scalar_signal

UST_SIZES = (1_000, 10_000, 100_000, 1_000_000)
DTW_SIZES = (100, 1_000, 3_000, 10_000)


def _median_runtime(fn, repeat):
    fn()  # warm-up, excluded from the statistics
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def fit_slope(sizes, medians) -> float:
    """Least-squares slope of log runtime against log size."""
    return float(np.polyfit(np.log(np.asarray(sizes, dtype=float)),
                            np.log(np.asarray(medians, dtype=float)), 1)[0])


def run_bench(method: str, sizes=None, repeat: int = 5, seed: int = 0):
    """Median runtimes per size for one method ("ust" or "dtw").

    Returns (rows, slope) with rows of (size, median_seconds).
    """
    if method == "ust":
        sizes = UST_SIZES if sizes is None else tuple(sizes)
        run = lambda a, b: ust_distance(a, b)
    elif method == "dtw":
        sizes = DTW_SIZES if sizes is None else tuple(sizes)
        run = lambda a, b: dtw_distance(a, b, keep_path=False)
    else:
        raise ValueError(f"unknown bench method {method!r}")
    if any(n < 2 for n in sizes):
        raise ValueError("sizes must be at least 2")

    rows = []
    for k, n in enumerate(sizes):
        a = smooth_scalar_signal(seed + 2 * k, n)
        b = smooth_scalar_signal(seed + 2 * k + 1, n)
        rows.append((n, _median_runtime(lambda: run(a, b), repeat)))
    return rows, fit_slope([r[0] for r in rows], [r[1] for r in rows])
