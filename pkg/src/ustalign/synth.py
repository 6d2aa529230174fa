"""Deterministic generators of smooth synthetic signals and warps.

Everything is seeded and reproducible; these feed the optimality fuzz
harnesses, the benchmark, and the action-recognition demo.
"""

from __future__ import annotations

import numpy as np

from . import se3
from .metric_spaces import (
    Signal,
    TimeGrid,
    Warp,
    scalar_space,
    se3_space,
    vector_space,
)


def smooth_warp(seed: int, n: int, strength: float = 0.5, modes: int = 4) -> Warp:
    """Random C-infinity warp t + sum a_k sin(k pi t), slope kept positive.

    Unlike random_warp this has O(h^2) slope variation between samples,
    which the group-law and optimality tolerance analyses assume.
    """
    rng = np.random.default_rng(seed)
    a = rng.normal(size=modes) / (1 + np.arange(modes)) ** 2
    k = np.arange(1, modes + 1)
    budget = np.sum(np.abs(a) * k * np.pi)
    a *= strength / budget
    t = TimeGrid(n).times
    values = t + np.sin(np.pi * np.outer(t, k)) @ a
    values[0] = 0.0
    values[-1] = 1.0
    return Warp(values)


def _fourier(rng, t, modes, amplitude):
    k = np.arange(1, modes + 1)
    a = amplitude * rng.normal(size=modes) / k**1.5
    phase = rng.uniform(0, 2 * np.pi, size=modes)
    return np.sin(np.outer(t, k) * np.pi + phase) @ a


def smooth_scalar_signal(seed: int, n: int, modes: int = 5, amplitude: float = 1.0) -> Signal:
    """Band-limited random scalar signal with a linear drift term."""
    rng = np.random.default_rng(seed)
    t = TimeGrid(n).times
    drift = rng.uniform(0.5, 1.5) * amplitude
    return Signal(drift * t + _fourier(rng, t, modes, amplitude), scalar_space())


def smooth_vector_signal(seed: int, n: int, dim: int = 3, modes: int = 5,
                         amplitude: float = 1.0) -> Signal:
    rng = np.random.default_rng(seed)
    t = TimeGrid(n).times
    cols = [rng.uniform(0.3, 1.0) * amplitude * t + _fourier(rng, t, modes, amplitude)
            for _ in range(dim)]
    return Signal(np.stack(cols, axis=1), vector_space(dim))


def smooth_se3_signal(seed: int, n: int, max_angle: float = 2.5,
                      translation: float = 1.0, modes: int = 4) -> Signal:
    """Smooth SE(3) trajectory exp(xi(t)) with rotation angle capped below pi.

    The cap keeps every log/metric evaluation away from the branch cut.
    """
    rng = np.random.default_rng(seed)
    t = TimeGrid(n).times
    omega = np.stack([_fourier(rng, t, modes, 1.0) for _ in range(3)], axis=1)
    peak = np.max(np.linalg.norm(omega, axis=1))
    if peak > 0:
        omega *= max_angle / peak
    v = np.stack(
        [translation * (rng.uniform(-1, 1) * t + _fourier(rng, t, modes, 0.5))
         for _ in range(3)],
        axis=1,
    )
    return Signal(se3.exp_se3(np.concatenate([omega, v], axis=1)), se3_space())


def smooth_bump(seed: int, n: int, amplitude: float = 0.05, modes: int = 3):
    """Endpoint-vanishing smooth perturbation, for optimality fuzz tests."""
    rng = np.random.default_rng(seed)
    t = TimeGrid(n).times
    k = np.arange(1, modes + 1)
    a = rng.normal(size=modes) / k
    norm = np.max(np.abs(np.sin(np.pi * np.outer(t, k)) @ a))
    if norm > 0:
        a *= amplitude / norm
    out = np.sin(np.pi * np.outer(t, k)) @ a
    out[0] = 0.0
    out[-1] = 0.0
    return out
