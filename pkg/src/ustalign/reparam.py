"""Globally optimal temporal reparameterization onto the universal standard
timescale (UST).

The pipeline estimates the square-root Lagrangian g^(1/2) by chordal segment
distances, accumulates it into a normalized cumulative table F, and inverts F
piecewise-linearly: tau*(t) = F^-1(t).  The resampled signal Y(t) = X(tau*(t))
then changes at a constant rate as measured by the space's metric, and the
whole computation is O(N).

A chordal estimate needs only continuity of the underlying path, and global
optimality of the inverse-cumulative construction survives at that
regularity, so no smoothing pass is applied.  Zero-speed plateaus are handled
by a tiny per-segment floor that keeps the cumulative strictly increasing
while perturbing tau* at the 1e-9 level; strict mode rejects zero-length
signals instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSignal, SignalTooShort
from .metric_spaces import Signal, Space, TimeGrid, Warp

#: Per-segment regularization floor is FLOOR_SCALE * total_length / n.
FLOOR_SCALE = 1e-9


@dataclass(frozen=True)
class SpeedTable:
    """Sampled g^(1/2) and its regularized normalized cumulative integral.

    sqrt_g holds chordal speed estimates at segment midpoints (distance per
    unit normalized time), cumulative the strictly increasing F with F_0 = 0
    and F_{n-1} = 1, total_length the raw path length c before
    regularization, and eps_floor the per-segment floor that was added.
    """

    sqrt_g: np.ndarray
    cumulative: np.ndarray
    total_length: float
    eps_floor: float

    @property
    def n(self):
        return self.cumulative.shape[0]

    @property
    def regularized_length(self):
        """Total length including the floor contribution."""
        return self.total_length + (self.n - 1) * self.eps_floor


def _table_from_chords(chords, strict):
    n = chords.shape[0] + 1
    c = float(np.sum(chords))
    if strict and c == 0.0:
        raise DegenerateSignal("signal has zero path length")
    eps = FLOOR_SCALE * max(c, 1e-300) / n
    cum = np.concatenate([[0.0], np.cumsum(chords)]) + np.arange(n) * eps
    cum /= c + (n - 1) * eps
    cum[0] = 0.0
    cum[-1] = 1.0
    return SpeedTable(
        sqrt_g=chords * (n - 1),
        cumulative=cum,
        total_length=c,
        eps_floor=eps,
    )


def speed_table(sig: Signal, space: Space | None = None, strict: bool = False) -> SpeedTable:
    """Chordal estimate of g^(1/2) = |X'| and its cumulative integral.

    Segment speeds are s_k = d(X_{k+1}, X_k) * (N-1); the total length c is
    their mean time-step-weighted sum, i.e. the chordal path length.
    """
    space = space if space is not None else sig.space
    if len(sig) < 2:
        raise SignalTooShort(f"need at least 2 samples, got {len(sig)}")
    return _table_from_chords(space.segment_distances(sig.values), strict)


def speed_table_from_profile(sqrt_g, strict: bool = False) -> SpeedTable:
    """Build a table directly from g^(1/2) sampled at segment midpoints."""
    sqrt_g = np.asarray(sqrt_g, dtype=float)
    if sqrt_g.ndim != 1 or sqrt_g.shape[0] < 1:
        raise SignalTooShort("profile needs at least 1 segment value")
    if np.any(sqrt_g < 0):
        raise ValueError("g^(1/2) values must be nonnegative")
    return _table_from_chords(sqrt_g / sqrt_g.shape[0], strict)


def optimal_warp(table: SpeedTable, out_grid: TimeGrid) -> Warp:
    """Invert the cumulative table: the warp tau* with F(tau*(t)) = t.

    Piecewise-linear inversion of a strictly increasing table; the
    regularization floor guarantees invertibility even across zero-speed
    plateaus.
    """
    x = np.arange(table.n) / (table.n - 1)
    tau = np.interp(out_grid.times, table.cumulative, x)
    tau[0] = 0.0
    tau[-1] = 1.0
    return Warp(tau)


def _brackets(times, queries):
    """Bracketing segment index and local parameter for each query."""
    n = times.shape[0]
    k = np.searchsorted(times, queries, side="right") - 1
    k = np.clip(k, 0, n - 2)
    alpha = (queries - times[k]) / (times[k + 1] - times[k])
    return k, np.clip(alpha, 0.0, 1.0)


def apply_warp(sig: Signal, w: Warp, space: Space | None = None) -> Signal:
    """Resample: Y_j = X(w_j), interpolating within the bracketing segment.

    Grid hits are copied bitwise, so applying the identity warp returns the
    original samples exactly and both endpoints are always preserved.
    """
    space = space if space is not None else sig.space
    values = sig.values
    k, alpha = _brackets(sig.grid.times, w.values)
    out = space.interpolate_stacked(values[k], values[k + 1], alpha)
    left_hit = alpha == 0.0
    if np.any(left_hit):
        out[left_hit] = values[k[left_hit]]
    right_hit = (alpha == 1.0) | (w.values == 1.0)
    if np.any(right_hit):
        out[right_hit] = values[np.minimum(k[right_hit] + 1, len(sig) - 1)]
    return Signal(out, space, TimeGrid(len(w)))


@dataclass(frozen=True)
class UstResult:
    """Optimal warp tau*, the resampled signal Y(t) = X(tau*(t)), and the
    path length c (the constant speed of Y)."""

    warp_star: Warp
    resampled: Signal
    total_length: float


def ust(
    sig: Signal,
    space: Space | None = None,
    samples: int | None = None,
    strict: bool = False,
) -> UstResult:
    """Full pipeline speed_table -> optimal_warp -> apply_warp, O(N)."""
    space = space if space is not None else sig.space
    table = speed_table(sig, space, strict=strict)
    out_grid = TimeGrid(samples) if samples is not None else sig.grid
    w = optimal_warp(table, out_grid)
    return UstResult(
        warp_star=w,
        resampled=apply_warp(sig, w, space),
        total_length=table.total_length,
    )


def functional_cost(sig: Signal, candidate: Warp, space: Space | None = None) -> float:
    """Reparameterization cost J(y) = integral of g(y) ydot^2 for any warp y.

    Estimated chordally on the warped signal: J = (M-1) * sum of squared
    segment distances, the trapezoid/midpoint analogue of the integral.  The
    optimal warp attains c^2, the squared path length.
    """
    space = space if space is not None else sig.space
    warped = apply_warp(sig, candidate, space)
    d = space.segment_distances(warped.values)
    return float(np.sum(d * d) * (len(candidate) - 1))


def closed_form_speed_check(
    result: UstResult, table: SpeedTable, trim: float = 0.05
) -> float:
    """Sup residual of the closed-form speed law taudot* = c / g^(1/2)(tau*).

    taudot* is estimated by central differences at interior samples and
    compared against the regularized table speed at tau*.  Samples within
    `trim` of either endpoint are excluded: there taudot* may be unbounded
    (e.g. when g^(1/2) vanishes at the boundary) and no finite-difference
    estimate converges.  Diagnostic only.
    """
    w = result.warp_star.values
    m = w.shape[0]
    t = np.arange(m) / (m - 1)
    h = 1.0 / (m - 1)
    fd = (w[2:] - w[:-2]) / (2.0 * h)

    n = table.n
    seg = np.clip((w[1:-1] * (n - 1)).astype(int), 0, n - 2)
    s_eff = table.sqrt_g[seg] + table.eps_floor * (n - 1)
    target = table.regularized_length / s_eff

    keep = (t[1:-1] >= trim) & (t[1:-1] <= 1.0 - trim)
    if not np.any(keep):
        keep = slice(None)
    return float(np.max(np.abs(fd - target)[keep]))
