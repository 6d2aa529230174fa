"""Signal comparison and classification on the double quotient: UST distance,
nuisance-group quotienting through invariants, a dynamic-time-warping
baseline, and nearest-template classification.

The nuisance SE(3) action is never searched over; it is removed exactly by
relative-motion variables, delta trajectories, or screw invariants, which is
both cheaper and exact algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import se3
from .errors import EmptyTemplateSet, GridMismatch, SpaceMismatch, StepTooLarge
from .metric_spaces import (
    Signal,
    Space,
    TimeGrid,
    scalar_space,
    se3_product_space,
    vector_space,
)
from .reparam import ust


@dataclass(frozen=True)
class MatchReport:
    """Distance between two signals plus the per-sample evidence.

    For raw/ust the profile holds pointwise metric distances on the shared
    grid and distance is the trapezoid estimate of the squared-distance
    integral.  For dtw the profile holds metric distances along the optimal
    alignment path (also in `path`), and distance is the weighted path cost
    normalized by n + m.
    """

    method: str
    distance: float
    profile: np.ndarray
    path: list | None = field(default=None, compare=False)


def _check_same(x1: Signal, x2: Signal):
    if x1.space != x2.space:
        raise SpaceMismatch(f"spaces differ: {x1.space.tag} vs {x2.space.tag}")
    return x1.space


def pointwise_distance(y1: Signal, y2: Signal, space: Space | None = None) -> MatchReport:
    """Trapezoid estimate of the squared-distance integral on a shared grid."""
    sp = space if space is not None else _check_same(y1, y2)
    if len(y1) != len(y2):
        raise GridMismatch(f"grids differ: {len(y1)} vs {len(y2)}")
    profile = sp.pair_distances(y1.values, y2.values)
    dist = float(np.trapezoid(profile * profile, dx=y1.grid.spacing))
    return MatchReport("raw", dist, profile)


def ust_distance(x1: Signal, x2: Signal, space: Space | None = None,
                 samples: int | None = None) -> MatchReport:
    """Pointwise distance after reparameterizing both signals to the UST.

    Both signals are resampled to a common grid (the larger of the two by
    default), so the whole comparison stays O(N).
    """
    sp = space if space is not None else _check_same(x1, x2)
    m = samples if samples is not None else max(len(x1), len(x2))
    y1 = ust(x1, sp, samples=m).resampled
    y2 = ust(x2, sp, samples=m).resampled
    report = pointwise_distance(y1, y2, sp)
    return MatchReport("ust", report.distance, report.profile)


# --- dynamic time warping baseline ------------------------------------------

@njit(cache=True)
def _dtw_scalar_nopath(x, y):
    """Rolling two-row DP, squared local cost, symmetric steps (diagonal
    weight 2), boundary anchored; returns cost normalized by n + m."""
    n = x.shape[0]
    m = y.shape[0]
    prev = np.empty(m)
    cur = np.empty(m)
    d = x[0] - y[0]
    prev[0] = 2.0 * d * d
    for j in range(1, m):
        d = x[0] - y[j]
        prev[j] = prev[j - 1] + d * d
    for i in range(1, n):
        d = x[i] - y[0]
        cur[0] = prev[0] + d * d
        for j in range(1, m):
            d = x[i] - y[j]
            lo = d * d
            best = prev[j - 1] + 2.0 * lo
            up = prev[j] + lo
            if up < best:
                best = up
            left = cur[j - 1] + lo
            if left < best:
                best = left
            cur[j] = best
        prev, cur = cur, prev
    return prev[m - 1] / (n + m)


@njit(cache=True)
def _dtw_dp(cost):
    """Full DP over a local-cost matrix; returns accumulated costs and step
    codes (0 diagonal, 1 vertical, 2 horizontal; ties prefer that order)."""
    n, m = cost.shape
    acc = np.empty((n, m))
    step = np.zeros((n, m), dtype=np.int8)
    acc[0, 0] = 2.0 * cost[0, 0]
    for j in range(1, m):
        acc[0, j] = acc[0, j - 1] + cost[0, j]
        step[0, j] = 2
    for i in range(1, n):
        acc[i, 0] = acc[i - 1, 0] + cost[i, 0]
        step[i, 0] = 1
        for j in range(1, m):
            lo = cost[i, j]
            best = acc[i - 1, j - 1] + 2.0 * lo
            code = 0
            up = acc[i - 1, j] + lo
            if up < best:
                best = up
                code = 1
            left = acc[i, j - 1] + lo
            if left < best:
                best = left
                code = 2
            acc[i, j] = best
            step[i, j] = code
    return acc, step


def _backtrack(step):
    i = step.shape[0] - 1
    j = step.shape[1] - 1
    path = [(i, j)]
    while i > 0 or j > 0:
        code = step[i, j]
        if code == 0:
            i -= 1
            j -= 1
        elif code == 1:
            i -= 1
        else:
            j -= 1
        path.append((i, j))
    path.reverse()
    return path


def squared_cost_matrix(x1: Signal, x2: Signal, space: Space | None = None,
                        chunk: int = 2_000_000):
    """All-pairs squared distances, row-chunked to bound peak memory."""
    sp = space if space is not None else _check_same(x1, x2)
    a = x1.values
    b = x2.values
    n, m = a.shape[0], b.shape[0]
    if sp.kind == "scalar":
        d = a[:, None] - b[None, :]
        return d * d
    if sp.kind in ("vector", "matrix"):
        axes = tuple(range(2, 2 + len(sp.shape)))
        d = np.sum((a[:, None] - b[None, :]) ** 2, axis=axes)
        return d
    rows_per = max(1, chunk // max(m, 1))
    out = np.empty((n, m))
    for lo in range(0, n, rows_per):
        hi = min(lo + rows_per, n)
        block = sp.pair_distances(
            np.broadcast_to(a[lo:hi, None], (hi - lo, m) + sp.shape),
            np.broadcast_to(b[None, :], (hi - lo, m) + sp.shape),
        )
        out[lo:hi] = block * block
    return out


def dtw_distance(x1: Signal, x2: Signal, space: Space | None = None,
                 keep_path: bool = True) -> MatchReport:
    """Classic O(N^2) dynamic-programming alignment baseline.

    Squared metric local cost, symmetric step pattern (diagonal counts
    twice), boundary anchored, cost normalized by n + m so the value of any
    path is comparable.  With keep_path=False only the distance is computed
    (rolling rows, used by the benchmark).
    """
    sp = space if space is not None else _check_same(x1, x2)
    if not keep_path and sp.kind == "scalar":
        value = _dtw_scalar_nopath(x1.values, x2.values)
        return MatchReport("dtw", float(value), np.empty(0))
    cost = squared_cost_matrix(x1, x2, sp)
    acc, step = _dtw_dp(cost)
    value = float(acc[-1, -1] / (len(x1) + len(x2)))
    if not keep_path:
        return MatchReport("dtw", value, np.empty(0))
    path = _backtrack(step)
    profile = np.sqrt(np.array([cost[i, j] for i, j in path]))
    return MatchReport("dtw", value, profile, path)


# --- classification ----------------------------------------------------------

def classify_nearest(query: Signal, templates, space: Space | None = None,
                     method: str = "ust"):
    """Label of the minimum-distance template; ties break to lowest index.

    templates is a sequence of (label, Signal) pairs.  Returns
    (label, score, all_scores) with all_scores in template order.
    """
    templates = list(templates)
    if not templates:
        raise EmptyTemplateSet("no templates given")
    dispatch = {
        "raw": pointwise_distance,
        "ust": ust_distance,
        "dtw": lambda a, b, sp: dtw_distance(a, b, sp, keep_path=False),
    }
    if method not in dispatch:
        raise ValueError(f"unknown method {method!r}")
    scores = []
    for label, tmpl in templates:
        sp = space if space is not None else _check_same(query, tmpl)
        scores.append((label, dispatch[method](query, tmpl, sp).distance))
    best = min(range(len(scores)), key=lambda i: scores[i][1])
    return scores[best][0], scores[best][1], scores


# --- SE(3) body trajectories and nuisance-group quotients --------------------

@dataclass(frozen=True)
class BodyTrajectory:
    """Shoulder, elbow, and hand poses on one shared grid."""

    shoulder: Signal
    elbow: Signal
    hand: Signal

    def __post_init__(self):
        for part in (self.shoulder, self.elbow, self.hand):
            if part.space.kind != "se3":
                raise SpaceMismatch("body trajectories are SE(3)-valued")
        if not len(self.shoulder) == len(self.elbow) == len(self.hand):
            raise GridMismatch("joint signals have different lengths")

    def __len__(self):
        return len(self.shoulder)


def left_translate(traj: BodyTrajectory, g) -> BodyTrajectory:
    """Apply a common pose (or per-sample poses) on the left of each joint."""
    def move(sig):
        return Signal(se3.compose(g, sig.values), sig.space)
    return BodyTrajectory(move(traj.shoulder), move(traj.elbow), move(traj.hand))


def scale_translations(traj: BodyTrajectory, factor: float) -> BodyTrajectory:
    """Uniform body-size normalization of the translation parts."""
    def scaled(sig):
        v = np.array(sig.values)
        v[:, :3, 3] *= factor
        return Signal(v, sig.space)
    return BodyTrajectory(scaled(traj.shoulder), scaled(traj.elbow), scaled(traj.hand))


def relative_motion_signal(traj: BodyTrajectory) -> Signal:
    """Per-sample relative poses (S^-1 E, S^-1 H, E^-1 H).

    Left action by any common g(t), static or time varying, cancels exactly:
    (gS)^-1 (gE) = S^-1 E pointwise.
    """
    s_inv = se3.inverse(traj.shoulder.values)
    rel = np.stack(
        [
            se3.compose(s_inv, traj.elbow.values),
            se3.compose(s_inv, traj.hand.values),
            se3.compose(se3.inverse(traj.elbow.values), traj.hand.values),
        ],
        axis=1,
    )
    return Signal(rel, se3_product_space(3))


def delta_signal(x: Signal, step: int = 1) -> Signal:
    """Finite-lag displacements X_k^-1 X_{k+step}, invariant to a static
    left pose; the grid is renormalized to [0, 1]."""
    if step < 1:
        raise StepTooLarge(f"step must be >= 1, got {step}")
    n = len(x)
    if n - step < 2:
        raise StepTooLarge(f"step {step} leaves fewer than 2 of {n} samples")
    vals = se3.compose(se3.inverse(x.values[:-step]), x.values[step:])
    return Signal(vals, x.space, TimeGrid(n - step))


def screw_signal(x: Signal, step: int = 1):
    """Screw invariants of the delta trajectory: scalar signals theta(t), d(t).

    Both are invariant under conjugation of the displacements, hence under a
    static change of reference pose.
    """
    deltas = delta_signal(x, step)
    theta, d = se3.screw_invariants(deltas.values)
    grid = deltas.grid
    return Signal(theta, scalar_space(), grid), Signal(d, scalar_space(), grid)


def _screw_stack(traj: BodyTrajectory, step: int) -> Signal:
    channels = []
    for part in (traj.shoulder, traj.elbow, traj.hand):
        theta, d = screw_signal(part, step)
        channels.extend([theta.values, d.values])
    return Signal(np.stack(channels, axis=1), vector_space(6))


def trajectory_signal(traj: BodyTrajectory, quotient: str = "relative",
                      step: int = 1) -> Signal:
    """Signal representation of a body trajectory for matching.

    quotient="relative" gives the relative-motion SE(3)^3 signal,
    "screw" the stacked screw-invariant scalars of per-joint deltas, and
    "none" the raw (S, E, H) triple as a product-space signal.
    """
    if quotient == "relative":
        return relative_motion_signal(traj)
    if quotient == "screw":
        return _screw_stack(traj, step)
    if quotient == "none":
        vals = np.stack(
            [traj.shoulder.values, traj.elbow.values, traj.hand.values], axis=1
        )
        return Signal(vals, se3_product_space(3))
    raise ValueError(f"unknown quotient {quotient!r}")


def classify_trajectory(query: BodyTrajectory, templates, quotient: str = "relative",
                        method: str = "ust", step: int = 1):
    """Nearest-template classification of a body trajectory; templates is a
    sequence of (label, BodyTrajectory)."""
    q = trajectory_signal(query, quotient, step)
    sigs = [(label, trajectory_signal(t, quotient, step)) for label, t in templates]
    return classify_nearest(q, sigs, method=method)


def quotient_distance(x1: BodyTrajectory, x2: BodyTrajectory,
                      method: str = "relative", step: int = 1,
                      samples: int | None = None) -> MatchReport:
    """UST distance on the nuisance-quotient representation.

    method="relative" compares the relative-motion SE(3)^3 signals (exact
    invariance to common left action); method="screw" compares the stacked
    per-joint screw-invariant scalars of the delta trajectories (invariance
    to a static pose).
    """
    if method == "relative":
        a, b = relative_motion_signal(x1), relative_motion_signal(x2)
    elif method == "screw":
        a, b = _screw_stack(x1, step), _screw_stack(x2, step)
    else:
        raise ValueError(f"unknown quotient method {method!r}")
    report = ust_distance(a, b, samples=samples)
    return MatchReport(f"ust+{method}", report.distance, report.profile)
