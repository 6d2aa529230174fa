"""Bootstrapped globally optimal variational problems: a one-dimensional
timescale-type base problem extended by m auxiliary coordinates whose cost
penalizes the W-weighted mismatch between sdot and A(x) xdot.

The closed-form construction: x* solves the base problem, the auxiliary
momentum W(sdot - A xdot) is a constant vector a fixed by the s boundary
values, and s* follows by cumulative quadrature.  The discrete s* built here
satisfies the discrete stationarity condition exactly (the per-segment
momentum is the same constant on every segment), so perturbing s can only
increase the discrete cost.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import SingularWeightIntegral, UstAlignError
from ..metric_spaces import TimeGrid
from ..reparam import optimal_warp, speed_table_from_profile

#: tolerance of the finite-difference check of the coupling-matrix symmetry
#: condition dA_ji/dx_k = dA_jk/dx_i
COUPLING_SYMMETRY_TOL = 1e-6


@dataclass(frozen=True)
class Theorem1Form:
    """Base integrand g(x) xdot^2 with analytic g and dg/dx."""

    g: Callable
    dg: Callable


@dataclass(frozen=True)
class BootstrapProblem:
    """One-dimensional base problem (x from 0 to 1 under g(x) xdot^2)
    extended by m coordinates s with coupling A(x) and weight W(t).

    g_profile maps x arrays to positive values; coupling maps a scalar x to
    an (m,) vector (the single column of the m x 1 matrix A); weight maps a
    time array (K,) to (K, m, m) symmetric positive definite matrices.
    """

    g_profile: Callable
    coupling: Callable
    weight: Callable
    m: int
    s_start: np.ndarray
    s_end: np.ndarray
    n_samples: int = 2001

    def __post_init__(self):
        object.__setattr__(self, "s_start", np.atleast_1d(np.asarray(self.s_start, dtype=float)))
        object.__setattr__(self, "s_end", np.atleast_1d(np.asarray(self.s_end, dtype=float)))
        if self.s_start.shape != (self.m,) or self.s_end.shape != (self.m,):
            raise UstAlignError("boundary values must be m-vectors")
        probe = self.g_profile(np.linspace(0.0, 1.0, 64))
        if np.any(probe <= 0):
            raise UstAlignError("base profile g(x) must stay positive on [0, 1]")
        w = self.weight_at(np.linspace(0.0, 1.0, 16))
        if np.max(np.abs(w - np.swapaxes(w, -1, -2))) > 1e-10:
            raise UstAlignError("W(t) must be symmetric")
        if np.any(np.linalg.eigvalsh(w)[..., 0] <= 0):
            raise UstAlignError("W(t) must be positive definite")

    def coupling_at(self, x):
        """A(x) columns at each sample of a scalar-x array: (K, m)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.stack([np.atleast_1d(np.asarray(self.coupling(v), dtype=float))
                         for v in x])

    def weight_at(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        w = np.asarray(self.weight(t), dtype=float)
        if w.shape != (t.shape[0], self.m, self.m):
            raise UstAlignError(f"weight returned shape {w.shape}")
        return w


def check_coupling_symmetry(coupling: Callable, n: int, m: int,
                            probes: int = 100, seed: int = 0) -> float:
    """Max violation of dA_ji/dx_k = dA_jk/dx_i by central differences.

    coupling maps an (n,) point to an (m, n) matrix.  For n = 1 the
    condition is vacuous.  Returns the sup over probe points; callers
    compare against COUPLING_SYMMETRY_TOL.
    """
    if n == 1:
        return 0.0
    rng = np.random.default_rng(seed)
    step = 1e-6
    worst = 0.0
    for _ in range(probes):
        x = rng.uniform(0.0, 1.0, size=n)
        grad = np.empty((m, n, n))  # grad[j, i, k] = dA_ji/dx_k
        for k in range(n):
            e = np.zeros(n)
            e[k] = step
            grad[:, :, k] = (np.asarray(coupling(x + e)) - np.asarray(coupling(x - e))) / (2 * step)
        worst = max(worst, float(np.max(np.abs(grad - np.swapaxes(grad, 1, 2)))))
    return worst


@dataclass(frozen=True)
class BootstrapSolution:
    x_star: np.ndarray   # (N,)
    s_star: np.ndarray   # (N, m)
    a: np.ndarray        # (m,) constant auxiliary momentum
    times: np.ndarray    # (N,)


def _base_solution(problem: BootstrapProblem):
    n = problem.n_samples
    x = TimeGrid(n).times
    mid = 0.5 * (x[:-1] + x[1:])
    table = speed_table_from_profile(np.sqrt(problem.g_profile(mid)))
    return optimal_warp(table, TimeGrid(n)).values


def bootstrap_solution(problem: BootstrapProblem) -> BootstrapSolution:
    """Closed-form optimum (x*, s*, a) of the composite problem.

    a solves the affine shooting condition s*(1) = s_end: the map a -> s*(1)
    has matrix integral(W^-1 dt), invertible because W is positive definite.
    """
    n = problem.n_samples
    t = TimeGrid(n).times
    h = 1.0 / (n - 1)
    x_star = _base_solution(problem)

    t_mid = 0.5 * (t[:-1] + t[1:])
    w_inv = np.linalg.inv(problem.weight_at(t_mid))          # (N-1, m, m)
    i_w = np.sum(w_inv, axis=0) * h
    cond = np.linalg.cond(i_w)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularWeightIntegral(f"integral of W^-1 has condition {cond:.3g}")

    dx = np.diff(x_star)
    x_mid = 0.5 * (x_star[:-1] + x_star[1:])
    a_cols = problem.coupling_at(x_mid)                      # (N-1, m)
    i_a = np.sum(a_cols * dx[:, None], axis=0)

    a = np.linalg.solve(i_w, problem.s_end - problem.s_start - i_a)
    increments = np.einsum("kij,j->ki", w_inv, a) * h + a_cols * dx[:, None]
    s_star = problem.s_start + np.concatenate(
        [np.zeros((1, problem.m)), np.cumsum(increments, axis=0)]
    )
    return BootstrapSolution(x_star, s_star, a, t)


def _check_boundaries(problem, x_traj, s_traj, tol=1e-9):
    if abs(x_traj[0]) > tol or abs(x_traj[-1] - 1.0) > tol:
        raise UstAlignError("x trajectory must run from 0 to 1")
    if (np.max(np.abs(s_traj[0] - problem.s_start)) > tol
            or np.max(np.abs(s_traj[-1] - problem.s_end)) > tol):
        raise UstAlignError("s trajectory violates the boundary values")


def bootstrap_cost(problem: BootstrapProblem, x_traj, s_traj) -> float:
    """Midpoint quadrature of the composite integrand
    g(x) xdot^2 + |sdot - A(x) xdot|^2_W / 2 along sampled trajectories."""
    x_traj = np.asarray(x_traj, dtype=float)
    s_traj = np.atleast_2d(np.asarray(s_traj, dtype=float))
    if s_traj.shape[0] != x_traj.shape[0]:
        s_traj = s_traj.T
    _check_boundaries(problem, x_traj, s_traj)
    n = x_traj.shape[0]
    h = 1.0 / (n - 1)
    t_mid = 0.5 * (TimeGrid(n).times[:-1] + TimeGrid(n).times[1:])
    x_mid = 0.5 * (x_traj[:-1] + x_traj[1:])
    xdot = np.diff(x_traj) / h
    sdot = np.diff(s_traj, axis=0) / h
    mismatch = sdot - problem.coupling_at(x_mid) * xdot[:, None]
    w = problem.weight_at(t_mid)
    coupling_term = 0.5 * np.einsum("ki,kij,kj->k", mismatch, w, mismatch)
    base_term = problem.g_profile(x_mid) * xdot * xdot
    return float(np.sum(base_term + coupling_term) * h)


def coupling_cost(problem: BootstrapProblem, x_traj, s_traj) -> float:
    """Only the W-weighted mismatch part of the composite cost."""
    x_traj = np.asarray(x_traj, dtype=float)
    s_traj = np.atleast_2d(np.asarray(s_traj, dtype=float))
    if s_traj.shape[0] != x_traj.shape[0]:
        s_traj = s_traj.T
    n = x_traj.shape[0]
    h = 1.0 / (n - 1)
    t_mid = 0.5 * (TimeGrid(n).times[:-1] + TimeGrid(n).times[1:])
    x_mid = 0.5 * (x_traj[:-1] + x_traj[1:])
    xdot = np.diff(x_traj) / h
    sdot = np.diff(s_traj, axis=0) / h
    mismatch = sdot - problem.coupling_at(x_mid) * xdot[:, None]
    w = problem.weight_at(t_mid)
    return float(0.5 * np.sum(np.einsum("ki,kij,kj->k", mismatch, w, mismatch)) * h)


def block_metric(problem: BootstrapProblem, x: float, t: float) -> np.ndarray:
    """Composite metric tensor at (x, t) for a base integrand written as
    xdot^T G xdot / 2 (so G = 2 g(x) in the scalar base case):

        [[ G + A^T W A,  -A^T W ],
         [    -W A,         W   ]]

    The quadratic form (xdot, sdot) of this matrix reproduces twice the
    composite integrand; the off-diagonal sign carries the minus from the
    sdot - A xdot mismatch.  Symmetric positive definite whenever G and W
    are.
    """
    g_base = 2.0 * float(problem.g_profile(np.atleast_1d(x))[0])
    a_col = problem.coupling_at(x)[0][:, None]               # (m, 1)
    w = problem.weight_at(t)[0]
    top_left = np.array([[g_base]]) + a_col.T @ w @ a_col
    top_right = -a_col.T @ w
    out = np.block([[top_left, top_right], [top_right.T, w]])
    return 0.5 * (out + out.T)


def el_residual(f_spec, x_traj, s_traj=None, trim: float = 0.05) -> float:
    """Sup norm of the discretized Euler-Lagrange left side at interior points.

    For a Theorem1Form the staggered discretization uses exact segment
    slopes: momentum p = 2 xdot g(x) at segment midpoints, its difference
    quotient against the force xdot^2 dg(x) at nodes.  Samples within
    `trim` of either endpoint are excluded, since xdot may be unbounded at a
    boundary where g vanishes.

    For a BootstrapProblem (with s_traj) the stationarity component in s is
    checked: the auxiliary momentum W (sdot - A xdot) must be constant, so
    the residual is the difference quotient of the per-segment momentum.
    """
    x_traj = np.asarray(x_traj, dtype=float)
    n = x_traj.shape[0]
    h = 1.0 / (n - 1)
    t = TimeGrid(n).times

    if isinstance(f_spec, Theorem1Form):
        xdot_seg = np.diff(x_traj) / h
        x_mid = 0.5 * (x_traj[:-1] + x_traj[1:])
        momentum = 2.0 * xdot_seg * f_spec.g(x_mid)
        dp = np.diff(momentum) / h
        xdot_node = (x_traj[2:] - x_traj[:-2]) / (2.0 * h)
        force = xdot_node * xdot_node * f_spec.dg(x_traj[1:-1])
        residual = np.abs(force - dp)
    elif isinstance(f_spec, BootstrapProblem):
        if s_traj is None:
            raise UstAlignError("composite residual needs the s trajectory")
        s_traj = np.atleast_2d(np.asarray(s_traj, dtype=float))
        if s_traj.shape[0] != n:
            s_traj = s_traj.T
        t_mid = 0.5 * (t[:-1] + t[1:])
        x_mid = 0.5 * (x_traj[:-1] + x_traj[1:])
        xdot = np.diff(x_traj) / h
        sdot = np.diff(s_traj, axis=0) / h
        mismatch = sdot - f_spec.coupling_at(x_mid) * xdot[:, None]
        sigma = np.einsum("kij,kj->ki", f_spec.weight_at(t_mid), mismatch)
        residual = np.max(np.abs(np.diff(sigma, axis=0)), axis=1) / h
    else:
        raise UstAlignError(f"unsupported integrand spec {type(f_spec).__name__}")

    keep = (t[1:-1] >= trim) & (t[1:-1] <= 1.0 - trim)
    if not np.any(keep):
        keep = slice(None)
    return float(np.max(residual[keep]))
