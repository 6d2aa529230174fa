"""Synthetic image-flow scenes: Gaussian blob mixtures with blob parameters
given as polynomials in tau.

Analytic spatial gradients and tau-derivatives remove image-interpolation
error from the theorem verification; only quadrature error remains.

Scene description file (JSON, one object)::

    {
      "format": "ustalign-scene v1",
      "group": "translation2" | "se2",
      "extent": 4.0,            # image domain is the square [-extent, extent]^2
      "grid": 64,               # midpoint-rule quadrature points per axis
      "tau_samples": 257,       # samples of the Lagrangian tables on [0, 1]
      "blobs": [
        {
          "center_x":  [p0, p1, ...],   # polynomial coefficients in tau,
          "center_y":  [p0, p1, ...],   # ascending order
          "amplitude": [p0, p1, ...],   # must stay >= 0 on [0, 1]
          "width":     [p0, p1, ...]    # must stay > 0 on [0, 1]
        },
        ...
      ]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import ParseError, UstAlignError


def _polyval(coeffs, tau):
    """Evaluate ascending-coefficient polynomials: (B, deg+1) x (T,) -> (B, T)."""
    out = np.zeros((coeffs.shape[0], tau.shape[0]))
    for k in range(coeffs.shape[1] - 1, -1, -1):
        out = out * tau + coeffs[:, k][:, None]
    return out


def _polyder(coeffs):
    if coeffs.shape[1] == 1:
        return np.zeros((coeffs.shape[0], 1))
    return coeffs[:, 1:] * np.arange(1, coeffs.shape[1])


def _pad(rows):
    width = max(len(r) for r in rows)
    out = np.zeros((len(rows), width))
    for i, r in enumerate(rows):
        out[i, : len(r)] = r
    return out


@dataclass(frozen=True)
class GaussianBlobScene:
    """Image family h(z, tau) = sum_b amp_b exp(-|z - cen_b|^2 / (2 w_b^2))."""

    center_x: np.ndarray   # (B, deg+1) ascending polynomial coefficients
    center_y: np.ndarray
    amplitude: np.ndarray
    width: np.ndarray
    extent: float = 4.0
    grid: int = 64
    tau_samples: int = 257
    group_name: str = "translation2"

    def __post_init__(self):
        for name in ("center_x", "center_y", "amplitude", "width"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        probe = np.linspace(0.0, 1.0, 101)
        if np.any(_polyval(self.amplitude, probe) < 0):
            raise UstAlignError("blob amplitude goes negative on [0, 1]")
        if np.any(_polyval(self.width, probe) <= 0):
            raise UstAlignError("blob width must stay positive on [0, 1]")

    @property
    def n_blobs(self):
        return self.center_x.shape[0]

    def quadrature(self):
        """Midpoint-rule points (P, 2) and the common cell weight."""
        step = 2.0 * self.extent / self.grid
        axis = -self.extent + step * (np.arange(self.grid) + 0.5)
        gx, gy = np.meshgrid(axis, axis, indexing="ij")
        return np.stack([gx.reshape(-1), gy.reshape(-1)], axis=1), step * step

    def fields(self, points, tau):
        """h, grad h (spatial), and dh/dtau at each (tau, point).

        Returns arrays of shape (T, P), (T, P, 2), (T, P); everything is
        analytic in the blob parameters.
        """
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        cx = _polyval(self.center_x, tau)            # (B, T)
        cy = _polyval(self.center_y, tau)
        amp = _polyval(self.amplitude, tau)
        wid = _polyval(self.width, tau)
        dcx = _polyval(_polyder(self.center_x), tau)
        dcy = _polyval(_polyder(self.center_y), tau)
        damp = _polyval(_polyder(self.amplitude), tau)
        dwid = _polyval(_polyder(self.width), tau)

        # broadcast to (B, T, P)
        px = points[:, 0][None, None, :]
        py = points[:, 1][None, None, :]
        dx = px - cx[..., None]
        dy = py - cy[..., None]
        w2 = (wid * wid)[..., None]
        r2 = dx * dx + dy * dy
        bump = np.exp(-r2 / (2.0 * w2))

        h = np.sum(amp[..., None] * bump, axis=0)
        gx = np.sum(amp[..., None] * bump * (-dx / w2), axis=0)
        gy = np.sum(amp[..., None] * bump * (-dy / w2), axis=0)
        dh = np.sum(
            bump
            * (
                damp[..., None]
                + amp[..., None]
                * (
                    (dx * dcx[..., None] + dy * dcy[..., None]) / w2
                    + r2 * dwid[..., None] / (w2 * wid[..., None])
                )
            ),
            axis=0,
        )
        return h, np.stack([gx, gy], axis=-1), dh


def write_scene(scene: GaussianBlobScene, path) -> None:
    blobs = []
    for i in range(scene.n_blobs):
        blobs.append(
            {
                "center_x": list(scene.center_x[i]),
                "center_y": list(scene.center_y[i]),
                "amplitude": list(scene.amplitude[i]),
                "width": list(scene.width[i]),
            }
        )
    payload = {
        "format": "ustalign-scene v1",
        "group": scene.group_name,
        "extent": scene.extent,
        "grid": scene.grid,
        "tau_samples": scene.tau_samples,
        "blobs": blobs,
    }
    with open(path, "w", newline="") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def read_scene(path) -> GaussianBlobScene:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != "ustalign-scene v1":
        raise ParseError(f"not a scene file: {path}", line=1)
    blobs = payload["blobs"]
    return GaussianBlobScene(
        center_x=_pad([b["center_x"] for b in blobs]),
        center_y=_pad([b["center_y"] for b in blobs]),
        amplitude=_pad([b["amplitude"] for b in blobs]),
        width=_pad([b["width"] for b in blobs]),
        extent=float(payload["extent"]),
        grid=int(payload["grid"]),
        tau_samples=int(payload["tau_samples"]),
        group_name=payload["group"],
    )


# --- seeded scenes used by the verification suites ---------------------------

def uniform_drift_scene(tau_samples: int = 257, grid: int = 64,
                        shear: float = 0.0) -> GaussianBlobScene:
    """Blobs translating at constant speed: constant M, b, c tables.

    With shear = 0 all blobs share one velocity, so the motion is perfectly
    explained by a translation flow (zero residual profile).  A nonzero
    shear makes one blob drift differently; no single translation explains
    that, leaving a constant positive residual profile while the tables stay
    time independent.  Blobs are kept far from each other and from the
    domain boundary so overlap and truncation tails stay below roundoff.
    """
    return GaussianBlobScene(
        center_x=[[-3.2, 1.2], [1.4, 1.2 + shear], [-2.6, 1.2]],
        center_y=[[-2.8, 0.6], [2.4, 0.6 - shear], [2.4, 0.6]],
        amplitude=[[1.0], [0.7], [0.5]],
        width=[[0.3], [0.25], [0.35]],
        extent=6.0,
        grid=grid,
        tau_samples=tau_samples,
        group_name="translation2",
    )


def bunched_motion_scene(tau_samples: int = 257, grid: int = 64,
                         group_name: str = "translation2") -> GaussianBlobScene:
    """Unexplainable change bunched into early tau: blobs share a drift but
    pulse in amplitude and drift apart fastest near tau = 0."""
    # q(tau) = tau - 0.8*(tau^2 - tau^3*2/3): qdot = 1 - 1.6 tau + 1.6 tau^2,
    # large near the ends, smallest mid-way; amplitude pulses die off in tau.
    q = [0.0, 1.0, -0.8, 8.0 / 15.0]
    return GaussianBlobScene(
        center_x=[
            [-1.2, 1.1, -0.3, 0.2],
            [-0.2] + list(0.7 * np.array(q[1:])),
            [0.4, 0.5, 0.3, -0.2],
        ],
        center_y=[
            [-0.6, 0.4, 0.3, -0.1],
            [0.8, -0.5, -0.2, 0.1],
            [-1.0, 0.9, -0.4, 0.2],
        ],
        amplitude=[
            [1.0, -0.9, 0.35],
            [0.8, -0.5, 0.2],
            [0.6, -0.2, 0.1],
        ],
        width=[[0.4], [0.35], [0.5]],
        extent=4.0,
        grid=grid,
        tau_samples=tau_samples,
        group_name=group_name,
    )


def pulsing_scene(seed: int = 7, tau_samples: int = 257, grid: int = 64,
                  group_name: str = "se2") -> GaussianBlobScene:
    """Randomized scene with drift, differential motion, and pulsing."""
    rng = np.random.default_rng(seed)
    n = 3
    cx = np.column_stack(
        [rng.uniform(-1.2, 0.2, n), rng.uniform(0.4, 1.0, n), rng.uniform(-0.4, 0.4, n)]
    )
    cy = np.column_stack(
        [rng.uniform(-1.0, 1.0, n), rng.uniform(-0.8, 0.8, n), rng.uniform(-0.4, 0.4, n)]
    )
    amp = np.column_stack([rng.uniform(0.5, 1.0, n), rng.uniform(-0.3, 0.0, n)])
    wid = np.column_stack([rng.uniform(0.3, 0.5, n)])
    return GaussianBlobScene(cx, cy, amp, wid, extent=4.0, grid=grid,
                             tau_samples=tau_samples, group_name=group_name)
