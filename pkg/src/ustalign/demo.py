"""Synthetic action-recognition corpus: six gesture classes recorded as
shoulder/elbow/hand SE(3) trajectories.

Each instance of a gesture is the class template observed under a random
static pose of the whole body (left SE(3) action), an individual random
timing (a warp), and small band-limited per-joint noise.  Noise is smooth
rather than white because the library deliberately does no smoothing: a
sensor pipeline would filter before alignment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import se3
from .matching import BodyTrajectory, left_translate
from .metric_spaces import Signal, TimeGrid, se3_space
from .reparam import apply_warp
from .synth import smooth_warp

GESTURE_CLASSES = ("wave", "throw", "scratch_head", "thumbs_up", "raise_hand", "rub_eyes")


@dataclass(frozen=True)
class _GestureShape:
    elbow_axis: np.ndarray      # rotation axis of the elbow relative to shoulder
    hand_axis: np.ndarray       # rotation axis of the hand relative to elbow
    elbow_amp: float            # peak elbow angle (rad)
    hand_amp: float             # peak hand angle (rad)
    cycles: float               # oscillations of the hand over the gesture
    lift: float                 # vertical hand travel
    reach: float                # forward hand travel


_SHAPES = {
    "wave": _GestureShape(np.array([1.0, 0, 0]), np.array([0, 0, 1.0]), 1.2, 0.9, 2.5, 0.55, 0.1),
    "throw": _GestureShape(np.array([0, 1.0, 0]), np.array([1.0, 0, 0]), 0.9, 1.4, 0.5, 0.25, 0.7),
    "scratch_head": _GestureShape(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), 1.4, 0.35, 4.0, 0.62, 0.05),
    "thumbs_up": _GestureShape(np.array([0, 1.0, 0]), np.array([0, 0, 1.0]), 0.7, 0.4, 0.5, 0.35, 0.3),
    "raise_hand": _GestureShape(np.array([1.0, 0, 0]), np.array([1.0, 0, 0]), 1.5, 0.3, 0.5, 0.8, 0.0),
    "rub_eyes": _GestureShape(np.array([0, 1.0, 0]), np.array([0, 1.0, 0]), 1.1, 0.5, 3.0, 0.5, 0.15),
}

_UPPER_ARM = np.array([0.0, 0.30, 0.0])   # shoulder-to-elbow offset
_FOREARM = np.array([0.0, 0.28, 0.0])     # elbow-to-hand offset


def _envelope(t):
    """Smooth 0 -> 1 -> 0 activation over the gesture."""
    return np.sin(np.pi * t) ** 2


def gesture_template(name: str, n: int = 120) -> BodyTrajectory:
    """Canonical noise-free trajectory of one gesture class."""
    shape = _SHAPES[name]
    t = TimeGrid(n).times
    env = _envelope(t)
    zeros = np.zeros((n, 3))

    sway = np.stack([0.03 * np.sin(np.pi * t), zeros[:, 0], zeros[:, 0]], axis=1)
    shoulder = se3.exp_se3(np.concatenate([sway * 0.2, sway], axis=1))

    elbow_angle = shape.elbow_amp * env
    elbow_xi = np.concatenate(
        [elbow_angle[:, None] * shape.elbow_axis,
         _UPPER_ARM + np.stack([zeros[:, 0], shape.lift * env, zeros[:, 0]], axis=1)],
        axis=1,
    )
    elbow = se3.compose(shoulder, se3.exp_se3(elbow_xi))

    hand_angle = shape.hand_amp * env * np.sin(2.0 * np.pi * shape.cycles * t)
    hand_xi = np.concatenate(
        [hand_angle[:, None] * shape.hand_axis,
         _FOREARM + np.stack(
             [0.08 * env * np.cos(2.0 * np.pi * shape.cycles * t),
              zeros[:, 0],
              shape.reach * env], axis=1)],
        axis=1,
    )
    hand = se3.compose(elbow, se3.exp_se3(hand_xi))

    space = se3_space()
    return BodyTrajectory(Signal(shoulder, space), Signal(elbow, space), Signal(hand, space))


def _warp_trajectory(traj: BodyTrajectory, warp) -> BodyTrajectory:
    return BodyTrajectory(
        apply_warp(traj.shoulder, warp),
        apply_warp(traj.elbow, warp),
        apply_warp(traj.hand, warp),
    )


def _smooth_twists(rng, n, amp_rot, amp_trans, modes=3):
    t = TimeGrid(n).times
    k = np.arange(1, modes + 1)
    out = np.empty((n, 6))
    for c in range(6):
        a = rng.normal(size=modes) / k
        phase = rng.uniform(0, 2 * np.pi, size=modes)
        out[:, c] = np.sin(np.outer(t, k) * np.pi + phase) @ a
    scale_rot = np.max(np.abs(out[:, :3])) or 1.0
    scale_tr = np.max(np.abs(out[:, 3:])) or 1.0
    out[:, :3] *= amp_rot / scale_rot
    out[:, 3:] *= amp_trans / scale_tr
    return out


def _perturb(traj: BodyTrajectory, rng, noise: float) -> BodyTrajectory:
    """Right-multiply each joint by small smooth twists; sigma is `noise`
    times the trajectory's own motion scale."""
    hand_t = traj.hand.values[:, :3, 3]
    trans_scale = float(np.max(np.ptp(hand_t, axis=0)))
    rot_scale = 1.0

    def jitter(sig, stream):
        eps = _smooth_twists(stream, len(sig), noise * rot_scale, noise * trans_scale)
        return Signal(se3.compose(sig.values, se3.exp_se3(eps)), sig.space)

    return BodyTrajectory(
        jitter(traj.shoulder, rng),
        jitter(traj.elbow, rng),
        jitter(traj.hand, rng),
    )


def gesture_instance(name: str, seed: int, n: int = 120, noise: float = 0.01,
                     pose_scale: float = 1.5, warp_roughness: float = 0.45) -> BodyTrajectory:
    """One observed recording: template + random pose + random timing + noise."""
    rng = np.random.default_rng(seed)
    traj = gesture_template(name, n)
    traj = _warp_trajectory(traj, smooth_warp(int(rng.integers(2**31)), n,
                                              strength=warp_roughness))
    traj = _perturb(traj, rng, noise)
    g0 = se3.random_se3(int(rng.integers(2**31)), pose_scale)
    return left_translate(traj, g0)


def gesture_corpus(seed: int = 42, instances: int = 5, n: int = 120,
                   noise: float = 0.01):
    """Templates (clean, one per class) and labelled noisy query instances."""
    templates = [(name, gesture_template(name, n)) for name in GESTURE_CLASSES]
    queries = []
    rng = np.random.default_rng(seed)
    for name in GESTURE_CLASSES:
        for _ in range(instances):
            queries.append((name, gesture_instance(name, int(rng.integers(2**31)),
                                                   n=n, noise=noise)))
    return templates, queries
