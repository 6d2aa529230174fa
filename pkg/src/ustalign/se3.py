"""SE(3) rigid-body transforms: group ops, exp/log maps, the left-invariant
Frobenius metric, geodesic interpolation, and screw invariants.

Elements are 4x4 homogeneous matrices ``[[R, t], [0, 1]]`` with R a proper
rotation.  All functions broadcast over leading batch axes, so a trajectory
can be stored as an ``(N, 4, 4)`` array and processed in one call.

The metric is the Frobenius norm of the 4x4 matrix logarithm of the relative
displacement.  The skew block counts each angular-velocity component twice,
so a rotation contributes sqrt(2)*|omega| and a pure translation contributes
its Euclidean length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AngleNearPi

# Below this angle Rodrigues coefficients switch to second-order series.
SMALL_ANGLE = 1e-8
# At and above pi - ANGLE_CUT the log branch is ambiguous and we refuse.
ANGLE_CUT = 1e-6


def identity():
    return np.eye(4)


def from_rotation_translation(rotation, translation):
    """Assemble homogeneous matrices from (...,3,3) and (...,3) parts."""
    rotation = np.asarray(rotation, dtype=float)
    translation = np.asarray(translation, dtype=float)
    out = np.zeros(rotation.shape[:-2] + (4, 4))
    out[..., :3, :3] = rotation
    out[..., :3, 3] = translation
    out[..., 3, 3] = 1.0
    return out


def rotation_of(x):
    return np.asarray(x)[..., :3, :3]


def translation_of(x):
    return np.asarray(x)[..., :3, 3]


def compose(a, b):
    """Group operation: matrix product of homogeneous matrices."""
    return np.asarray(a) @ np.asarray(b)


def inverse(x):
    """(R, t) -> (R^T, -R^T t)."""
    x = np.asarray(x)
    rt = np.swapaxes(x[..., :3, :3], -1, -2)
    return from_rotation_translation(rt, -np.einsum("...ij,...j->...i", rt, x[..., :3, 3]))


def skew(w):
    """(...,3) -> (...,3,3) with skew(w) @ v = w x v."""
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.shape[:-1] + (3, 3))
    out[..., 0, 1] = -w[..., 2]
    out[..., 0, 2] = w[..., 1]
    out[..., 1, 0] = w[..., 2]
    out[..., 1, 2] = -w[..., 0]
    out[..., 2, 0] = -w[..., 1]
    out[..., 2, 1] = w[..., 0]
    return out


def unskew(m):
    m = np.asarray(m)
    return np.stack([m[..., 2, 1], m[..., 0, 2], m[..., 1, 0]], axis=-1)


def _rodrigues_coefficients(theta):
    """A = sin(t)/t, B = (1-cos t)/t^2, C = (t-sin t)/t^3 with Taylor guard."""
    theta = np.asarray(theta, dtype=float)
    small = theta < SMALL_ANGLE
    t = np.where(small, 1.0, theta)  # avoid 0/0 in the unused branch
    t2 = theta * theta
    a = np.where(small, 1.0 - t2 / 6.0, np.sin(t) / t)
    b = np.where(small, 0.5 - t2 / 24.0, (1.0 - np.cos(t)) / (t * t))
    c = np.where(small, 1.0 / 6.0 - t2 / 120.0, (t - np.sin(t)) / (t * t * t))
    return a, b, c


def exp_se3(xi):
    """Exponential map se(3) -> SE(3).

    Parameters
    ----------
    xi : (..., 6) array
        Twist with angular part ``xi[..., :3]`` and linear part
        ``xi[..., 3:]``.

    Returns
    -------
    (..., 4, 4) array of homogeneous matrices.  The rotation block is the
    Rodrigues exponential of the angular part; the translation is coupled
    through the usual V matrix, with a series fallback below 1e-8 rad.
    """
    xi = np.asarray(xi, dtype=float)
    w = xi[..., :3]
    v = xi[..., 3:]
    theta = np.linalg.norm(w, axis=-1)
    a, b, c = _rodrigues_coefficients(theta)
    wh = skew(w)
    wh2 = wh @ wh
    eye = np.broadcast_to(np.eye(3), wh.shape)
    rot = eye + a[..., None, None] * wh + b[..., None, None] * wh2
    vmat = eye + b[..., None, None] * wh + c[..., None, None] * wh2
    return from_rotation_translation(rot, np.einsum("...ij,...j->...i", vmat, v))


def rotation_angle(x):
    """Rotation angle in [0, pi] of the rotation block."""
    r = rotation_of(x)
    tr = np.trace(r, axis1=-2, axis2=-1)
    return np.arccos(np.clip((tr - 1.0) / 2.0, -1.0, 1.0))


def log_se3(x):
    """Logarithm map SE(3) -> se(3), inverse of :func:`exp_se3`.

    Raises
    ------
    AngleNearPi
        If any rotation angle is >= pi - 1e-6, where the log branch is
        ambiguous and the metric undefined.
    """
    x = np.asarray(x, dtype=float)
    r = x[..., :3, :3]
    theta = rotation_angle(x)
    if np.any(theta >= np.pi - ANGLE_CUT):
        raise AngleNearPi(
            f"rotation angle {float(np.max(theta)):.9f} within 1e-6 of pi"
        )
    small = theta < SMALL_ANGLE
    t = np.where(small, 1.0, theta)
    # omega = theta/(2 sin theta) * vee(R - R^T); series 1/2 + t^2/12 near 0
    factor = np.where(small, 0.5 + theta * theta / 12.0, t / (2.0 * np.sin(t)))
    w = factor[..., None] * unskew(r - np.swapaxes(r, -1, -2))
    # V^-1 = I - wh/2 + D wh^2,  D = (1 - A/(2B))/theta^2, series 1/12 + t^2/720
    a, b, _ = _rodrigues_coefficients(theta)
    d = np.where(
        small,
        1.0 / 12.0 + theta * theta / 720.0,
        (1.0 - a / (2.0 * b)) / (t * t),
    )
    wh = skew(w)
    vinv = (
        np.broadcast_to(np.eye(3), wh.shape)
        - 0.5 * wh
        + d[..., None, None] * (wh @ wh)
    )
    u = np.einsum("...ij,...j->...i", vinv, x[..., :3, 3])
    return np.concatenate([w, u], axis=-1)


def twist_norm(xi):
    """Frobenius norm of the 4x4 matrix form of a twist: sqrt(2|w|^2 + |u|^2)."""
    xi = np.asarray(xi)
    w = xi[..., :3]
    u = xi[..., 3:]
    return np.sqrt(2.0 * np.sum(w * w, axis=-1) + np.sum(u * u, axis=-1))


def metric(x1, x2):
    """Left-invariant distance ||log(x1^-1 x2)||_F on the 4x4 twist matrix."""
    return twist_norm(log_se3(compose(inverse(x1), x2)))


def interpolate(a, b, alpha):
    """Geodesic a * exp(alpha * log(a^-1 b)); endpoints are exact."""
    xi = log_se3(compose(inverse(a), b))
    alpha = np.asarray(alpha, dtype=float)
    return compose(a, exp_se3(alpha[..., None] * xi))


@dataclass(frozen=True)
class ScrewInvariants:
    """Conjugation invariants of a rigid displacement: rotation angle and
    translation along the screw axis."""

    theta: float
    d: float


def screw_invariants(x):
    """Screw angle/translation pair, batched to arrays for (...,4,4) input.

    For angles below 1e-8 the displacement is treated as a pure translation
    and d is its Euclidean length.  Near pi the axis is recovered from R + I
    (the skew part degenerates); its sign is canonicalized so results stay
    deterministic, though d's sign convention there is our own choice.
    """
    x = np.asarray(x, dtype=float)
    r = x[..., :3, :3]
    t = x[..., :3, 3]
    theta = rotation_angle(x)
    small = theta < SMALL_ANGLE
    near_pi = theta > np.pi - 1e-4

    safe_sin = np.where(small | near_pi, 1.0, np.sin(theta))
    axis = unskew(r - np.swapaxes(r, -1, -2)) / (2.0 * safe_sin[..., None])

    if np.any(near_pi):
        s = r + np.eye(3)  # columns are parallel to the axis when theta ~ pi
        col = np.argmax(np.linalg.norm(s, axis=-2), axis=-1)
        cand = np.take_along_axis(s, col[..., None, None], axis=-1)[..., 0]
        cand = cand / np.linalg.norm(cand, axis=-1, keepdims=True)
        lead = np.take_along_axis(cand, np.argmax(np.abs(cand), axis=-1)[..., None], axis=-1)
        cand = cand * np.where(lead < 0, -1.0, 1.0)
        axis = np.where(near_pi[..., None], cand, axis)

    d = np.einsum("...i,...i->...", axis, t)
    d = np.where(small, np.linalg.norm(t, axis=-1), d)
    theta = np.where(small, 0.0, theta)
    if theta.ndim == 0:
        return ScrewInvariants(float(theta), float(d))
    return theta, d


def random_se3(seed, scale):
    """Deterministic random element: rotation angle uniform in
    [0, min(scale, pi-0.01)], translation components uniform in [-scale, scale]."""
    rng = np.random.default_rng(seed)
    angle = rng.uniform(0.0, min(scale, np.pi - 0.01))
    axis = rng.normal(size=3)
    norm = np.linalg.norm(axis)
    axis = axis / norm if norm > 0 else np.array([1.0, 0.0, 0.0])
    trans = rng.uniform(-scale, scale, size=3)
    return exp_se3(np.concatenate([angle * axis, np.zeros(3)])) @ from_rotation_translation(
        np.eye(3), trans
    )


def check_se3(x, tol=1e-9):
    """True when R^T R = I and det R = 1 within tol (Frobenius)."""
    x = np.asarray(x)
    r = x[..., :3, :3]
    rtr = np.swapaxes(r, -1, -2) @ r
    ortho = np.linalg.norm(rtr - np.eye(3), axis=(-2, -1)) <= tol
    det = np.abs(np.linalg.det(r) - 1.0) <= tol
    bottom = np.all(np.abs(x[..., 3, :] - np.array([0.0, 0.0, 0.0, 1.0])) <= tol, axis=-1)
    return bool(np.all(ortho & det & bottom))


# --- Lie algebra basis and structure constants ------------------------------

def _se3_basis():
    basis = np.zeros((6, 4, 4))
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        basis[k, :3, :3] = skew(e)
        basis[3 + k, k, 3] = 1.0
    return basis


#: Basis E_1..E_6 of se(3) as 4x4 matrices, angular generators first.
SE3_BASIS = _se3_basis()


def structure_constants(basis):
    """C[i, j, k] with [E_i, E_j] = sum_k C[i,j,k] E_k, via matrix commutators.

    The basis matrices must be orthogonal under <A,B> = tr(A B^T)."""
    basis = np.asarray(basis, dtype=float)
    n = basis.shape[0]
    gram = np.einsum("aij,bij->ab", basis, basis)
    c = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            comm = basis[i] @ basis[j] - basis[j] @ basis[i]
            c[i, j] = np.linalg.solve(gram, np.einsum("kij,ij->k", basis, comm))
    return c


#: Structure constants of se(3) in the SE3_BASIS ordering.
SE3_STRUCTURE = structure_constants(SE3_BASIS)
