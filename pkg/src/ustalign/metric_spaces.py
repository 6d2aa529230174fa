"""Time grids, warps (the temporal reparameterization group), and signals
over pluggable metric spaces.

Warps are sampled on a uniform grid over [0, 1] with piecewise-linear
interpolation between samples, which keeps every group operation O(N) and
closed under composition up to interpolation error.  All values are
immutable after construction and every operation is a deterministic pure
function, so concurrent read-only use is safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import se3
from .errors import GridMismatch, SpaceMismatch, UstAlignError

#: Minimum warp increment is MIN_INCREMENT_SCALE / n; smaller steps are
#: rejected because the inverse would not be well defined.
MIN_INCREMENT_SCALE = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k/(n-1) on [0, 1], dimensionless."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise UstAlignError(f"grid needs at least 2 samples, got {self.n}")

    @property
    def times(self):
        t = np.arange(self.n) / (self.n - 1)
        t[-1] = 1.0
        t.flags.writeable = False
        return t

    @property
    def spacing(self):
        return 1.0 / (self.n - 1)


def _freeze(values):
    values = np.array(values, dtype=float)
    values.flags.writeable = False
    return values


@dataclass(frozen=True)
class Warp:
    """Sampled strictly increasing map [0,1] -> [0,1] fixing the endpoints."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        v = self.values
        if v.ndim != 1 or v.shape[0] < 2:
            raise UstAlignError("warp needs a 1-d array of at least 2 samples")
        if v[0] != 0.0 or v[-1] != 1.0:
            raise UstAlignError(
                f"warp endpoints must be exactly 0 and 1, got {v[0]!r}, {v[-1]!r}"
            )
        if np.min(np.diff(v)) <= MIN_INCREMENT_SCALE / v.shape[0]:
            raise UstAlignError("warp is not strictly increasing")

    @property
    def grid(self):
        return TimeGrid(self.values.shape[0])

    def __len__(self):
        return self.values.shape[0]


def warp_identity(grid: TimeGrid) -> Warp:
    """Identity element e(t) = t of the reparameterization group."""
    return Warp(grid.times)


def warp_compose(outer: Warp, inner: Warp) -> Warp:
    """(outer o inner)(t) = outer(inner(t)) by monotone linear interpolation."""
    if len(outer) != len(inner):
        raise GridMismatch(f"warp lengths differ: {len(outer)} vs {len(inner)}")
    t = outer.grid.times
    return Warp(np.interp(inner.values, t, outer.values))


def warp_inverse(w: Warp) -> Warp:
    """Functional inverse; exists because the table is strictly increasing."""
    t = w.grid.times
    return Warp(np.interp(t, w.values, t))


def random_warp(seed: int, roughness: float, n: int = 1001) -> Warp:
    """Deterministic random warp from positive random increments.

    Increments are 1 + roughness*u with u ~ Uniform(-1, 1), cumulatively
    summed and normalized to end at 1, so the sup deviation from the
    identity shrinks to zero with roughness.
    """
    if not 0.0 < roughness < 1.0:
        raise UstAlignError(f"roughness must be in (0, 1), got {roughness}")
    rng = np.random.default_rng(seed)
    inc = 1.0 + roughness * rng.uniform(-1.0, 1.0, size=n - 1)
    values = np.concatenate([[0.0], np.cumsum(inc)])
    values /= values[-1]
    values[-1] = 1.0
    return Warp(values)


@dataclass(frozen=True)
class Space:
    """Descriptor of one of the supported metric spaces.

    kind is one of scalar | vector | matrix | se3 | se3_product, shape the
    per-sample value shape.  Distances: absolute difference for scalars,
    Euclidean norm for vectors, Frobenius norm of the difference for
    matrices, and the left-invariant log-Frobenius metric for se3 (the
    se3_product kind combines components by root-sum-of-squares).
    """

    kind: str
    shape: tuple = ()

    @property
    def tag(self):
        if self.kind == "vector":
            return f"vector({self.shape[0]})"
        if self.kind == "matrix":
            return f"matrix({self.shape[0]},{self.shape[1]})"
        if self.kind == "se3_product":
            return f"se3_product({self.shape[0]})"
        return self.kind

    # -- vectorized kernels ------------------------------------------------

    def pair_distances(self, a, b):
        """Elementwise distances between two stacked value arrays."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.shape != b.shape:
            raise SpaceMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
        if self.kind == "scalar":
            return np.abs(a - b)
        if self.kind == "vector":
            return np.linalg.norm(a - b, axis=-1)
        if self.kind == "matrix":
            return np.linalg.norm(a - b, axis=(-2, -1))
        if self.kind == "se3":
            return se3.metric(a, b)
        if self.kind == "se3_product":
            comp = se3.metric(a, b)
            return np.sqrt(np.sum(comp * comp, axis=-1))
        raise SpaceMismatch(f"unknown space kind {self.kind!r}")

    def segment_distances(self, values):
        """Distances between consecutive samples of a stacked value array."""
        values = np.asarray(values, dtype=float)
        return self.pair_distances(values[:-1], values[1:])

    def interpolate_stacked(self, left, right, alpha):
        """Interpolate elementwise at parameters alpha in [0, 1]."""
        alpha = np.asarray(alpha, dtype=float)
        if self.kind in ("scalar", "vector", "matrix"):
            a = alpha.reshape(alpha.shape + (1,) * len(self.shape))
            return (1.0 - a) * left + a * right
        if self.kind == "se3":
            return se3.interpolate(left, right, alpha)
        if self.kind == "se3_product":
            return se3.interpolate(left, right, alpha[..., None])
        raise SpaceMismatch(f"unknown space kind {self.kind!r}")

    def validate_values(self, values):
        values = np.asarray(values)
        if values.shape[1:] != self.shape:
            raise SpaceMismatch(
                f"values of shape {values.shape} do not match space {self.tag}"
            )
        if self.kind in ("se3", "se3_product") and not se3.check_se3(values, tol=1e-9):
            raise SpaceMismatch("se3 values fail the rotation-block invariants")


def scalar_space() -> Space:
    return Space("scalar", ())


def vector_space(dim: int) -> Space:
    return Space("vector", (int(dim),))


def matrix_space(rows: int, cols: int) -> Space:
    return Space("matrix", (int(rows), int(cols)))


def se3_space() -> Space:
    return Space("se3", (4, 4))


def se3_product_space(count: int) -> Space:
    return Space("se3_product", (int(count), 4, 4))


def space_from_tag(tag: str) -> Space:
    """Inverse of Space.tag, e.g. 'vector(3)' or 'matrix(2,2)'."""
    tag = tag.strip()
    if tag == "scalar":
        return scalar_space()
    if tag == "se3":
        return se3_space()
    if tag.startswith("vector(") and tag.endswith(")"):
        return vector_space(int(tag[7:-1]))
    if tag.startswith("matrix(") and tag.endswith(")"):
        r, c = tag[7:-1].split(",")
        return matrix_space(int(r), int(c))
    if tag.startswith("se3_product(") and tag.endswith(")"):
        return se3_product_space(int(tag[12:-1]))
    raise SpaceMismatch(f"unknown space tag {tag!r}")


def distance(space: Space, a, b) -> float:
    """Distance between two points of the space (scalar result)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != space.shape or b.shape != space.shape:
        raise SpaceMismatch(
            f"points of shape {a.shape}/{b.shape} do not match space {space.tag}"
        )
    return float(space.pair_distances(a[None], b[None])[0])


def interpolate(space: Space, a, b, alpha: float):
    """Point between a and b: linear for flat spaces, geodesic for se3."""
    if not 0.0 <= alpha <= 1.0:
        raise UstAlignError(f"alpha must be in [0, 1], got {alpha}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = space.interpolate_stacked(a[None], b[None], np.array([alpha]))[0]
    return float(out) if space.kind == "scalar" else out


@dataclass(frozen=True)
class Signal:
    """Sequence of points of one metric space on a uniform time grid."""

    values: np.ndarray
    space: Space
    grid: TimeGrid = field(default=None)  # defaults to len(values)

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        if self.grid is None:
            object.__setattr__(self, "grid", TimeGrid(self.values.shape[0]))
        if self.values.shape[0] != self.grid.n:
            raise GridMismatch(
                f"{self.values.shape[0]} values on a grid of {self.grid.n}"
            )
        if self.grid.n < 2:
            raise UstAlignError("signal needs at least 2 samples")
        self.space.validate_values(self.values)

    def __len__(self):
        return self.grid.n


def signal(values, space: Space) -> Signal:
    return Signal(np.asarray(values, dtype=float), space)
