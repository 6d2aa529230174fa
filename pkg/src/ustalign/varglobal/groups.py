"""Nuisance groups acting on the image plane with unit Jacobian: 2D
translations and SE(2).

Generators are 3x3 homogeneous matrices acting on points written as
(x, y, 1); structure constants are derived from matrix commutators, so the
hard-coded bracket relations are validated by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..se3 import structure_constants


@dataclass(frozen=True)
class PlaneGroup:
    name: str
    generators: np.ndarray  # (dim, 3, 3)
    structure: np.ndarray   # (dim, dim, dim), [E_i, E_j] = C[i,j,k] E_k

    @property
    def dim(self):
        return self.generators.shape[0]


def _make(name, gens):
    gens = np.asarray(gens, dtype=float)
    return PlaneGroup(name, gens, structure_constants(gens))


def translation2() -> PlaneGroup:
    tx = np.zeros((3, 3))
    tx[0, 2] = 1.0
    ty = np.zeros((3, 3))
    ty[1, 2] = 1.0
    return _make("translation2", [tx, ty])


def se2() -> PlaneGroup:
    tx = np.zeros((3, 3))
    tx[0, 2] = 1.0
    ty = np.zeros((3, 3))
    ty[1, 2] = 1.0
    rot = np.zeros((3, 3))
    rot[0, 1] = -1.0
    rot[1, 0] = 1.0
    return _make("se2", [tx, ty, rot])


def plane_group(name: str) -> PlaneGroup:
    if name == "translation2":
        return translation2()
    if name == "se2":
        return se2()
    raise ValueError(f"unknown plane group {name!r}; use translation2 or se2")


def generator_fields(group: PlaneGroup, points):
    """Vector-field values E_i . y at each point: (dim, P, 2)."""
    points = np.asarray(points, dtype=float)
    hom = np.concatenate([points, np.ones((points.shape[0], 1))], axis=1)
    return np.einsum("gij,pj->gpi", group.generators, hom)[:, :, :2]
