# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from meshless_claw.utils import COORD_TOL

MAX_DIM = 8


class NodeKind(str, Enum):
    GRID = "grid"
    HALTON = "halton"
    RANDOM = "random"
    # point clouds read back from solution files
    SCATTERED = "scattered"


@dataclass(frozen=True)
class Face:
    """Face of a box domain, `side` is -1 for the lower and +1 for the upper face."""

    axis: int
    side: int

    def __post_init__(self):
        if self.side not in (-1, 1):
            raise ValueError(f"Face side should be -1 or 1, got {self.side}")
        if self.axis < 0:
            raise ValueError(f"Face axis should be non-negative, got {self.axis}")

    def outward_normal(self, dim):
        normal = np.zeros(dim)
        normal[self.axis] = self.side
        return normal

    def position(self, domain):
        return domain.lower[self.axis] if self.side < 0 else domain.upper[self.axis]

    def __str__(self):
        return f"x{self.axis + 1}{'-' if self.side < 0 else '+'}"


@dataclass(frozen=True)
class Domain:
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    periodic: Tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(x) for x in self.lower))
        object.__setattr__(self, "upper", tuple(float(x) for x in self.upper))
        object.__setattr__(self, "periodic", tuple(bool(p) for p in self.periodic))
        if not len(self.lower) == len(self.upper) == len(self.periodic):
            raise ValueError("lower, upper and periodic should have equal length")
        if not 1 <= len(self.lower) <= MAX_DIM:
            raise ValueError(f"Domain dimension should be between 1 and {MAX_DIM}")
        if any(lo >= up for lo, up in zip(self.lower, self.upper)):
            raise ValueError("Every lower bound should be smaller than its upper bound")

    @property
    def dim(self):
        return len(self.lower)

    @property
    def lengths(self):
        return np.array(self.upper) - np.array(self.lower)

    def faces(self, include_periodic=False):
        """All faces of the box, by default only those on non-periodic axes."""
        return [
            Face(axis, side)
            for axis in range(self.dim)
            if include_periodic or not self.periodic[axis]
            for side in (-1, 1)
        ]

    def on_face(self, coords, face):
        """Boolean mask of the coordinates lying on `face`."""
        coords = np.atleast_2d(coords)
        tol = COORD_TOL * max(1.0, self.lengths[face.axis])
        return np.abs(coords[:, face.axis] - face.position(self)) <= tol

    def contains(self, coords):
        coords = np.atleast_2d(coords)
        tol = COORD_TOL * np.maximum(1.0, self.lengths)
        return np.all(
            (coords >= np.array(self.lower) - tol)
            & (coords <= np.array(self.upper) + tol),
            axis=1,
        )


@dataclass(frozen=True, eq=False)
class NodeSet:
    """Immutable set of N points in a box domain.

    Node ids are the row indices of `coords`. `boundary_flag` marks the nodes
    lying exactly on a non-periodic face.
    """

    coords: np.ndarray
    h: float
    boundary_flag: np.ndarray
    domain: Domain
    kind: NodeKind = NodeKind.HALTON

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float)
        flags = np.array(self.boundary_flag, dtype=bool)
        if coords.ndim != 2 or coords.shape[1] != self.domain.dim:
            raise ValueError(
                f"coords should have shape (N, {self.domain.dim}), got {coords.shape}"
            )
        if flags.shape != (coords.shape[0],):
            raise ValueError("boundary_flag should have one entry per node")
        if not self.h > 0:
            raise ValueError(f"h should be positive, got {self.h}")
        coords.setflags(write=False)
        flags.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "boundary_flag", flags)
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "kind", NodeKind(self.kind))

    @property
    def size(self):
        return self.coords.shape[0]

    def __len__(self):
        return self.size

    @property
    def dim(self):
        return self.domain.dim

    @property
    def boundary_ids(self):
        return np.flatnonzero(self.boundary_flag)

    @property
    def interior_ids(self):
        return np.flatnonzero(~self.boundary_flag)

    def faces_of(self, node):
        """Non-periodic faces the node lies on."""
        return [
            face
            for face in self.domain.faces()
            if self.domain.on_face(self.coords[node], face)[0]
        ]
