# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np

from meshless_claw.models.geometry import Domain, Face
from meshless_claw.models.scheme import FluxModel


class ProblemId(str, Enum):
    BURGERS_CORNER = "burgers_corner"
    BURGERS_SMOOTH = "burgers_smooth"
    ROTATING_WAVE = "rotating_wave"
    LINEAR_TRANSPORT = "linear_transport"


class BoundaryKind(str, Enum):
    INFLOW_EXACT = "inflow_exact"
    PERIODIC = "periodic"


@dataclass(frozen=True, eq=False)
class Problem:
    """A benchmark: domain, flux, initial state and boundary treatment.

    `u0` and `exact` take an (N, d) coordinate array (and a time for `exact`)
    and return N values. `u0_range` holds the extreme values of u0 over the
    closed domain, used for the velocity scale v0.
    """

    id: ProblemId
    domain: Domain
    flux: FluxModel
    u0: Callable[[np.ndarray], np.ndarray]
    boundary: BoundaryKind
    decorated_faces: Tuple[Face, ...]
    t_final: float
    h: float
    u0_range: Tuple[float, float]
    exact: Optional[Callable[[float, np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        for face in self.decorated_faces:
            if face.axis >= self.domain.dim:
                raise ValueError(f"Face {face} does not exist in {self.domain.dim}D")
            if self.domain.periodic[face.axis] and face.side > 0:
                raise ValueError(f"Face {face} is the open side of a periodic axis")
        if self.boundary == BoundaryKind.INFLOW_EXACT and self.exact is None:
            raise ValueError("Inflow boundary data needs an exact solution")

    def initial_values(self, coords):
        return np.asarray(self.u0(np.atleast_2d(coords)), dtype=float)


@dataclass(frozen=True, eq=False)
class GridField:
    """Values on an nx by ny Cartesian grid, row-major with x fastest."""

    nx: int
    ny: int
    bounds: Tuple[float, float, float, float]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if self.nx < 2 or self.ny < 2:
            raise ValueError("A reference grid needs at least 2 points per axis")
        if values.shape[0] != self.nx * self.ny:
            raise ValueError(
                f"Expected {self.nx * self.ny} grid values, got {values.shape[0]}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("Reference grid values should be finite")
        xmin, xmax, ymin, ymax = self.bounds
        if not (xmin < xmax and ymin < ymax):
            raise ValueError(f"Invalid grid bounds {self.bounds}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))

    @property
    def table(self):
        """Values as an (ny, nx) array, row index is y."""
        return self.values.reshape(self.ny, self.nx)


@dataclass(frozen=True)
class ErrorReport:
    E1: float
    E2: float
    N: int

    def to_dict(self):
        return {"E1": self.E1, "E2": self.E2, "N": self.N}
