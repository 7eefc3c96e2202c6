# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np


class Operator(str, Enum):
    DIRECTIONAL = "directional"
    LAPLACIAN = "laplacian"


@dataclass(frozen=True, eq=False)
class NdfSpec:
    """Numerical differentiation formula: operator, exactness order q,
    seminorm exponent s and operator order k."""

    operator: Operator
    q: int
    s: int
    k: int
    eta: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.q > self.k:
            raise ValueError(f"Exactness order q={self.q} should exceed k={self.k}")
        if self.operator == Operator.DIRECTIONAL:
            if (self.q, self.s, self.k) != (2, 2, 1):
                raise ValueError("Directional formulas use (q, s, k) = (2, 2, 1)")
            if self.eta is None:
                raise ValueError("Directional formulas need a direction eta")
            object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float))
        elif (self.q, self.s, self.k) != (3, 3, 2):
            raise ValueError("Laplacian formulas use (q, s, k) = (3, 3, 2)")

    @classmethod
    def directional(cls, eta):
        return cls(Operator.DIRECTIONAL, q=2, s=2, k=1, eta=eta)

    @classmethod
    def laplacian(cls):
        return cls(Operator.LAPLACIAN, q=3, s=3, k=2)


@dataclass(frozen=True, eq=False)
class StencilPair:
    """Divergence and viscosity weights of one node on a common influence set.

    `influence` starts with the center node; `v` is zero beyond the first
    `visc_count` entries.
    """

    node: int
    influence: np.ndarray
    w: np.ndarray
    v: np.ndarray
    mu_i: float = 0.0
    visc_count: int = 0
    viscosity_disabled: bool = False
    constraints_dropped: bool = False
    center_bound_active: bool = False
    sigma_w: float = float("nan")
    sigma_v: float = float("nan")

    def __post_init__(self):
        if not (len(self.influence) == len(self.w) == len(self.v)):
            raise ValueError("influence, w and v should be aligned")
        if self.influence[0] != self.node:
            raise ValueError("The influence set should start with its center node")
        if self.mu_i < 0:
            raise ValueError(f"mu_i should be non-negative, got {self.mu_i}")

    @property
    def size(self):
        return len(self.influence)

    def update_row(self, dt):
        """Coefficients c_j with U_new(x_i) = U(x_i) + sum_j c_j U(x_j)."""
        return -dt * self.w + self.mu_i * dt * self.v

    def positivity_residuals(self, dt):
        """Largest off-center value of w_j - mu_i v_j and dt (w_c - mu_i v_c)."""
        combined = self.w - self.mu_i * self.v
        off_center = float(np.max(combined[1:])) if self.size > 1 else -np.inf
        return off_center, float(dt * combined[0])
