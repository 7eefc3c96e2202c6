# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Optional, Tuple

import numpy as np


class BoundKind(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class Bound:
    kind: BoundKind
    value: float

    @classmethod
    def upper(cls, value):
        return cls(BoundKind.UPPER, float(value))

    @classmethod
    def lower(cls, value):
        return cls(BoundKind.LOWER, float(value))

    @property
    def sign(self):
        """+1 for w <= value, -1 for w >= value."""
        return 1.0 if self.kind == BoundKind.UPPER else -1.0

    def violation(self, w):
        return self.sign * (w - self.value)


@dataclass(frozen=True, eq=False)
class WeightProblem:
    """min sum c_j w_j^2 subject to A w = b and simple bounds.

    Exactly one entry of `obj_diag` is zero, the center variable, and the first
    row of `eq_matrix` is the all-ones row.
    """

    obj_diag: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    bounds: Tuple[Optional[Bound], ...]

    def __post_init__(self):
        obj_diag = np.asarray(self.obj_diag, dtype=float)
        eq_matrix = np.atleast_2d(np.asarray(self.eq_matrix, dtype=float))
        eq_rhs = np.asarray(self.eq_rhs, dtype=float).ravel()
        n = obj_diag.shape[0]
        if eq_matrix.shape[1] != n or eq_rhs.shape[0] != eq_matrix.shape[0]:
            raise ValueError(
                f"Inconsistent shapes: obj_diag {obj_diag.shape}, "
                f"eq_matrix {eq_matrix.shape}, eq_rhs {eq_rhs.shape}"
            )
        if len(self.bounds) != n:
            raise ValueError("bounds should have one entry per variable")
        if np.any(obj_diag < 0) or np.count_nonzero(obj_diag == 0) != 1:
            raise ValueError("obj_diag should be positive except for one zero entry")
        if not np.all(eq_matrix[0] == 1.0):
            raise ValueError("The first equality row should be the all-ones row")
        object.__setattr__(self, "obj_diag", obj_diag)
        object.__setattr__(self, "eq_matrix", eq_matrix)
        object.__setattr__(self, "eq_rhs", eq_rhs)
        object.__setattr__(self, "bounds", tuple(self.bounds))

    @property
    def size(self):
        return self.obj_diag.shape[0]

    @property
    def center(self):
        return int(np.flatnonzero(self.obj_diag == 0)[0])

    def objective(self, w):
        return float(np.sum(self.obj_diag * w**2))

    def without_bounds(self):
        return WeightProblem(
            self.obj_diag, self.eq_matrix, self.eq_rhs, (None,) * self.size
        )


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    RANK_DEFICIENT = "rank_deficient"


@dataclass(frozen=True, eq=False)
class WeightSolution:
    w: Optional[np.ndarray]
    status: SolveStatus
    active_set: FrozenSet[int] = frozenset()
    objective_value: float = float("nan")

    @property
    def ok(self):
        return self.status == SolveStatus.OPTIMAL


@dataclass(frozen=True)
class KktReport:
    eq_residual: float
    bound_violation: float
    stationarity: float
    complementarity: float
    min_multiplier: float

    def satisfied(self, tol=1e-9):
        return (
            self.eq_residual <= tol
            and self.bound_violation <= tol
            and self.stationarity <= tol
            and self.complementarity <= tol
            and self.min_multiplier >= -tol
        )
