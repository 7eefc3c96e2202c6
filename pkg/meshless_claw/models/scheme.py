# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import pandas as pd

from meshless_claw.exceptions import TimeStepMismatch

# Relative tolerance on T / dt being an integer
STEP_TOL = 1e-9


class FluxKind(str, Enum):
    LINEAR_TRANSPORT = "linear_transport"
    BURGERS = "burgers"
    ROTATING_WAVE = "rotating_wave"


class Algorithm(str, Enum):
    NO_VISCOSITY = "no_viscosity"
    CONSTANT_VISCOSITY = "constant_viscosity"
    ADAPTIVE_VISCOSITY = "adaptive_viscosity"


@dataclass(frozen=True, eq=False)
class FluxModel:
    """Flux F of u_t + div F(u) = 0, described through F'(u).

    linear_transport: F(u) = u v, burgers: F(u) = u^2 v / 2,
    rotating_wave: F(u) = (sin u, cos u). `scale` multiplies F.
    """

    kind: FluxKind
    v: Optional[np.ndarray] = None
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", FluxKind(self.kind))
        if self.kind == FluxKind.ROTATING_WAVE:
            object.__setattr__(self, "v", None)
        elif self.v is None:
            raise ValueError(f"Flux {self.kind.value} needs a velocity vector v")
        else:
            object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        if not self.scale > 0:
            raise ValueError(f"Flux scale should be positive, got {self.scale}")

    @property
    def dim(self):
        return 2 if self.v is None else len(self.v)

    @property
    def is_constant(self):
        return self.kind == FluxKind.LINEAR_TRANSPORT

    def velocity(self, u):
        """F'(u) for a scalar u."""
        return self.velocities(np.array([u], dtype=float))[0]

    def velocities(self, values):
        """F'(u) for every entry of `values`, shape (N, d)."""
        values = np.asarray(values, dtype=float)
        if self.kind == FluxKind.LINEAR_TRANSPORT:
            eta = np.broadcast_to(self.v, (len(values), self.dim)).copy()
        elif self.kind == FluxKind.BURGERS:
            eta = values[:, None] * self.v[None, :]
        else:
            eta = np.column_stack([np.cos(values), -np.sin(values)])
        return self.scale * eta

    def scaled(self, gamma):
        return FluxModel(self.kind, self.v, self.scale * gamma)


@dataclass(frozen=True, eq=False)
class Field:
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "time", float(self.time))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class SchemeConfig:
    algorithm: Algorithm
    h: float
    dt: float
    t_final: float
    mu: float
    v0: float
    n_min: int = 10
    n_max: int = 100
    n_f: int = 10
    c1: float = 1.0
    c2: float = 2.0
    c3: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        for name in ("h", "dt", "t_final", "v0", "c1", "c2", "c3"):
            if not getattr(self, name) > 0:
                value = getattr(self, name)
                raise ValueError(f"{name} should be positive, got {value}")
        if self.mu < 0:
            raise ValueError(f"mu should be non-negative, got {self.mu}")
        if not 1 <= self.n_min <= self.n_max:
            raise ValueError("Expected 1 <= n_min <= n_max")

    @property
    def steps(self):
        """K = T / dt, which has to be an integer."""
        steps = int(round(self.t_final / self.dt))
        if steps < 1 or abs(steps * self.dt - self.t_final) > STEP_TOL * self.t_final:
            raise TimeStepMismatch(
                f"T={self.t_final} is not an integer multiple of dt={self.dt}"
            )
        return steps

    @property
    def uses_viscosity(self):
        return self.algorithm != Algorithm.NO_VISCOSITY and self.mu > 0


@dataclass(frozen=True, eq=False)
class RunResult:
    field: Field
    diagnostics: pd.DataFrame
    stencils: Optional[pd.DataFrame] = None


@dataclass(frozen=True)
class StepDiagnostics:
    step: int
    t: float
    min_u: float
    max_u: float
    fault_count: int
    dropped_count: int
    max_influence: int
    lmp_violations: int
    b_active_count: int
    wall_ms: float
