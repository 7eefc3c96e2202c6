# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0
import time
from dataclasses import asdict
from typing import Callable, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import sparse

from meshless_claw.exceptions import NonFiniteValue
from meshless_claw.log import logging
from meshless_claw.models.bench import BoundaryKind, Problem
from meshless_claw.models.geometry import NodeSet
from meshless_claw.models.scheme import (
    Algorithm,
    Field,
    FluxModel,
    RunResult,
    SchemeConfig,
    StepDiagnostics,
)
from meshless_claw.models.stencil import StencilPair
from meshless_claw.services.fault import FaultDetector
from meshless_claw.services.geometry import SpatialIndex
from meshless_claw.services.qpcore import WeightSolver
from meshless_claw.services.stencil import StencilBuilder

# Slack of the local maximum principle check, relative to 1 + max |U|
LMP_SLACK = 1e-12


class PositiveScheme:
    """Explicit positive meshless scheme for u_t + div F(u) = 0.

    Every step computes eta_i = F'(U(t, x_i)), the stencils of all nodes and

        U(t + dt, x_i) = U(t, x_i) - dt sum_j w_ij U(t, x_j)
                         + mu_i dt sum_j v_ij U(t, x_j)

    after which inflow boundary nodes receive the exact solution.
    """

    def __init__(
        self,
        problem: Problem,
        config: SchemeConfig,
        nodes: NodeSet,
        index: SpatialIndex,
        solver: Optional[WeightSolver] = None,
        flux: Optional[FluxModel] = None,
    ):
        self.logger = logging.get_logger(self.__class__.__name__)
        self.problem = problem
        self.config = config
        self.nodes = nodes
        self.index = index
        self.flux = flux or problem.flux
        solver = solver or WeightSolver()
        self.stencils = StencilBuilder(index, solver, config.n_min, config.n_max)
        self.faults = FaultDetector(index, solver, config.n_max)
        self._cache = None

    @staticmethod
    def velocity(model: FluxModel, u: float) -> np.ndarray:
        return model.velocity(u)

    @staticmethod
    def compute_v0(model: FluxModel, u0_values) -> float:
        """Largest max-norm of F'(u0) over the given values."""
        u0_values = np.asarray(u0_values, dtype=float)
        return float(np.max(np.abs(model.velocities(u0_values))))

    def euler_step(
        self, U: Field, stencils: Sequence[StencilPair], dt: float, step: int = 0
    ) -> Field:
        """Apply the stencils to U. Nodes without a stencil keep their value."""
        size = len(U)
        if stencils:
            rows = np.concatenate([np.full(s.size, s.node) for s in stencils])
            cols = np.concatenate([s.influence for s in stencils])
            data = np.concatenate([s.update_row(dt) for s in stencils])
            operator = sparse.csr_matrix((data, (rows, cols)), shape=(size, size))
            values = U.values + operator @ U.values
        else:
            values = U.values.copy()
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise NonFiniteValue(int(bad[0]), step)
        return Field(values, U.time + dt)

    def inflow_nodes(self, flux: FluxModel, values) -> np.ndarray:
        """Boundary nodes where eta . n < 0 on every non-periodic face they lie on."""
        boundary = self.nodes.boundary_ids
        if boundary.size == 0:
            return boundary
        eta = flux.velocities(np.asarray(values)[boundary])
        inflow = np.ones(len(boundary), dtype=bool)
        for face in self.nodes.domain.faces():
            on_face = self.nodes.domain.on_face(self.nodes.coords[boundary], face)
            inward = eta @ face.outward_normal(self.nodes.dim) < 0
            inflow &= ~on_face | inward
        return boundary[inflow]

    def requested_viscosity(self, U: Field):
        """Per-node viscosity factors requested by the algorithm, and the number
        of fault nodes (0 unless the viscosity is adaptive)."""
        config = self.config
        if config.algorithm == Algorithm.NO_VISCOSITY:
            return np.zeros(len(U)), 0
        if config.algorithm == Algorithm.CONSTANT_VISCOSITY:
            mu = np.full(len(U), config.mu)
            mu[self.nodes.boundary_flag] = 0.0
            return mu, 0
        faults = self.faults.detect_faults(U, config.n_f, config.c1, config.c2)
        field = self.faults.viscosity_field(faults, config.mu, config.c3, config.h)
        return field.mu, len(faults)

    def build_stencils(self, U: Field, skip=()) -> tuple:
        """Stencils of all nodes not in `skip` and the fault count."""
        if self._cache is not None:
            return self._cache
        mu, fault_count = self.requested_viscosity(U)
        eta = self.flux.velocities(U.values)
        skip = set(int(i) for i in skip)
        stencils = [
            self.stencils.build_stencil(i, eta[i], mu[i], self.config.dt)
            for i in range(len(U))
            if i not in skip
        ]
        # eta and mu do not depend on U
        adaptive = self.config.algorithm == Algorithm.ADAPTIVE_VISCOSITY
        if self.flux.is_constant and not adaptive:
            self._cache = (stencils, fault_count)
        return stencils, fault_count

    def local_maximum_violations(self, U: Field, U_new: Field, stencils) -> int:
        checked = [s for s in stencils if not s.constraints_dropped]
        if not checked:
            return 0
        ids = np.concatenate([s.influence for s in checked])
        starts = np.cumsum([0] + [s.size for s in checked[:-1]])
        old = U.values[ids]
        lower = np.minimum.reduceat(old, starts)
        upper = np.maximum.reduceat(old, starts)
        new = U_new.values[[s.node for s in checked]]
        slack = LMP_SLACK * (1 + float(np.max(np.abs(U.values))))
        return int(np.sum((new < lower - slack) | (new > upper + slack)))

    def run(
        self,
        on_step: Optional[Callable[[int, Field], None]] = None,
        stencil_table: bool = False,
    ) -> RunResult:
        """Advance u0 over K = T / dt steps.

        `on_step(step, field)` is called after every committed step.
        """
        config = self.config
        steps = config.steps
        U = Field(self.problem.initial_values(self.nodes.coords), 0.0)
        inflow_exact = self.problem.boundary == BoundaryKind.INFLOW_EXACT
        self.logger.info(
            "Starting run",
            problem=self.problem.id.value,
            algorithm=config.algorithm.value,
            nodes=self.nodes.size,
            steps=steps,
            dt=config.dt,
            mu=config.mu,
            v0=config.v0,
        )

        diagnostics: List[StepDiagnostics] = []
        stencils = []
        run_start = time.perf_counter()
        for step in range(1, steps + 1):
            step_start = time.perf_counter()
            activations = self.stencils.center_bound_activations
            inflow = (
                self.inflow_nodes(self.flux, U.values)
                if inflow_exact
                else np.empty(0, dtype=int)
            )
            stencils, fault_count = self.build_stencils(U, skip=inflow)
            U_new = self.euler_step(U, stencils, config.dt, step)

            t_new = step * config.dt
            values = U_new.values.copy()
            if inflow.size:
                values[inflow] = self.problem.exact(t_new, self.nodes.coords[inflow])
            U_new = Field(values, t_new)

            dropped = [s.node for s in stencils if s.constraints_dropped]
            for node in dropped:
                self.logger.warning(
                    "Dropped inequality constraints", node=int(node), step=step
                )
            violations = self.local_maximum_violations(U, U_new, stencils)
            if violations:
                self.logger.warning(
                    "Local maximum principle violated", step=step, nodes=violations
                )

            record = StepDiagnostics(
                step=step,
                t=t_new,
                min_u=float(np.min(U_new.values)),
                max_u=float(np.max(U_new.values)),
                fault_count=fault_count,
                dropped_count=len(dropped),
                max_influence=max((s.size for s in stencils), default=0),
                lmp_violations=violations,
                b_active_count=self.stencils.center_bound_activations - activations,
                wall_ms=1000 * (time.perf_counter() - step_start),
            )
            diagnostics.append(record)
            self.logger.debug("Finished time step", **asdict(record))
            U = U_new
            if on_step is not None:
                on_step(step, U)

        self.logger.info(
            "Finished run",
            steps=steps,
            t=U.time,
            min_u=float(np.min(U.values)),
            max_u=float(np.max(U.values)),
            dropped_total=sum(d.dropped_count for d in diagnostics),
            wall_s=time.perf_counter() - run_start,
        )
        return RunResult(
            field=U,
            diagnostics=pd.DataFrame([asdict(d) for d in diagnostics]),
            stencils=self.stencil_frame(stencils) if stencil_table else None,
        )

    @staticmethod
    def stencil_frame(stencils: Sequence[StencilPair]) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "node": [s.node for s in stencils],
                "influence_size": [s.size for s in stencils],
                "visc_count": [s.visc_count for s in stencils],
                "mu_i": [s.mu_i for s in stencils],
                "sigma_w": [s.sigma_w for s in stencils],
                "sigma_v": [s.sigma_v for s in stencils],
                "viscosity_disabled": [s.viscosity_disabled for s in stencils],
                "constraints_dropped": [s.constraints_dropped for s in stencils],
                "center_bound_active": [s.center_bound_active for s in stencils],
            }
        )
