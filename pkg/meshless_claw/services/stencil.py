# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0
from typing import NamedTuple, Optional

import numpy as np

from meshless_claw.exceptions import MalformedGeometry
from meshless_claw.log import logging
from meshless_claw.models.stencil import NdfSpec, Operator, StencilPair
from meshless_claw.models.weights import Bound, WeightProblem
from meshless_claw.services.geometry import SpatialIndex
from meshless_claw.services.qpcore import WeightSolver
from meshless_claw.utils import (
    evaluate_monomials,
    grow_influence_size,
    monomial_exponents,
)

N_MIN = 10
N_MAX = 100


class ExactnessSystem(NamedTuple):
    matrix: np.ndarray
    rhs: np.ndarray
    h_loc: float
    distances: np.ndarray


class ViscosityWeights(NamedTuple):
    ids: np.ndarray
    v: np.ndarray


class DivergenceWeights(NamedTuple):
    ids: np.ndarray
    w: np.ndarray
    constraints_dropped: bool
    center_bound_active: bool = False


class StencilBuilder:
    """Per-node weights of the positive scheme.

    Viscosity weights v reproduce the Laplacian on quadratics with v_j >= 0 off
    the center, divergence weights w reproduce the derivative along eta on
    linear polynomials with w_j <= 0 off the center and w_center <= B. Both
    minimize a distance weighted l2 norm and grow their influence set by a
    factor 1.2 until the constraints can be met.

    An instance caches neighbor lists, viscosity weights and the last active
    set of every node and counts center bound activations. It belongs to one
    run and must not be shared across threads; concurrent workers each build
    their own from the shared read-only SpatialIndex.
    """

    def __init__(
        self,
        index: SpatialIndex,
        solver: Optional[WeightSolver] = None,
        n_min: int = N_MIN,
        n_max: int = N_MAX,
    ):
        self.logger = logging.get_logger(self.__class__.__name__)
        self.index = index
        self.nodes = index.nodes
        self.solver = solver or WeightSolver()
        self.n_min = min(n_min, self.nodes.size)
        self.n_max = min(n_max, self.nodes.size)
        self._neighbors = {}
        self._viscosity = {}
        self._active_sets = {}
        self.center_bound_activations = 0

    def neighbors(self, center: int, k: int) -> np.ndarray:
        key = (center, k)
        if key not in self._neighbors:
            self._neighbors[key] = self.index.knn(center, k)
        return self._neighbors[key]

    def exactness_system(
        self, center: int, neighbors, spec: NdfSpec
    ) -> ExactnessSystem:
        """Polynomial exactness conditions of `spec` on the given neighbors.

        Monomials are taken in y = (x_j - x_center) / h_loc with h_loc the
        largest neighbor distance, the first row is the constant row.
        """
        neighbors = np.asarray(neighbors, dtype=int)
        displacement = self.index.wrapped_displacement(center, neighbors)
        distances = np.linalg.norm(displacement, axis=1)
        h_loc = float(np.max(distances))
        if h_loc == 0:
            raise MalformedGeometry(center, len(neighbors))
        exponents = monomial_exponents(self.nodes.dim, spec.q)
        matrix = evaluate_monomials(displacement / h_loc, exponents)

        degree = exponents.sum(axis=1)
        rhs = np.zeros(len(exponents))
        if spec.operator == Operator.DIRECTIONAL:
            for row in np.flatnonzero(degree == 1):
                rhs[row] = spec.eta[np.argmax(exponents[row])] / h_loc
        else:
            pure_squares = (degree == 2) & (exponents.max(axis=1) == 2)
            rhs[pure_squares] = 2 / h_loc**2
        return ExactnessSystem(matrix, rhs, h_loc, distances)

    def weight_problem(self, center, neighbors, spec, bounds=None) -> WeightProblem:
        system = self.exactness_system(center, neighbors, spec)
        obj_diag = (system.distances / system.h_loc) ** (2 * spec.s)
        if bounds is None:
            bounds = (None,) * len(neighbors)
        return WeightProblem(obj_diag, system.matrix, system.rhs, bounds)

    def _sizes(self, n_start):
        """Influence set sizes n_start, ceil(1.2 n_start), ... up to n_max."""
        n = min(n_start, self.nodes.size)
        while n <= self.n_max:
            yield n
            n = grow_influence_size(n)

    def viscosity_weights(self, center: int) -> Optional[ViscosityWeights]:
        """Laplacian weights with v_j >= 0 off the center, None when disabled.

        Boundary nodes are always disabled. Results only depend on the node
        geometry and are cached.
        """
        if center in self._viscosity:
            return self._viscosity[center]
        result = None
        if not self.nodes.boundary_flag[center]:
            spec = NdfSpec.laplacian()
            for n in self._sizes(self.n_min):
                ids = self.neighbors(center, n)
                bounds = (None,) + (Bound.lower(0.0),) * (n - 1)
                solution = self.solver.solve_bounded(
                    self.weight_problem(center, ids, spec, bounds)
                )
                if solution.ok:
                    result = ViscosityWeights(ids, solution.w)
                    break
        self._viscosity[center] = result
        return result

    def divergence_weights(
        self, center: int, eta, start_set, B: float
    ) -> DivergenceWeights:
        """Directional weights with w_j <= 0 off the center and w_center <= B.

        Grows the influence set beyond `start_set` on infeasibility. When n_max
        is reached the bounds are dropped and the equality-only weights on the
        start set are returned with constraints_dropped set.
        """
        eta = np.asarray(eta, dtype=float)
        start_set = np.asarray(start_set, dtype=int)
        if not np.any(eta):
            return DivergenceWeights(start_set, np.zeros(len(start_set)), False)

        spec = NdfSpec.directional(eta)
        center_bound = Bound.upper(B) if np.isfinite(B) else None
        for n in self._sizes(len(start_set)):
            ids = start_set if n == len(start_set) else self.neighbors(center, n)
            bounds = (center_bound,) + (Bound.upper(0.0),) * (n - 1)
            problem = self.weight_problem(center, ids, spec, bounds)
            solution = self.solver.solve_bounded(
                problem, warm_start=self._warm_start(center, ids)
            )
            if solution.ok:
                self._active_sets[center] = {ids[j] for j in solution.active_set}
                b_active = 0 in solution.active_set
                self.center_bound_activations += int(b_active)
                return DivergenceWeights(ids, solution.w, False, b_active)

        for n in self._sizes(len(start_set)):
            ids = start_set if n == len(start_set) else self.neighbors(center, n)
            problem = self.weight_problem(center, ids, spec)
            solution = self.solver.solve_equality(problem)
            if solution.ok:
                self.logger.debug(
                    "Dropped inequality constraints", node=center, influence=len(ids)
                )
                return DivergenceWeights(ids, solution.w, True)
        raise MalformedGeometry(center, self.n_max)

    def _warm_start(self, center, ids):
        previous = self._active_sets.get(center)
        if not previous:
            return None
        return [j for j, node in enumerate(ids) if node in previous]

    def build_stencil(
        self, center: int, eta, mu_requested: float, dt: float
    ) -> StencilPair:
        """Divergence and viscosity weights of one node for one time step.

        Viscosity weights are computed first (interior nodes only), they fix
        the center bound B = max(1/(2 dt), 1/dt - mu |v_center|) and the start
        set of the divergence weights. mu is corrected to
        min(mu, 1/(2 dt |v_center|)).
        """
        if not dt > 0:
            raise ValueError(f"dt should be positive, got {dt}")
        if mu_requested < 0:
            raise ValueError(f"mu should be non-negative, got {mu_requested}")

        mu = float(mu_requested)
        viscosity = None
        disabled = False
        if mu > 0:
            viscosity = self.viscosity_weights(center)
            if viscosity is None or not viscosity.v[0] < 0:
                if not self.nodes.boundary_flag[center]:
                    self.logger.debug("Viscosity disabled", node=center)
                viscosity, mu, disabled = None, 0.0, True

        if viscosity is not None:
            v_center = abs(float(viscosity.v[0]))
            B = max(1 / (2 * dt), 1 / dt - mu * v_center)
            start_set = viscosity.ids
        else:
            B = 1 / (2 * dt)
            start_set = self.neighbors(center, self.n_min)

        divergence = self.divergence_weights(center, eta, start_set, B)
        ids = divergence.ids

        v = np.zeros(len(ids))
        mu_i = 0.0
        visc_count = 0
        sigma_v = float("nan")
        if viscosity is not None:
            position = {node: j for j, node in enumerate(ids)}
            for node, weight in zip(viscosity.ids, viscosity.v):
                v[position[node]] = weight
            visc_count = len(viscosity.ids)
            mu_i = min(mu, 1 / (2 * dt * v_center))
            sigma_v = self.sigma_quality(center, viscosity.ids, viscosity.v, s=3, k=2)

        return StencilPair(
            node=center,
            influence=ids,
            w=divergence.w,
            v=v,
            mu_i=mu_i,
            visc_count=visc_count,
            viscosity_disabled=disabled,
            constraints_dropped=divergence.constraints_dropped,
            center_bound_active=divergence.center_bound_active,
            sigma_w=self.sigma_quality(center, ids, divergence.w, s=2, k=1),
            sigma_v=sigma_v,
        )

    def sigma_quality(self, center: int, ids, weights, s: int, k: int) -> float:
        """h_loc^(k - s) sum_j |w_j| |x_j - x_center|^s."""
        displacement = self.index.wrapped_displacement(center, ids)
        distances = np.linalg.norm(displacement, axis=1)
        h_loc = float(np.max(distances))
        if h_loc == 0:
            return 0.0
        return float(h_loc ** (k - s) * np.sum(np.abs(weights) * distances**s))
