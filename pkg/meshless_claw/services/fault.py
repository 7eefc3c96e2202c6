# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0
from typing import Optional, Union

import numpy as np

from meshless_claw.log import logging
from meshless_claw.models.fault import FaultSet, ViscosityField
from meshless_claw.models.scheme import Field
from meshless_claw.models.stencil import NdfSpec
from meshless_claw.services.geometry import SpatialIndex
from meshless_claw.services.qpcore import WeightSolver
from meshless_claw.services.stencil import N_MAX, StencilBuilder
from meshless_claw.utils import grow_influence_size, median

N_F = 10
C1 = 1.0
C2 = 2.0
C3 = 5.0
# cancellation below this share of sum |w_j (f_j - f_i)| is rounding on linear data
EXACTNESS_TOL = 1e-10


class FaultDetector:
    """Locates nodes near discontinuities of a field and builds the adaptive
    viscosity factors around them.

    The indicator of node i is |sum_j w_j f_j| / sum_j |w_j| |x_j - x_i|^2 with
    w the unconstrained Laplacian weights on the n_F nearest nodes. It stays
    bounded on smooth data and grows like h^-2 at a jump.
    """

    def __init__(
        self,
        index: SpatialIndex,
        solver: Optional[WeightSolver] = None,
        n_max: int = N_MAX,
    ):
        self.logger = logging.get_logger(self.__class__.__name__)
        self.index = index
        self.nodes = index.nodes
        self._stencils = StencilBuilder(index, solver, n_max=n_max)
        self._weights = {}

    def _indicator_weights(self, i, n_f):
        """(ids, w, squared distances) of the indicator formula, None when every
        neighborhood up to n_max is rank deficient."""
        key = (i, n_f)
        if key in self._weights:
            return self._weights[key]
        spec = NdfSpec.laplacian()
        result = None
        n = min(n_f, self.nodes.size)
        while n <= self._stencils.n_max:
            ids = self._stencils.neighbors(i, n)
            problem = self._stencils.weight_problem(i, ids, spec)
            solution = self._stencils.solver.solve_equality(problem)
            if solution.ok:
                displacement = self.index.wrapped_displacement(i, ids)
                result = (ids, solution.w, np.sum(displacement**2, axis=1))
                break
            n = grow_influence_size(n)
        if result is None:
            self.logger.warning("Rank deficient fault indicator stencil", node=i)
        self._weights[key] = result
        return result

    def fault_indicator(self, i: int, values: Union[Field, np.ndarray], n_f=N_F):
        values = _as_array(values)
        weights = self._indicator_weights(i, n_f)
        if weights is None:
            return 0.0
        ids, w, squared = weights
        scale = float(np.sum(np.abs(w) * squared))
        if scale == 0:
            return 0.0
        # sum w = 0, differences keep locally constant data exactly at zero
        terms = w * (values[ids] - values[i])
        numerator = abs(float(np.sum(terms)))
        if numerator <= EXACTNESS_TOL * float(np.sum(np.abs(terms))):
            return 0.0
        return numerator / scale

    def indicators(self, values: Union[Field, np.ndarray], n_f=N_F) -> np.ndarray:
        values = _as_array(values)
        return np.array(
            [self.fault_indicator(i, values, n_f) for i in range(self.nodes.size)]
        )

    @staticmethod
    def median(values):
        return median(values)

    def detect_faults(
        self, values: Union[Field, np.ndarray], n_f=N_F, c1=C1, c2=C2
    ) -> FaultSet:
        """Two-step median classification.

        alpha1 = C1 median(I) over all nodes, S1 the nodes with I > alpha1,
        alpha2 = C2 median(I) over S1 and the faults those nodes of S1 with
        I > alpha2.

        The indicator is exactly zero on locally linear data. When that holds
        for at least half of the nodes alpha1 is zero, S1 holds only nodes
        whose stencils see a nonlinearity and is returned as it is, with
        alpha2 = 0.
        """
        if not (c1 > 0 and c2 > 0):
            raise ValueError(f"C1 and C2 should be positive, got {c1}, {c2}")
        indicator = self.indicators(values, n_f)
        alpha1 = c1 * median(indicator)
        first = np.flatnonzero(indicator > alpha1)
        if first.size == 0:
            return FaultSet(np.empty(0, dtype=int), alpha1, np.inf, indicator)
        if alpha1 == 0:
            alpha2 = 0.0
            ids = first
        else:
            alpha2 = c2 * median(indicator[first])
            ids = first[indicator[first] > alpha2]
        self.logger.debug(
            "Detected faults",
            alpha1=alpha1,
            alpha2=alpha2,
            first_stage=len(first),
            faults=len(ids),
        )
        return FaultSet(ids, alpha1, alpha2, indicator)

    def viscosity_field(
        self, faults: FaultSet, mu: float, c3: float = C3, h: Optional[float] = None
    ) -> ViscosityField:
        """mu_i = max(0, 1 - rho_i / (C3 h)) mu with rho_i the periodic distance
        to the fault nodes, zero on boundary nodes."""
        if mu < 0:
            raise ValueError(f"mu should be non-negative, got {mu}")
        h = self.nodes.h if h is None else h
        rho = self.index.distances_to_set(faults.ids)
        factors = np.maximum(0.0, 1.0 - rho / (c3 * h))
        factors[self.nodes.boundary_flag] = 0.0
        return ViscosityField(factors * mu)


def _as_array(values):
    if isinstance(values, Field):
        return values.values
    return np.asarray(values, dtype=float)
