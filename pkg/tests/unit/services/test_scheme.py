# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

import unittest

import numpy as np

from meshless_claw.exceptions import NonFiniteValue, TimeStepMismatch
from meshless_claw.models.bench import BoundaryKind, Problem, ProblemId
from meshless_claw.models.scheme import (
    Algorithm,
    Field,
    FluxKind,
    FluxModel,
    SchemeConfig,
)
from meshless_claw.models.stencil import StencilPair
from meshless_claw.services.bench import LOWER_LEFT, Benchmarks
from meshless_claw.services.geometry import SpatialIndex
from meshless_claw.services.scheme import PositiveScheme
from tests.unit.utils.base import BaseTestCase
from tests.unit.utils.data import PERIODIC_SQUARE

BURGERS = FluxModel(FluxKind.BURGERS, (1.0, 1.0))
ROTATING = FluxModel(FluxKind.ROTATING_WAVE)
TRANSPORT = FluxModel(FluxKind.LINEAR_TRANSPORT, (1.0, 0.5))


def scheme_config(algorithm, h=0.1, mu=0.05, t_final=0.1):
    return SchemeConfig(algorithm, h=h, dt=0.2 * h, t_final=t_final, mu=mu, v0=1.0)


def constant_problem(value):
    return Problem(
        id=ProblemId.LINEAR_TRANSPORT,
        domain=PERIODIC_SQUARE,
        flux=TRANSPORT,
        u0=lambda x: np.full(len(x), value),
        boundary=BoundaryKind.PERIODIC,
        decorated_faces=LOWER_LEFT,
        t_final=0.1,
        h=0.1,
        u0_range=(value, value),
    )


class TestVelocity(unittest.TestCase):
    def test_burgers(self):
        np.testing.assert_allclose(PositiveScheme.velocity(BURGERS, 2.0), [2.0, 2.0])

    def test_rotating_wave(self):
        np.testing.assert_allclose(PositiveScheme.velocity(ROTATING, 0.0), [1.0, 0.0])
        np.testing.assert_allclose(
            PositiveScheme.velocity(ROTATING, np.pi / 2), [0.0, -1.0], atol=1e-15
        )

    def test_linear_transport_ignores_u(self):
        np.testing.assert_allclose(PositiveScheme.velocity(TRANSPORT, 7.0), [1.0, 0.5])

    def test_scaled_flux(self):
        np.testing.assert_allclose(
            PositiveScheme.velocity(BURGERS.scaled(3.0), 2.0), [6.0, 6.0]
        )

    def test_compute_v0(self):
        self.assertEqual(PositiveScheme.compute_v0(BURGERS, [-1.0, 0.8]), 1.0)
        self.assertAlmostEqual(
            PositiveScheme.compute_v0(ROTATING, [0.25 * np.pi, 3.5 * np.pi]), 1.0
        )


class TestSchemeConfig(unittest.TestCase):
    def test_steps(self):
        config = SchemeConfig(Algorithm.NO_VISCOSITY, 0.01, 0.01, 0.5, 0.0, 1.0)
        self.assertEqual(config.steps, 50)
        self.assertFalse(config.uses_viscosity)

    def test_steps_should_divide_final_time(self):
        config = SchemeConfig(Algorithm.NO_VISCOSITY, 0.01, 0.03, 0.5, 0.0, 1.0)
        with self.assertRaises(TimeStepMismatch):
            config.steps

    def test_invalid_values(self):
        with self.assertRaises(ValueError):
            SchemeConfig(Algorithm.NO_VISCOSITY, -0.01, 0.01, 0.5, 0.0, 1.0)
        with self.assertRaises(ValueError):
            SchemeConfig(Algorithm.CONSTANT_VISCOSITY, 0.01, 0.01, 0.5, -1.0, 1.0)
        with self.assertRaises(ValueError):
            SchemeConfig(
                Algorithm.NO_VISCOSITY, 0.01, 0.01, 0.5, 0.0, 1.0, n_min=20, n_max=10
            )


class TestEulerStep(BaseTestCase):
    def setUp(self):
        super().setUp()
        nodes = self.test_data.grid_nodes(4, PERIODIC_SQUARE)
        self.scheme = PositiveScheme(
            constant_problem(1.0),
            scheme_config(Algorithm.NO_VISCOSITY, h=0.25, mu=0.0),
            nodes,
            SpatialIndex(nodes),
        )

    def test_two_nodes(self):
        stencil = StencilPair(0, np.array([0, 1]), np.array([1.0, -1.0]), np.zeros(2))
        U = Field([2.0, 1.0], 0.0)
        new = self.scheme.euler_step(U, [stencil], 0.5)
        self.assertArrayAlmostEqual(new.values, [1.5, 1.0])
        self.assertEqual(new.time, 0.5)
        self.assertArrayEqual(U.values, [2.0, 1.0])

    def test_viscosity_term(self):
        stencil = StencilPair(
            1, np.array([1, 0]), np.zeros(2), np.array([-2.0, 2.0]), mu_i=0.25
        )
        new = self.scheme.euler_step(Field([1.0, 3.0]), [stencil], 0.5)
        self.assertArrayAlmostEqual(new.values, [1.0, 2.5])

    def test_zero_weights_keep_values(self):
        stencil = StencilPair(0, np.array([0, 1]), np.zeros(2), np.zeros(2))
        new = self.scheme.euler_step(Field([0.3, -0.4]), [stencil], 0.1)
        self.assertArrayEqual(new.values, [0.3, -0.4])

    def test_non_finite_value(self):
        stencil = StencilPair(0, np.array([0, 1]), np.array([1.0, -1.0]), np.zeros(2))
        with self.assertRaises(NonFiniteValue) as context:
            self.scheme.euler_step(Field([1.0, np.nan]), [stencil], 0.1, step=4)
        self.assertEqual(context.exception.node, 0)
        self.assertEqual(context.exception.step, 4)


class TestInflowNodes(BaseTestCase):
    def setUp(self):
        super().setUp()
        # 5 x 5 grid on the unit square, node (i, j) has id i + 5 j
        self.nodes = self.test_data.grid_nodes(5)
        problem = Benchmarks.get_problem(ProblemId.BURGERS_CORNER)
        self.scheme = PositiveScheme(
            problem,
            scheme_config(Algorithm.NO_VISCOSITY, h=0.25, mu=0.0, t_final=0.05),
            self.nodes,
            SpatialIndex(self.nodes),
        )

    def test_lower_left_inflow(self):
        values = np.ones(self.nodes.size)
        inflow = self.scheme.inflow_nodes(BURGERS, values)
        self.assertEqual(sorted(inflow.tolist()), [0, 1, 2, 3, 5, 10, 15])

    def test_upper_right_inflow(self):
        values = -np.ones(self.nodes.size)
        inflow = self.scheme.inflow_nodes(BURGERS, values)
        self.assertEqual(sorted(inflow.tolist()), [9, 14, 19, 21, 22, 23, 24])

    def test_periodic_domain_has_no_inflow(self):
        nodes = self.test_data.grid_nodes(4, PERIODIC_SQUARE)
        scheme = PositiveScheme(
            constant_problem(1.0),
            scheme_config(Algorithm.NO_VISCOSITY, h=0.25, mu=0.0),
            nodes,
            SpatialIndex(nodes),
        )
        self.assertEqual(len(scheme.inflow_nodes(TRANSPORT, np.ones(16))), 0)


class TestRequestedViscosity(BaseTestCase):
    def setUp(self):
        super().setUp()
        self.nodes = self.test_data.grid_nodes(5)
        self.problem = Benchmarks.get_problem(ProblemId.BURGERS_CORNER)

    def scheme(self, algorithm):
        return PositiveScheme(
            self.problem,
            scheme_config(algorithm, h=0.25, mu=0.125, t_final=0.05),
            self.nodes,
            SpatialIndex(self.nodes),
        )

    def test_no_viscosity(self):
        U = Field(np.ones(self.nodes.size))
        mu, faults = self.scheme(Algorithm.NO_VISCOSITY).requested_viscosity(U)
        self.assertArrayEqual(mu, np.zeros(self.nodes.size))
        self.assertEqual(faults, 0)

    def test_constant_viscosity_skips_boundary(self):
        U = Field(np.ones(self.nodes.size))
        mu, _ = self.scheme(Algorithm.CONSTANT_VISCOSITY).requested_viscosity(U)
        self.assertArrayEqual(mu[self.nodes.interior_ids], 0.125)
        self.assertArrayEqual(mu[self.nodes.boundary_ids], 0.0)

    def test_adaptive_viscosity_without_faults(self):
        U = Field(np.ones(self.nodes.size))
        mu, faults = self.scheme(Algorithm.ADAPTIVE_VISCOSITY).requested_viscosity(U)
        self.assertEqual(faults, 0)
        self.assertArrayEqual(mu, np.zeros(self.nodes.size))


class TestRun(BaseTestCase):
    def setUp(self):
        super().setUp()
        self.nodes = self.test_data.grid_nodes(10, PERIODIC_SQUARE)
        self.index = SpatialIndex(self.nodes)

    def test_constant_field_is_preserved(self):
        scheme = PositiveScheme(
            constant_problem(0.7),
            scheme_config(Algorithm.CONSTANT_VISCOSITY),
            self.nodes,
            self.index,
        )
        result = scheme.run()
        self.assertArrayAlmostEqual(result.field.values, np.full(self.nodes.size, 0.7))
        self.assertAlmostEqual(result.field.time, 0.1)

    def test_maximum_principle(self):
        problem = Benchmarks.get_problem(ProblemId.LINEAR_TRANSPORT)
        u0 = problem.initial_values(self.nodes.coords)
        steps = []
        scheme = PositiveScheme(
            problem,
            scheme_config(Algorithm.CONSTANT_VISCOSITY),
            self.nodes,
            self.index,
        )
        result = scheme.run(
            on_step=lambda step, U: steps.append(step), stencil_table=True
        )
        self.assertEqual(steps, [1, 2, 3, 4, 5])
        values = result.field.values
        self.assertGreaterEqual(values.min(), u0.min() - 1e-12)
        self.assertLessEqual(values.max(), u0.max() + 1e-12)

        diagnostics = result.diagnostics
        self.assertEqual(len(diagnostics), 5)
        self.assertEqual(diagnostics["step"].tolist(), [1, 2, 3, 4, 5])
        self.assertTrue((diagnostics["lmp_violations"] == 0).all())
        self.assertTrue((diagnostics["dropped_count"] == 0).all())
        self.assertTrue((diagnostics["max_influence"] <= 100).all())
        self.assertEqual(len(result.stencils), self.nodes.size)
        self.assertIn("sigma_w", result.stencils.columns)

    def test_constant_flux_reuses_stencils(self):
        scheme = PositiveScheme(
            constant_problem(1.0),
            scheme_config(Algorithm.NO_VISCOSITY, mu=0.0),
            self.nodes,
            self.index,
        )
        U = Field(np.ones(self.nodes.size))
        first, _ = scheme.build_stencils(U)
        second, _ = scheme.build_stencils(Field(np.zeros(self.nodes.size)))
        self.assertIs(first, second)


if __name__ == "__main__":
    unittest.main()
