# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

import itertools
import unittest

import numpy as np

from meshless_claw.models.stencil import NdfSpec
from meshless_claw.models.weights import (
    Bound,
    SolveStatus,
    WeightProblem,
    WeightSolution,
)
from meshless_claw.services.geometry import SpatialIndex
from meshless_claw.services.qpcore import WeightSolver
from meshless_claw.services.stencil import StencilBuilder
from tests.unit.utils.base import BaseTestCase

# node ids of the 3 x 3 lattice on the unit square, h = 0.5
CENTER, EAST, WEST, NORTH, SOUTH = 4, 5, 3, 7, 1
CROSS = [CENTER, EAST, WEST, NORTH, SOUTH]


def brute_force(problem: WeightProblem):
    """Optimal objective by enumerating every set of bounds held at equality,
    None when no candidate is feasible."""
    n = problem.size
    bounded = [j for j, bound in enumerate(problem.bounds) if bound is not None]
    best = None
    for count in range(len(bounded) + 1):
        for fixed in itertools.combinations(bounded, count):
            w = _fixed_minimizer(problem, fixed)
            if w is None:
                continue
            slack = 1e-9 * (1 + np.max(np.abs(w)))
            if any(
                problem.bounds[j].violation(w[j]) > slack
                for j in range(n)
                if problem.bounds[j] is not None
            ):
                continue
            value = problem.objective(w)
            if best is None or value < best:
                best = value
    return best


def _fixed_minimizer(problem, fixed):
    n = problem.size
    A, b = problem.eq_matrix, problem.eq_rhs
    E = np.zeros((len(fixed), n))
    for row, j in enumerate(fixed):
        E[row, j] = 1.0
    e = np.array([problem.bounds[j].value for j in fixed])
    constraints = np.vstack([A, E])
    rhs = np.concatenate([b, e])
    m = constraints.shape[0]
    kkt = np.block(
        [
            [2 * np.diag(problem.obj_diag), constraints.T],
            [constraints, np.zeros((m, m))],
        ]
    )
    solution = np.linalg.lstsq(kkt, np.concatenate([np.zeros(n), rhs]), rcond=None)[0]
    w = solution[:n]
    if np.max(np.abs(constraints @ w - rhs)) > 1e-9 * (1 + np.max(np.abs(rhs))):
        return None
    if np.max(np.abs(kkt @ solution - np.concatenate([np.zeros(n), rhs]))) > 1e-8:
        return None
    return w


def random_problem(rng):
    n = int(rng.integers(3, 9))
    m = int(rng.integers(1, min(6, n - 1) + 1))
    center = int(rng.integers(0, n))
    obj_diag = rng.uniform(0.5, 2.0, n)
    obj_diag[center] = 0.0
    A = np.vstack([np.ones(n), rng.normal(size=(m - 1, n))])
    b = rng.normal(size=m)
    bounds = []
    for j in range(n):
        draw = rng.random()
        if j == center:
            bounds.append(Bound.upper(rng.uniform(0, 3)) if draw < 0.25 else None)
        elif draw < 1 / 3:
            bounds.append(Bound.upper(rng.uniform(-0.5, 0.5)))
        elif draw < 2 / 3:
            bounds.append(Bound.lower(rng.uniform(-0.5, 0.5)))
        else:
            bounds.append(None)
    return WeightProblem(obj_diag, A, b, tuple(bounds))


def scale_problem(problem: WeightProblem, c):
    """Same problem with the right-hand side and every bound value times c."""
    bounds = tuple(
        None if bound is None else Bound(bound.kind, c * bound.value)
        for bound in problem.bounds
    )
    return WeightProblem(problem.obj_diag, problem.eq_matrix, c * problem.eq_rhs, bounds)


class TestWeightProblem(unittest.TestCase):
    def test_one_zero_objective_entry(self):
        with self.assertRaises(ValueError):
            WeightProblem([1.0, 1.0], [[1.0, 1.0]], [0.0], (None, None))
        with self.assertRaises(ValueError):
            WeightProblem([0.0, 0.0], [[1.0, 1.0]], [0.0], (None, None))

    def test_first_row_is_ones(self):
        with self.assertRaises(ValueError):
            WeightProblem([0.0, 1.0], [[1.0, 2.0]], [0.0], (None, None))


class TestWeightSolver(BaseTestCase):
    def setUp(self):
        super().setUp()
        self.solver = WeightSolver()
        self.nodes = self.test_data.grid_nodes(3)
        self.h = self.nodes.h
        self.builder = StencilBuilder(SpatialIndex(self.nodes), self.solver)

    def cross_problem(self, spec, bounds=None):
        return self.builder.weight_problem(CENTER, CROSS, spec, bounds)

    def test_central_difference(self):
        problem = self.cross_problem(NdfSpec.directional([1.0, 0.0]))
        solution = self.solver.solve_equality(problem)
        self.assertEqual(solution.status, SolveStatus.OPTIMAL)
        h = self.h
        self.assertArrayAlmostEqual(solution.w, [0, 1 / (2 * h), -1 / (2 * h), 0, 0])

    def test_five_point_laplacian(self):
        problem = self.cross_problem(NdfSpec.laplacian())
        solution = self.solver.solve_equality(problem)
        self.assertTrue(solution.ok)
        self.assertArrayAlmostEqual(
            solution.w, np.array([-4, 1, 1, 1, 1]) / self.h**2, atol=1e-10
        )

    def test_equality_matches_full_kkt_solve(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            problem = random_problem(rng).without_bounds()
            solution = self.solver.solve_equality(problem)
            expected = _fixed_minimizer(problem, ())
            self.assertTrue(solution.ok)
            self.assertArrayAlmostEqual(solution.w, expected, atol=1e-9)

    def test_upwind_difference(self):
        bounds = (None,) + (Bound.upper(0.0),) * 4
        problem = self.cross_problem(NdfSpec.directional([1.0, 0.0]), bounds)
        solution = self.solver.solve_bounded(problem)
        self.assertTrue(solution.ok)
        h = self.h
        self.assertArrayAlmostEqual(solution.w, [1 / h, 0, -1 / h, 0, 0])
        report = self.solver.kkt_verify(problem, solution)
        self.assertTrue(report.satisfied(1e-12))

    def test_upwind_in_every_axis_direction(self):
        h = self.h
        cases = {
            (1.0, 0.0): [1 / h, 0, -1 / h, 0, 0],
            (-1.0, 0.0): [1 / h, -1 / h, 0, 0, 0],
            (0.0, 1.0): [1 / h, 0, 0, 0, -1 / h],
            (0.0, -1.0): [1 / h, 0, 0, -1 / h, 0],
        }
        bounds = (Bound.upper(10 / h),) + (Bound.upper(0.0),) * 4
        for eta, expected in cases.items():
            problem = self.cross_problem(NdfSpec.directional(eta), bounds)
            solution = self.solver.solve_bounded(problem)
            self.assertTrue(solution.ok, eta)
            self.assertArrayAlmostEqual(solution.w, expected)

    def test_inactive_bounds_keep_equality_solution(self):
        bounds = (None,) + (Bound.lower(0.0),) * 4
        problem = self.cross_problem(NdfSpec.laplacian(), bounds)
        solution = self.solver.solve_bounded(problem)
        self.assertTrue(solution.ok)
        self.assertEqual(solution.active_set, frozenset())
        self.assertArrayAlmostEqual(
            solution.w, np.array([-4, 1, 1, 1, 1]) / self.h**2, atol=1e-10
        )

    def test_collinear_nodes_cannot_differentiate_across(self):
        # nodes 3, 4, 5 lie on the line x2 = 0.5
        problem = self.builder.weight_problem(
            CENTER, [CENTER, EAST, WEST], NdfSpec.directional([0.0, 1.0])
        )
        solution = self.solver.solve_equality(problem)
        self.assertFalse(solution.ok)
        self.assertEqual(solution.status, SolveStatus.RANK_DEFICIENT)

    def test_infeasible_bounds(self):
        # w_1 + w_2 = 0 with the center fixed above zero is impossible when
        # both neighbors are bounded above by -1
        problem = WeightProblem(
            [0.0, 1.0, 1.0],
            [[1.0, 1.0, 1.0], [0.0, 1.0, -1.0]],
            [0.0, 0.0],
            (Bound.upper(1.0), Bound.upper(-1.0), Bound.upper(-1.0)),
        )
        solution = self.solver.solve_bounded(problem)
        self.assertEqual(solution.status, SolveStatus.INFEASIBLE)
        self.assertIsNone(solution.w)

    def test_kkt_detects_perturbation(self):
        bounds = (None,) + (Bound.upper(0.0),) * 4
        problem = self.cross_problem(NdfSpec.directional([1.0, 0.0]), bounds)
        solution = self.solver.solve_bounded(problem)
        w = solution.w.copy()
        w[1] += 1e-3
        perturbed = WeightSolution(w, SolveStatus.OPTIMAL, solution.active_set)
        report = self.solver.kkt_verify(problem, perturbed)
        self.assertGreaterEqual(
            max(report.bound_violation, report.stationarity, report.eq_residual), 1e-4
        )

    def test_warm_start_gives_same_weights(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            problem = random_problem(rng)
            cold = self.solver.solve_bounded(problem)
            if not cold.ok:
                continue
            warm = self.solver.solve_bounded(problem, warm_start=cold.active_set)
            self.assertTrue(warm.ok)
            self.assertAlmostEqual(
                warm.objective_value, cold.objective_value, delta=1e-9
            )

    def test_agrees_with_brute_force_enumeration(self):
        rng = np.random.default_rng(2024)
        feasible = 0
        for trial in range(500):
            problem = random_problem(rng)
            expected = brute_force(problem)
            solution = self.solver.solve_bounded(problem)
            if expected is None:
                self.assertFalse(solution.ok, f"problem {trial}")
                continue
            feasible += 1
            self.assertTrue(solution.ok, f"problem {trial}")
            self.assertLessEqual(
                abs(solution.objective_value - expected),
                1e-9 * max(1.0, abs(expected)),
                f"problem {trial}",
            )
            report = self.solver.kkt_verify(problem, solution)
            self.assertTrue(report.satisfied(1e-8), f"problem {trial}: {report}")
        self.assertGreater(feasible, 50)

    def test_scaling_the_data_scales_the_weights(self):
        rng = np.random.default_rng(7)
        solved = 0
        for trial in range(200):
            problem = random_problem(rng)
            solution = self.solver.solve_bounded(problem)
            for c in (0.5, 3.0, 10.0):
                scaled = scale_problem(problem, c)
                scaled_solution = self.solver.solve_bounded(scaled)
                self.assertEqual(
                    scaled_solution.status, solution.status, f"problem {trial}"
                )
                if not solution.ok:
                    continue
                solved += 1
                self.assertArrayAlmostEqual(
                    scaled_solution.w, c * solution.w, rtol=1e-8, atol=1e-10 * c
                )
        self.assertGreater(solved, 50)


if __name__ == "__main__":
    unittest.main()
