# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import linprog

from meshless_claw.log import logging
from meshless_claw.models.weights import (
    KktReport,
    SolveStatus,
    WeightProblem,
    WeightSolution,
)

RANK_TOL = 1e-10
EQ_TOL = 1e-10
BOUND_TOL = 1e-12
KKT_TOL = 1e-9
MAX_ITER_FACTOR = 50


class WeightSolver:
    """Weighted least-norm weights: min sum c_j w_j^2 s.t. A w = b, bounds.

    The center variable has no objective weight. It is eliminated through the
    all-ones row of A, which leaves a strictly convex problem in the other
    variables. Equality problems are solved by an SVD of the reduced matrix,
    bound constrained problems by an active-set method.
    """

    def __init__(
        self,
        rank_tol=RANK_TOL,
        eq_tol=EQ_TOL,
        bound_tol=BOUND_TOL,
        kkt_tol=KKT_TOL,
    ):
        self.logger = logging.get_logger(self.__class__.__name__)
        self.rank_tol = rank_tol
        self.eq_tol = eq_tol
        self.bound_tol = bound_tol
        self.kkt_tol = kkt_tol

    def solve_equality(self, problem: WeightProblem) -> WeightSolution:
        """Minimizer subject to the equality rows only (bounds are ignored).

        Returns rank_deficient when the reduced system has lost rank and the
        truncated solution does not satisfy the equalities.
        """
        w, consistent, rank_deficient = self._solve_fixed(problem, {})
        if not consistent:
            return WeightSolution(None, SolveStatus.RANK_DEFICIENT)
        if rank_deficient:
            self.logger.debug("Rank deficient but consistent equality system")
        return self._optimal(problem, w, frozenset())

    def solve_bounded(
        self, problem: WeightProblem, warm_start: Optional[Iterable[int]] = None
    ) -> WeightSolution:
        """Minimizer subject to the equalities and the one-sided bounds.

        Starting from the equality solution, the most violated bound is fixed
        until the iterate is feasible and bounds with a negative multiplier are
        released. If this does not settle within 50 n iterations, a phase one
        linear program decides feasibility and a primal active-set method runs
        from its feasible point.
        """
        unconstrained = self.solve_equality(problem)
        if not unconstrained.ok:
            return unconstrained
        if self._max_violation(problem, unconstrained.w, set()) <= self._bound_slack(
            unconstrained.w
        ):
            return unconstrained

        max_iter = MAX_ITER_FACTOR * problem.size
        active = set()
        if warm_start is not None:
            active = {j for j in warm_start if problem.bounds[j] is not None}
        solution = self._fix_and_release(problem, active, max_iter)
        if solution is not None:
            return solution

        start = self._phase_one(problem)
        if start is None:
            return WeightSolution(None, SolveStatus.INFEASIBLE)
        solution = self._primal_active_set(problem, start, max_iter)
        if solution is None:
            self.logger.debug(
                "Active-set iteration cap reached, reporting infeasible",
                variables=problem.size,
            )
            return WeightSolution(None, SolveStatus.INFEASIBLE)
        return solution

    def kkt_verify(self, problem: WeightProblem, solution: WeightSolution) -> KktReport:
        """Scaled optimality residuals of `solution`.

        Equality residual relative to 1 + |b|, bound violation relative to
        1 + max |w|, stationarity and complementarity relative to the size of
        the objective gradient.
        """
        w = solution.w
        A, b = problem.eq_matrix, problem.eq_rhs
        eq_residual = float(np.max(np.abs(A @ w - b))) / (1 + np.linalg.norm(b))
        w_scale = 1 + float(np.max(np.abs(w)))
        bound_violation = (
            max(
                [0.0]
                + [
                    bound.violation(w[j])
                    for j, bound in enumerate(problem.bounds)
                    if bound is not None
                ]
            )
            / w_scale
        )

        active = set(solution.active_set)
        multipliers, lam = self._multipliers(problem, w, active)
        gradient = 2 * problem.obj_diag * w
        lagrangian = gradient + A.T @ lam
        for j, nu in multipliers.items():
            lagrangian[j] += problem.bounds[j].sign * nu
        scale = 1 + float(np.max(np.abs(gradient))) + float(np.max(np.abs(A.T @ lam)))
        stationarity = float(np.max(np.abs(lagrangian))) / scale
        complementarity = max(
            [0.0]
            + [
                abs(nu * problem.bounds[j].violation(w[j]))
                for j, nu in multipliers.items()
            ]
        ) / (scale * w_scale)
        min_multiplier = min([0.0] + list(multipliers.values())) / scale
        return KktReport(
            eq_residual, bound_violation, stationarity, complementarity, min_multiplier
        )

    def _optimal(self, problem, w, active):
        return WeightSolution(
            w, SolveStatus.OPTIMAL, frozenset(active), problem.objective(w)
        )

    def _solve_fixed(self, problem, fixed):
        """Minimizer with the variables in `fixed` held at the given values.

        Returns (w, consistent, rank_deficient).
        """
        A, b, c = problem.eq_matrix, problem.eq_rhs, problem.obj_diag
        n = problem.size
        center = problem.center
        w = np.zeros(n)
        fixed_ids = np.array(sorted(fixed), dtype=int)
        w[fixed_ids] = [fixed[j] for j in fixed_ids]
        rhs = b - A[:, fixed_ids] @ w[fixed_ids]

        center_free = center not in fixed
        free = np.array(
            [j for j in range(n) if j not in fixed and j != center], dtype=int
        )
        if center_free:
            # w_center = rhs_0 - sum of the other free weights
            M = A[1:, free] - np.outer(A[1:, center], np.ones(len(free)))
            reduced_rhs = rhs[1:] - A[1:, center] * rhs[0]
        else:
            M = A[:, free]
            reduced_rhs = rhs

        x = np.zeros(len(free))
        rank_deficient = False
        if M.shape[0] and len(free):
            scale = 1 / np.sqrt(c[free])
            U, sigma, Vt = np.linalg.svd(M * scale[None, :], full_matrices=False)
            rank = int(np.sum(sigma > self.rank_tol * sigma[0])) if sigma[0] > 0 else 0
            rank_deficient = rank < M.shape[0]
            z = Vt[:rank].T @ ((U[:, :rank].T @ reduced_rhs) / sigma[:rank])
            x = scale * z
        elif M.shape[0]:
            rank_deficient = True

        residual = float(np.max(np.abs(M @ x - reduced_rhs))) if M.shape[0] else 0.0
        consistent = residual <= self.eq_tol * (1 + np.linalg.norm(b))
        w[free] = x
        if center_free:
            w[center] = rhs[0] - np.sum(x)
        return w, consistent, rank_deficient

    def _bound_slack(self, w):
        return self.bound_tol * (1 + float(np.max(np.abs(w))))

    @staticmethod
    def _violations(problem, w, active):
        violations = np.full(problem.size, -np.inf)
        for j, bound in enumerate(problem.bounds):
            if bound is not None and j not in active:
                violations[j] = bound.violation(w[j])
        return violations

    def _max_violation(self, problem, w, active):
        return float(np.max(self._violations(problem, w, active)))

    def _multipliers(self, problem, w, active):
        """Bound multipliers nu_j (>= 0 at a minimizer) and equality multipliers."""
        A, c = problem.eq_matrix, problem.obj_diag
        free = [j for j in range(problem.size) if j not in active]
        gradient = 2 * c * w
        if free:
            lam = np.linalg.lstsq(A[:, free].T, -gradient[free], rcond=None)[0]
        else:
            lam = np.zeros(A.shape[0])
        residual = gradient + A.T @ lam
        return {j: -problem.bounds[j].sign * residual[j] for j in active}, lam

    def _releasable(self, problem, w, active):
        """Active bound with the most negative multiplier, or None."""
        if not active:
            return None
        multipliers, lam = self._multipliers(problem, w, active)
        scale = 1 + float(np.max(np.abs(2 * problem.obj_diag * w)))
        j, nu = min(multipliers.items(), key=lambda item: (item[1], item[0]))
        return j if nu < -self.kkt_tol * scale else None

    def _fixed_values(self, problem, active):
        return {j: problem.bounds[j].value for j in active}

    def _fix_and_release(self, problem, active, max_iter):
        for _ in range(max_iter):
            w, consistent, _ = self._solve_fixed(
                problem, self._fixed_values(problem, active)
            )
            if not consistent:
                return None
            violations = self._violations(problem, w, active)
            worst = int(np.argmax(violations))
            if violations[worst] > self._bound_slack(w):
                active.add(worst)
                continue
            release = self._releasable(problem, w, active)
            if release is not None:
                active.discard(release)
                continue
            return self._optimal(problem, w, active)
        return None

    def _phase_one(self, problem):
        """Feasible point minimizing the total bound violation, or None."""
        A, b = problem.eq_matrix, problem.eq_rhs
        n = problem.size
        bounded = [j for j, bound in enumerate(problem.bounds) if bound is not None]
        m = len(bounded)
        # variables: w (free), then one slack per bound
        cost = np.concatenate([np.zeros(n), np.ones(m)])
        A_ub = np.zeros((m, n + m))
        b_ub = np.zeros(m)
        for row, j in enumerate(bounded):
            bound = problem.bounds[j]
            A_ub[row, j] = bound.sign
            A_ub[row, n + row] = -1.0
            b_ub[row] = bound.sign * bound.value
        result = linprog(
            cost,
            A_ub=A_ub if m else None,
            b_ub=b_ub if m else None,
            A_eq=np.hstack([A, np.zeros((A.shape[0], m))]),
            b_eq=b,
            bounds=[(None, None)] * n + [(0, None)] * m,
            method="highs",
            options={
                "primal_feasibility_tolerance": 1e-10,
                "dual_feasibility_tolerance": 1e-10,
            },
        )
        if result.status != 0:
            return None
        if result.fun > self.eq_tol * (1 + float(np.max(np.abs(b)))):
            return None
        return result.x[:n]

    def _primal_active_set(self, problem, start, max_iter):
        w = start.copy()
        active = set()
        for j, bound in enumerate(problem.bounds):
            if bound is not None and bound.violation(w[j]) >= -self._bound_slack(w):
                active.add(j)
                w[j] = bound.value

        for _ in range(max_iter):
            target, consistent, _ = self._solve_fixed(
                problem, self._fixed_values(problem, active)
            )
            if not consistent:
                return None
            step = target - w
            if np.max(np.abs(step)) <= self._bound_slack(target):
                release = self._releasable(problem, target, active)
                if release is None:
                    return self._optimal(problem, target, active)
                active.discard(release)
                w = target
                continue

            alpha, blocking = 1.0, None
            for j, bound in enumerate(problem.bounds):
                if bound is None or j in active:
                    continue
                rate = bound.sign * step[j]
                if rate <= 0:
                    continue
                ratio = -bound.violation(w[j]) / rate
                if ratio < alpha:
                    alpha, blocking = max(ratio, 0.0), j
            w = w + alpha * step
            if blocking is not None:
                active.add(blocking)
                w[blocking] = problem.bounds[blocking].value
        return None
