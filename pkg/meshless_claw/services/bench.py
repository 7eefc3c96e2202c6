# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from meshless_claw.exceptions import (
    DegenerateNeighborhood,
    DimensionMismatch,
    LengthMismatch,
    OutOfBounds,
    ParseError,
)
from meshless_claw.log import logging
from meshless_claw.models.bench import (
    BoundaryKind,
    ErrorReport,
    GridField,
    Problem,
    ProblemId,
)
from meshless_claw.models.geometry import Domain, Face
from meshless_claw.models.scheme import Field, FluxKind, FluxModel
from meshless_claw.services.geometry import SpatialIndex
from meshless_claw.utils import minimum_image

LOWER_LEFT = (Face(0, -1), Face(1, -1))
ALL_FACES = (Face(0, -1), Face(0, 1), Face(1, -1), Face(1, 1))
GRID_HEADER = ["nx", "ny", "xmin", "xmax", "ymin", "ymax"]


def exact_burgers_corner(t: float, x) -> np.ndarray:
    """Exact solution of Burgers' equation with flux u^2 (1, 1) / 2 on the unit
    square, starting from four constant quadrants.

    Cases are checked in order and the first match wins, so points on a
    boundary between two cases get the value of the earlier one.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    px, py = x[:, 0], x[:, 1]
    if t <= 0:
        conditions = [
            (px <= 0.5) & (py >= 0.5),
            (px >= 0.5) & (py >= 0.5),
            (px <= 0.5) & (py <= 0.5),
            (px >= 0.5) & (py <= 0.5),
        ]
        return np.select(conditions, [-0.2, -1.0, 0.5, 0.8])

    left_shock = 0.5 - 3 * t / 5
    kink = 0.5 - t / 4
    fan_start = 0.5 + t / 2
    fan_end = 0.5 + 4 * t / 5
    first = px <= left_shock
    second = (px >= left_shock) & (px <= kink)
    third = (px >= kink) & (px <= fan_start)
    fourth = (px >= fan_start) & (px <= fan_end)
    fifth = px >= fan_end
    line_a = 0.5 + 3 * t / 20
    line_b = -8 * px / 7 + 15 / 4 - 15 * t / 28
    line_c = px / 6 + 5 / 12 - 5 * t / 24
    parabola = px - 5 / (18 * t) * (px + t - 0.5) ** 2
    line_d = 0.5 - t / 10
    conditions = [
        first & (py >= line_a),
        first & (py <= line_a),
        second & (py >= line_b),
        second & (py <= line_b),
        third & (py >= line_c),
        third & (py <= line_c),
        fourth & (py >= parabola),
        fourth & (py <= parabola),
        fifth & (py >= line_d),
        fifth & (py <= line_d),
    ]
    fan = (2 * px - 1) / (2 * t)
    choices = [-0.2, 0.5, -1.0, 0.5, -1.0, 0.5, -1.0, fan, -1.0, 0.8]
    return np.select(conditions, choices)


def _burgers_smooth_u0(x):
    return np.sin(8 * np.pi * (x[:, 0] + x[:, 1] / 2))


def _rotating_wave_u0(x):
    inside = np.linalg.norm(x, axis=1) < 1
    return np.where(inside, 3.5 * np.pi, 0.25 * np.pi)


def _transport_u0(x):
    return np.sin(2 * np.pi * x[:, 0]) * np.sin(2 * np.pi * x[:, 1])


TRANSPORT_VELOCITY = (1.0, 0.5)


def _transport_exact(t, x):
    return _transport_u0(np.atleast_2d(x) - t * np.array(TRANSPORT_VELOCITY))


PROBLEMS = {
    ProblemId.BURGERS_CORNER: lambda: Problem(
        id=ProblemId.BURGERS_CORNER,
        domain=Domain((0.0, 0.0), (1.0, 1.0), (False, False)),
        flux=FluxModel(FluxKind.BURGERS, (1.0, 1.0)),
        u0=lambda x: exact_burgers_corner(0.0, x),
        boundary=BoundaryKind.INFLOW_EXACT,
        decorated_faces=ALL_FACES,
        t_final=0.5,
        h=0.01,
        u0_range=(-1.0, 0.8),
        exact=exact_burgers_corner,
    ),
    ProblemId.BURGERS_SMOOTH: lambda: Problem(
        id=ProblemId.BURGERS_SMOOTH,
        domain=Domain((0.0, 0.0), (0.5, 0.5), (True, True)),
        flux=FluxModel(FluxKind.BURGERS, (1.0, 1.0)),
        u0=_burgers_smooth_u0,
        boundary=BoundaryKind.PERIODIC,
        decorated_faces=LOWER_LEFT,
        t_final=0.1,
        h=0.0025,
        u0_range=(-1.0, 1.0),
    ),
    ProblemId.ROTATING_WAVE: lambda: Problem(
        id=ProblemId.ROTATING_WAVE,
        domain=Domain((-2.0, -2.5), (2.0, 1.5), (True, True)),
        flux=FluxModel(FluxKind.ROTATING_WAVE),
        u0=_rotating_wave_u0,
        boundary=BoundaryKind.PERIODIC,
        decorated_faces=LOWER_LEFT,
        t_final=1.0,
        h=0.01,
        u0_range=(0.25 * np.pi, 3.5 * np.pi),
    ),
    ProblemId.LINEAR_TRANSPORT: lambda: Problem(
        id=ProblemId.LINEAR_TRANSPORT,
        domain=Domain((0.0, 0.0), (1.0, 1.0), (True, True)),
        flux=FluxModel(FluxKind.LINEAR_TRANSPORT, TRANSPORT_VELOCITY),
        u0=_transport_u0,
        boundary=BoundaryKind.PERIODIC,
        decorated_faces=LOWER_LEFT,
        t_final=0.5,
        h=0.02,
        u0_range=(-1.0, 1.0),
        exact=_transport_exact,
    ),
}


class Benchmarks:
    def __init__(self):
        self.logger = logging.get_logger(self.__class__.__name__)

    @staticmethod
    def get_problem(problem_id: Union[ProblemId, str]) -> Problem:
        return PROBLEMS[ProblemId(problem_id)]()

    @staticmethod
    def exact_burgers_corner(t: float, x) -> np.ndarray:
        return exact_burgers_corner(t, x)

    def load_reference_grid(self, path: Union[str, Path]) -> GridField:
        """Read a reference grid file.

        First line `nx,ny,xmin,xmax,ymin,ymax`, then nx * ny values, one per
        line, row-major with x running fastest.
        """
        path = Path(path)
        with open(path, "r") as fh:
            header = fh.readline()
        fields = [field.strip() for field in header.strip().split(",")]
        if len(fields) != len(GRID_HEADER):
            raise ParseError(path, 1, f"expected header {','.join(GRID_HEADER)}")
        try:
            nx, ny = int(fields[0]), int(fields[1])
            bounds = tuple(float(field) for field in fields[2:])
        except ValueError as e:
            raise ParseError(path, 1, str(e)) from e

        try:
            raw = pd.read_csv(
                path,
                skiprows=1,
                header=None,
                names=["value"],
                dtype=str,
                skip_blank_lines=False,
            )
        except pd.errors.EmptyDataError as e:
            raise ParseError(path, 2, "no grid values") from e
        cells = raw["value"].str.strip()
        checked = pd.to_numeric(cells, errors="coerce")
        bad = np.flatnonzero(~np.isfinite(checked.to_numpy(dtype=float)))
        if bad.size:
            # data starts on line 2
            raise ParseError(path, int(bad[0]) + 2, "value is not a finite number")
        if len(cells) != nx * ny:
            raise ParseError(
                path, len(cells) + 2, f"expected {nx * ny} values, got {len(cells)}"
            )
        try:
            grid = GridField(nx, ny, bounds, cells.astype(float).to_numpy())
        except ValueError as e:
            raise DimensionMismatch(str(e)) from e
        self.logger.info("Loaded reference grid", path=str(path), nx=nx, ny=ny)
        return grid

    @staticmethod
    def interp_grid(ref: GridField, x) -> np.ndarray:
        """Piecewise linear interpolation, every cell split along its
        lower-left to upper-right diagonal."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        xmin, xmax, ymin, ymax = ref.bounds
        tol = 1e-12 * max(1.0, xmax - xmin, ymax - ymin)
        outside = (
            (x[:, 0] < xmin - tol)
            | (x[:, 0] > xmax + tol)
            | (x[:, 1] < ymin - tol)
            | (x[:, 1] > ymax + tol)
        )
        if np.any(outside):
            raise OutOfBounds(f"Point {x[np.argmax(outside)]} lies outside the grid")

        dx = (xmax - xmin) / (ref.nx - 1)
        dy = (ymax - ymin) / (ref.ny - 1)
        gx = np.clip((x[:, 0] - xmin) / dx, 0, ref.nx - 1)
        gy = np.clip((x[:, 1] - ymin) / dy, 0, ref.ny - 1)
        i = np.minimum(np.floor(gx).astype(int), ref.nx - 2)
        j = np.minimum(np.floor(gy).astype(int), ref.ny - 2)
        a, b = gx - i, gy - j

        table = ref.table
        f00 = table[j, i]
        f10 = table[j, i + 1]
        f01 = table[j + 1, i]
        f11 = table[j + 1, i + 1]
        lower = f00 + a * (f10 - f00) + b * (f11 - f10)
        upper = f00 + b * (f01 - f00) + a * (f11 - f01)
        return np.where(a >= b, lower, upper)

    @staticmethod
    def errors(U: Union[Field, np.ndarray], reference) -> ErrorReport:
        """E1 mean absolute and E2 root mean square nodal error."""
        values = U.values if isinstance(U, Field) else np.asarray(U, dtype=float)
        reference = np.asarray(reference, dtype=float)
        if values.shape != reference.shape:
            raise LengthMismatch(
                f"{len(values)} solution values against {len(reference)} references"
            )
        diff = np.abs(values - reference)
        E1 = float(np.mean(diff))
        E2 = float(np.sqrt(np.mean(diff**2)))
        # rounding can put E1 one ulp above E2
        return ErrorReport(min(E1, E2), E2, len(values))

    def eval_at(
        self, points, U: Union[Field, np.ndarray], index: SpatialIndex, k: int = 6
    ) -> np.ndarray:
        """Weighted least squares linear fit over the k nearest nodes, weights
        (1 + d_j / h)^-2, evaluated at every point."""
        values = U.values if isinstance(U, Field) else np.asarray(U, dtype=float)
        points = np.atleast_2d(np.asarray(points, dtype=float))
        nodes = index.nodes
        result = np.empty(len(points))
        for row, point in enumerate(points):
            ids, _ = index.nearest(point, min(k, nodes.size))
            try:
                result[row] = self._linear_fit(point, ids, values, index)
            except DegenerateNeighborhood:
                self.logger.debug("Degenerate neighborhood, using nearest node")
                result[row] = values[ids[0]]
        return result

    @staticmethod
    def _linear_fit(point, ids, values, index):
        nodes = index.nodes
        displacement = minimum_image(
            nodes.coords[ids] - point, nodes.domain.lengths, nodes.domain.periodic
        )
        distance = np.linalg.norm(displacement, axis=1)
        sqrt_weight = 1.0 / (1.0 + distance / nodes.h)
        design = np.column_stack([np.ones(len(ids)), displacement / nodes.h])
        coef, _, rank, _ = np.linalg.lstsq(
            design * sqrt_weight[:, None], values[ids] * sqrt_weight, rcond=None
        )
        if rank < design.shape[1]:
            raise DegenerateNeighborhood(f"rank {rank} neighborhood")
        return float(coef[0])

    def cross_section(
        self,
        U: Union[Field, np.ndarray],
        index: SpatialIndex,
        x2: float,
        samples: int = 200,
        k: int = 6,
    ) -> pd.DataFrame:
        """Solution sampled along the line x2 = const, `s` is the x1 coordinate."""
        domain = index.nodes.domain
        endpoint = not domain.periodic[0]
        s = np.linspace(domain.lower[0], domain.upper[0], samples, endpoint=endpoint)
        points = np.column_stack([s, np.full(samples, x2)])
        return pd.DataFrame({"s": s, "u": self.eval_at(points, U, index, k)})

    def contour_grid(
        self, U: Union[Field, np.ndarray], index: SpatialIndex, nx=200, ny=200, k=6
    ) -> pd.DataFrame:
        """Solution sampled on an nx by ny Cartesian grid, x1 running fastest."""
        domain = index.nodes.domain
        axes = [
            np.linspace(lo, up, n, endpoint=not periodic)
            for lo, up, n, periodic in zip(
                domain.lower, domain.upper, (nx, ny), domain.periodic
            )
        ]
        gx, gy = np.meshgrid(*axes, indexing="xy")
        points = np.column_stack([gx.ravel(), gy.ravel()])
        values = self.eval_at(points, U, index, k)
        return pd.DataFrame({"x1": points[:, 0], "x2": points[:, 1], "u": values})
