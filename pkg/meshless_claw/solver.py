# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0
import time
from pathlib import Path
from typing import Optional

import numpy as np

from meshless_claw import __version__
from meshless_claw.log import logging
from meshless_claw.models.bench import ErrorReport
from meshless_claw.models.geometry import NodeSet
from meshless_claw.models.scheme import Field, RunResult, SchemeConfig
from meshless_claw.services.bench import Benchmarks
from meshless_claw.services.fault import FaultDetector
from meshless_claw.services.geometry import NodeGenerator, SpatialIndex
from meshless_claw.services.qpcore import WeightSolver
from meshless_claw.services.read import Read
from meshless_claw.services.scheme import PositiveScheme
from meshless_claw.services.write import Write
from meshless_claw.settings import RunConfig


class MeshlessSolver:
    """Provides a high-level interface to the meshless solver.

    Stateless services are exposed as class attributes so that client code can
    call e.g. `MeshlessSolver.generate_nodes(...)` directly. An instance ties
    them together for one run configuration.
    """

    # services
    _nodes = NodeGenerator()
    _benchmarks = Benchmarks()
    _write = Write()
    _read = Read()

    # geometry methods
    halton_points = staticmethod(NodeGenerator.halton_points)
    generate_nodes = _nodes.generate_nodes
    from_coordinates = _nodes.from_coordinates
    build_index = _nodes.build_index
    # benchmark methods
    get_problem = staticmethod(Benchmarks.get_problem)
    exact_burgers_corner = staticmethod(Benchmarks.exact_burgers_corner)
    load_reference_grid = _benchmarks.load_reference_grid
    interp_grid = staticmethod(Benchmarks.interp_grid)
    errors = staticmethod(Benchmarks.errors)
    eval_at = _benchmarks.eval_at
    cross_section = _benchmarks.cross_section
    contour_grid = _benchmarks.contour_grid
    # write methods
    write_nodes = _write.write_nodes
    write_solution = _write.write_solution
    write_snapshot = _write.write_snapshot
    write_diagnostics = _write.write_diagnostics
    write_stencils = _write.write_stencils
    write_errors = _write.write_errors
    write_faults = _write.write_faults
    write_viscosity = _write.write_viscosity
    write_metadata = _write.write_metadata
    write_frame = _write.write_frame
    # read methods
    read_solution = _read.read_solution
    read_nodes = _read.read_nodes
    read_metadata = _read.read_metadata

    def __init__(self, config: RunConfig):
        """Set up the problem, node set and spatial index of one run.

        Args:
            config: Validated run configuration. The flux of the chosen problem
                is multiplied by `config.gamma`.
        """
        self.logger = logging.get_logger(self.__class__.__name__)
        self.config = config
        self.problem = config.get_problem()
        self.flux = self.problem.flux.scaled(config.gamma)
        self._node_set = None
        self._index = None

    @property
    def nodes(self) -> NodeSet:
        if self._node_set is None:
            self._node_set = self.generate_nodes(
                self.config.node_kind,
                self.config.h,
                self.problem.domain,
                seed=self.config.seed,
                decorated_faces=self.problem.decorated_faces,
            )
        return self._node_set

    @property
    def index(self) -> SpatialIndex:
        if self._index is None:
            self._index = self.build_index(self.nodes)
        return self._index

    def velocity_scale(self) -> float:
        """v0 = max ||F'(u0)||_inf over the closed domain.

        The nodal initial values are completed with the extreme values of u0,
        which may be attained between nodes.
        """
        u0 = np.concatenate(
            [self.problem.initial_values(self.nodes.coords), self.problem.u0_range]
        )
        return PositiveScheme.compute_v0(self.flux, u0)

    def scheme_config(self) -> SchemeConfig:
        return self.config.resolve(self.velocity_scale())

    def reference_values(self, field: Field) -> Optional[np.ndarray]:
        """Reference solution at the nodes: interpolated from the reference grid
        when configured, else the exact solution when the problem has one."""
        if self.config.reference_path is not None:
            grid = self.load_reference_grid(self.config.reference_path)
            return self.interp_grid(grid, self.nodes.coords)
        if self.problem.exact is not None:
            # a flux scaled by gamma runs gamma times faster
            return self.problem.exact(self.config.gamma * field.time, self.nodes.coords)
        return None

    def run(self, write: bool = True) -> RunResult:
        """Run the configured scheme and write its outputs to `output_dir`."""
        config = self.config
        scheme_config = self.scheme_config()
        # validates T / dt before any output is written
        steps = scheme_config.steps
        output_dir = Path(config.output_dir)
        scheme = PositiveScheme(
            self.problem,
            scheme_config,
            self.nodes,
            self.index,
            solver=WeightSolver(),
            flux=self.flux,
        )

        on_step = None
        if write and config.snapshot_every > 0:

            def on_step(step, field):
                if step % config.snapshot_every == 0 and step < steps:
                    self.write_snapshot(self.nodes, field, step, output_dir)

        start = time.perf_counter()
        result = scheme.run(on_step=on_step, stencil_table=config.diagnostics)
        wall_time = time.perf_counter() - start

        report = None
        reference = self.reference_values(result.field)
        if reference is not None:
            report = self.errors(result.field, reference)
            self.logger.info("Computed errors", **report.to_dict())

        if write:
            self.write_outputs(scheme_config, result, report, wall_time)
        return result

    def write_outputs(
        self,
        scheme_config: SchemeConfig,
        result: RunResult,
        report: Optional[ErrorReport],
        wall_time: float,
    ):
        config = self.config
        output_dir = Path(config.output_dir)
        self.write_solution(self.nodes, result.field, output_dir / "solution.csv")
        self.write_diagnostics(result.diagnostics, output_dir / "diagnostics.csv")
        if result.stencils is not None:
            self.write_stencils(result.stencils, output_dir / "stencils.csv")
        if report is not None:
            self.write_errors(report, output_dir / "errors.csv")
        if config.cross_section_x2 is not None:
            frame = self.cross_section(
                result.field, self.index, config.cross_section_x2
            )
            self.write_frame(frame, output_dir / "cross_section.csv", "cross section")
        if config.contour_size > 0:
            size = config.contour_size
            frame = self.contour_grid(result.field, self.index, size, size)
            self.write_frame(frame, output_dir / "contour.csv", "contour grid")
        self.write_metadata(
            self.metadata(scheme_config, result, report, wall_time),
            output_dir / "metadata.yaml",
        )

    def metadata(
        self,
        scheme_config: SchemeConfig,
        result: RunResult,
        report: Optional[ErrorReport],
        wall_time: float,
    ) -> dict:
        diagnostics = result.diagnostics
        metadata = {
            "version": __version__,
            "problem": self.problem.id.value,
            "algorithm": scheme_config.algorithm.value,
            "node_kind": self.nodes.kind.value,
            "seed": self.config.seed,
            "nodes": self.nodes.size,
            "boundary_nodes": int(self.nodes.boundary_flag.sum()),
            "h": scheme_config.h,
            "dt": scheme_config.dt,
            "t_final": scheme_config.t_final,
            "steps": scheme_config.steps,
            "mu": scheme_config.mu,
            "v0": scheme_config.v0,
            "gamma": self.config.gamma,
            "n_min": scheme_config.n_min,
            "n_max": scheme_config.n_max,
            "n_f": scheme_config.n_f,
            "c1": scheme_config.c1,
            "c2": scheme_config.c2,
            "c3": scheme_config.c3,
            "wall_time_s": wall_time,
            "dropped_constraints": int(diagnostics["dropped_count"].sum()),
            "max_influence": int(diagnostics["max_influence"].max()),
            "lmp_violations": int(diagnostics["lmp_violations"].sum()),
            "center_bound_activations": int(diagnostics["b_active_count"].sum()),
        }
        if report is not None:
            metadata["errors"] = report.to_dict()
        return metadata

    @classmethod
    def classify(cls, nodes: NodeSet, values, n_f=10, c1=1.0, c2=2.0, c3=5.0, mu=1.0):
        """Fault set and viscosity field of a field given on any node set."""
        detector = FaultDetector(cls._nodes.build_index(nodes))
        faults = detector.detect_faults(values, n_f, c1, c2)
        return faults, detector.viscosity_field(faults, mu, c3, nodes.h)
