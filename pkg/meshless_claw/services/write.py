# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
import yaml

from meshless_claw.log import logging
from meshless_claw.models.bench import ErrorReport
from meshless_claw.models.fault import FaultSet, ViscosityField
from meshless_claw.models.geometry import NodeSet
from meshless_claw.models.scheme import Field

# enough digits to read back every double exactly
FLOAT_FORMAT = "%.17g"

PathLike = Union[str, Path]


def coordinate_columns(dim: int):
    return [f"x{axis + 1}" for axis in range(dim)]


class Write:
    def __init__(self):
        self.logger = logging.get_logger(self.__class__.__name__)

    def write_frame(self, frame: pd.DataFrame, path: PathLike, what="table") -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        self.logger.info(
            "Wrote output file", kind=what, path=str(path), rows=len(frame)
        )
        return path

    def write_nodes(self, nodes: NodeSet, path: PathLike) -> Path:
        """Node coordinates and the 0/1 boundary flag, one node per row."""
        frame = pd.DataFrame(nodes.coords, columns=coordinate_columns(nodes.dim))
        frame["boundary"] = nodes.boundary_flag.astype(int)
        return self.write_frame(frame, path, "nodes")

    def write_solution(
        self, nodes: NodeSet, U: Union[Field, np.ndarray], path: PathLike
    ) -> Path:
        values = U.values if isinstance(U, Field) else np.asarray(U, dtype=float)
        frame = pd.DataFrame(nodes.coords, columns=coordinate_columns(nodes.dim))
        frame["u"] = values
        return self.write_frame(frame, path, "solution")

    def write_snapshot(
        self, nodes: NodeSet, U: Field, step: int, output_dir: PathLike
    ) -> Path:
        path = Path(output_dir) / f"snapshot_{step:06d}.csv"
        return self.write_solution(nodes, U, path)

    def write_diagnostics(self, diagnostics: pd.DataFrame, path: PathLike) -> Path:
        return self.write_frame(diagnostics, path, "diagnostics")

    def write_stencils(self, stencils: pd.DataFrame, path: PathLike) -> Path:
        return self.write_frame(stencils, path, "stencil diagnostics")

    def write_errors(self, report: ErrorReport, path: PathLike) -> Path:
        return self.write_frame(pd.DataFrame([report.to_dict()]), path, "errors")

    def write_faults(self, nodes: NodeSet, faults: FaultSet, path: PathLike) -> Path:
        frame = pd.DataFrame(nodes.coords, columns=coordinate_columns(nodes.dim))
        frame.insert(0, "node", np.arange(nodes.size))
        frame["indicator"] = faults.indicator
        frame["is_fault"] = faults.mask.astype(int)
        return self.write_frame(frame, path, "faults")

    def write_viscosity(
        self, nodes: NodeSet, field: ViscosityField, path: PathLike
    ) -> Path:
        frame = pd.DataFrame(nodes.coords, columns=coordinate_columns(nodes.dim))
        frame.insert(0, "node", np.arange(nodes.size))
        frame["mu"] = field.mu
        return self.write_frame(frame, path, "viscosity field")

    def write_metadata(self, metadata: dict, path: PathLike) -> Path:
        """Key/value YAML document, plain Python scalars only."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(_plain(metadata), fh, sort_keys=False)
        self.logger.info("Wrote metadata", path=str(path))
        return path


def _plain(value):
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "value"):
        return value.value
    return value
