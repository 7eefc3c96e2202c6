# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np
import pandas as pd
import yaml

from meshless_claw.exceptions import DimensionMismatch, EmptyInput, ParseError
from meshless_claw.log import logging
from meshless_claw.models.geometry import MAX_DIM

PathLike = Union[str, Path]


class NodalData(NamedTuple):
    coords: np.ndarray
    values: np.ndarray


class Read:
    def __init__(self):
        self.logger = logging.get_logger(self.__class__.__name__)

    def read_frame(self, path: PathLike) -> pd.DataFrame:
        """CSV table with a header line, every cell a finite number."""
        path = Path(path)
        try:
            raw = pd.read_csv(path, dtype=str, skip_blank_lines=False)
        except pd.errors.EmptyDataError as e:
            raise EmptyInput(f"{path} is empty") from e
        except pd.errors.ParserError as e:
            raise ParseError(path, 0, str(e)) from e
        if raw.empty:
            raise EmptyInput(f"{path} has a header but no rows")
        cells = raw.apply(lambda column: column.str.strip())
        checked = cells.apply(lambda column: pd.to_numeric(column, errors="coerce"))
        bad = ~np.isfinite(checked.to_numpy(dtype=float))
        if bad.any():
            row = int(np.flatnonzero(bad.any(axis=1))[0])
            column = checked.columns[int(np.argmax(bad[row]))]
            # header is line 1
            raise ParseError(path, row + 2, f"{column} is not a finite number")
        # to_numeric may be off by one ulp, astype parses each cell exactly
        return cells.astype(float)

    def read_nodal(self, path: PathLike, value_column: str) -> NodalData:
        """Coordinates x1..xd and one value column of a node table."""
        frame = self.read_frame(path)
        axes = []
        while f"x{len(axes) + 1}" in frame.columns and len(axes) < MAX_DIM:
            axes.append(f"x{len(axes) + 1}")
        if not axes:
            raise DimensionMismatch(f"{path} has no coordinate columns x1..xd")
        if value_column not in frame.columns:
            raise ParseError(Path(path), 1, f"missing column {value_column}")
        data = NodalData(
            frame[axes].to_numpy(dtype=float),
            frame[value_column].to_numpy(dtype=float),
        )
        self.logger.info("Read node table", path=str(path), nodes=len(data.values))
        return data

    def read_solution(self, path: PathLike) -> NodalData:
        return self.read_nodal(path, "u")

    def read_nodes(self, path: PathLike) -> NodalData:
        """Coordinates and boundary flags written by `Write.write_nodes`."""
        coords, flags = self.read_nodal(path, "boundary")
        return NodalData(coords, flags.astype(bool))

    def read_metadata(self, path: PathLike) -> dict:
        with open(path, "r", encoding="utf-8") as fh:
            return yaml.safe_load(fh)
