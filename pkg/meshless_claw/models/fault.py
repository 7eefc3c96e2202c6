# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class FaultSet:
    ids: np.ndarray
    alpha1: float
    alpha2: float
    indicator: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=int)
        indicator = np.asarray(self.indicator, dtype=float)
        if np.any(~np.isfinite(indicator)) or np.any(indicator < 0):
            raise ValueError("Fault indicator values should be finite and >= 0")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "indicator", indicator)

    def __len__(self):
        return len(self.ids)

    @property
    def mask(self):
        mask = np.zeros(len(self.indicator), dtype=bool)
        mask[self.ids] = True
        return mask


@dataclass(frozen=True, eq=False)
class ViscosityField:
    mu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        if np.any(self.mu < 0):
            raise ValueError("Viscosity factors should be non-negative")
