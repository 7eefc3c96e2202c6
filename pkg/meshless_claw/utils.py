# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0
import itertools
from functools import lru_cache

import numpy as np

from meshless_claw.exceptions import EmptyInput

# Relative tolerance used when comparing node coordinates with face positions
COORD_TOL = 1e-12


@lru_cache(maxsize=None)
def monomial_exponents(dim, q):
    """Exponents of all monomials of total degree < q in `dim` variables.

    Ordered by degree, within a degree by the axes they contain, so in two
    dimensions with q=3: 1, y1, y2, y1^2, y1*y2, y2^2.
    """
    exponents = []
    for degree in range(q):
        for axes in itertools.combinations_with_replacement(range(dim), degree):
            alpha = [0] * dim
            for axis in axes:
                alpha[axis] += 1
            exponents.append(tuple(alpha))
    return np.array(exponents, dtype=int).reshape(-1, dim)


def evaluate_monomials(y, exponents):
    """Matrix with entry (r, j) equal to monomial r evaluated at point y[j]."""
    return np.prod(y[None, :, :] ** exponents[:, None, :], axis=2)


def grow_influence_size(n):
    """ceil(1.2 n) in integer arithmetic, never smaller than n + 1."""
    return max(n + 1, (6 * n + 4) // 5)


def minimum_image(displacement, lengths, periodic):
    """Wrap displacements on periodic axes to their shortest representative."""
    displacement = np.array(displacement, dtype=float, copy=True)
    if not np.any(periodic):
        return displacement
    lengths = np.asarray(lengths, dtype=float)
    axes = np.flatnonzero(periodic)
    displacement[..., axes] -= lengths[axes] * np.round(
        displacement[..., axes] / lengths[axes]
    )
    return displacement


def median(values):
    """Middle order statistic, the mean of the two middle values for even length."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise EmptyInput("Median of an empty list")
    return float(np.median(values))
