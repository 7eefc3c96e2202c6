# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

"""Exceptions raised by meshless_claw.

Every error carries an `exit_code` which the command line interface returns:
1 for usage and configuration problems, 2 for bad input data and 3 for
numerical failures during a run.
"""

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class MeshlessClawError(Exception):
    exit_code = EXIT_NUMERICAL


# Geometry


class InvalidSpacing(MeshlessClawError):
    exit_code = EXIT_CONFIG


class KTooLarge(MeshlessClawError):
    pass


class MalformedGeometry(MeshlessClawError):
    """Even the equality-only fallback of a stencil system is rank deficient."""

    def __init__(self, node, influence_size):
        self.node = node
        self.influence_size = influence_size
        super().__init__(
            f"Node {node} has no consistent stencil with {influence_size} neighbors"
        )


# Time stepping


class NonFiniteValue(MeshlessClawError):
    def __init__(self, node, step):
        self.node = node
        self.step = step
        super().__init__(f"Non-finite value at node {node} in step {step}")


class TimeStepMismatch(MeshlessClawError):
    exit_code = EXIT_CONFIG


# Configuration


class ConfigError(MeshlessClawError):
    exit_code = EXIT_CONFIG


class UnknownKey(ConfigError):
    pass


class BadValue(ConfigError):
    pass


class MissingRequired(ConfigError):
    pass


# Input data


class DataError(MeshlessClawError):
    exit_code = EXIT_DATA


class ParseError(DataError):
    def __init__(self, path, line, reason):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {reason}")


class OutOfBounds(DataError):
    pass


class LengthMismatch(DataError):
    pass


class EmptyInput(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class DegenerateNeighborhood(MeshlessClawError):
    """Too few independent neighbors for a local polynomial fit."""
