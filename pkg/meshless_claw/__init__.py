# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("meshless_claw")
except PackageNotFoundError:
    # package is not installed
    __version__ = "0.0.0"
