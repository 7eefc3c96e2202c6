# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

import numpy as np

import meshless_claw

APP_NAME = "meshless_claw"


def add_application_metadata(logger, method_name, event_dict):
    """Add the application name and version to the passed event dictionary.
    Note:
        The unused arguments are still passed by the caller and need to be caught.
    Args:
        logger: wrapped logger object
        method_name: name of the wrapper method
        event_dict: current context and event
    Returns:
        Dictionary with possibly extra fields
    """
    event_dict.setdefault("app", APP_NAME)
    event_dict.setdefault("app_version", meshless_claw.__version__)

    return event_dict


def coerce_numpy_scalars(logger, method_name, event_dict):
    """Numpy scalars are not JSON serializable, convert them to builtin floats
    and ints so the JSON renderer does not fall back to their repr.

    Example:
        event_dict = dict(event='step', t=np.float64(0.002)) ->
        event_dict = dict(event='step', t=0.002)
    """
    for key, value in event_dict.items():
        if isinstance(value, np.floating):
            event_dict[key] = float(value)
        elif isinstance(value, np.integer):
            event_dict[key] = int(value)

    return event_dict
