# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Logging setup for experiment runs"""
import logging

import numpy as np

from ._helpers import worker_count

LOG_FORMAT = "%(levelname)s: %(message)s"
DEBUG_FORMAT = "%(asctime)s %(levelname)s: %(message)s"


def log_level(args) -> int:
    """DEBUG with -v, WARNING with -q, INFO otherwise"""
    if getattr(args, "verbose", False):
        return logging.DEBUG
    if getattr(args, "quiet", False):
        return logging.WARNING
    return logging.INFO


def configure_logger(args) -> logging.Logger:
    """Set the level from the command line and route numpy warnings into the log"""
    level = log_level(args)
    logging.basicConfig(
        encoding="utf-8",
        format=DEBUG_FORMAT if level == logging.DEBUG else LOG_FORMAT,
        level=level,
    )
    log = logging.getLogger()
    log.setLevel(level)
    # overflow in a diverging iteration shows up as a RuntimeWarning
    logging.captureWarnings(True)
    logging.debug("numpy %s, up to %s worker threads", np.__version__, worker_count())

    return log
