# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Tests for the logging setup"""

import logging
from argparse import Namespace

import pytest

from degel._logging import configure_logger, log_level


@pytest.fixture(autouse=True)
def restore_root_logger():
    """Undo level changes on the root logger"""
    root = logging.getLogger()
    level = root.level
    yield
    root.setLevel(level)
    logging.captureWarnings(False)


@pytest.mark.parametrize(
    "flags, level",
    [
        ({}, logging.INFO),
        ({"verbose": True}, logging.DEBUG),
        ({"quiet": True}, logging.WARNING),
        ({"verbose": True, "quiet": True}, logging.DEBUG),
    ],
)
def test_log_level(flags, level):
    assert log_level(Namespace(**flags)) == level


def test_configure_logger_sets_the_root_level():
    assert configure_logger(Namespace(quiet=True)).level == logging.WARNING
    assert configure_logger(Namespace(verbose=True)).level == logging.DEBUG
    assert configure_logger(Namespace(verbose=False, quiet=False)) is logging.getLogger()
    assert logging.getLogger().level == logging.INFO
