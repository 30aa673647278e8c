# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Shared fixtures"""

import numpy as np
import pytest

from degel._grid import make_grid


@pytest.fixture
def small_grid():
    """Unit ball grid with h = 0.125"""
    return make_grid(17)


@pytest.fixture
def medium_grid():
    """Unit ball grid with h = 0.0625"""
    return make_grid(33)


@pytest.fixture
def rng():
    """Seeded generator, so sampled checks are reproducible"""
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    """Tests run single-threaded unless they set DEGEL_THREADS themselves"""
    monkeypatch.delenv("DEGEL_THREADS", raising=False)
