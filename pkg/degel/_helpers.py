# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Overarching helper functions"""

import logging
import math
import os
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "DEGEL_THREADS"


def format_number(value: float) -> str:
    """Format a real with 17 significant digits, `nan` for undefined values"""
    if math.isnan(value):
        return "nan"
    return f"{value:.17g}"


def write_text_lines(lines: Iterable[str], path: str) -> None:
    """Write lines into a text file, unless path is `-` for which it will be stdout"""
    if path == "-":
        for line in lines:
            print(line)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="UTF-8") as textfile:
            for line in lines:
                textfile.write(line + "\n")


def read_text_lines(path: str) -> list[str]:
    """Open a text file and return its lines without trailing newlines"""
    with open(path, "r", encoding="UTF-8") as textfile:
        return textfile.read().splitlines()


def worker_count() -> int:
    """
    Number of worker threads allowed for independent solves.

    Read from the `DEGEL_THREADS` environment variable. Unset, empty or invalid
    values fall back to a single worker.
    """
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        count = int(raw)
    except ValueError:
        logging.warning("Ignoring invalid %s value '%s', using 1 worker", THREADS_ENV, raw)
        return 1
    return max(1, count)


def map_parallel(func: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """
    Apply a function to all items, in worker threads if `DEGEL_THREADS` allows.

    The order of the results matches the order of the items, so pipelines stay
    deterministic regardless of the worker count.

    Args:
        func (Callable): The function to apply.
        items (Sequence): The inputs, one call each.

    Returns:
        list: The results in input order.
    """
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]

    logging.debug("Running %s jobs on %s worker threads", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
