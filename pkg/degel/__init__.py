# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Global Init file"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("degel")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.0.0"
