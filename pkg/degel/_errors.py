# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Exceptions raised by the degel library"""


class DegelError(Exception):
    """Base class of all errors raised on purpose by degel"""


class ParameterError(DegelError, ValueError):
    """An argument or precondition is out of its admissible range"""


class StencilError(ParameterError):
    """A finite-difference stencil was requested at a non-interior node"""


class GridMismatchError(ParameterError):
    """Two fields that shall be combined do not live on the identical grid"""


class DegenerateGradientError(ParameterError):
    """An operator needs a gradient direction, but the gradient vanishes"""


class NumericError(DegelError, ArithmeticError):
    """A computation overflowed or produced non-finite values"""


class BlowUpError(NumericError):
    """The pseudo-time iteration diverged"""


class CriticalZoneSignal(DegelError):
    """The gradient vanishes, so the point belongs to every critical zone"""


class ConfigError(DegelError):
    """An experiment configuration could not be parsed or validated"""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        location = []
        if line is not None:
            location.append(f"line {line}")
        if key is not None:
            location.append(f"key '{key}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
