# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Non-homogeneous gradient degeneracy H(x, xi) bracketed by s^p + a(x) s^q"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from ._errors import ParameterError
from ._helpers import read_text_lines


class Modulation:
    """Nonnegative modulating function a(x), evaluated on coordinate arrays"""

    def __call__(self, x1, x2) -> np.ndarray:
        raise NotImplementedError

    def sup_norm(self, radius: float = 1.0) -> float:
        """Estimate of sup |a| over the ball of the given radius around the origin"""
        axis = np.linspace(-radius, radius, 201)
        x1, x2 = np.meshgrid(axis, axis, indexing="ij")
        inside = np.hypot(x1, x2) <= radius
        return float(np.max(self(x1[inside], x2[inside])))


@dataclass(frozen=True)
class ConstantModulation(Modulation):
    """a(x) = value"""

    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ParameterError(f"modulating function must be nonnegative, got {self.value}")

    def __call__(self, x1, x2) -> np.ndarray:
        return np.full(np.broadcast(np.asarray(x1), np.asarray(x2)).shape, float(self.value))


@dataclass(frozen=True)
class PowerModulation(Modulation):
    """a(x) = scale * |x|^alpha"""

    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if self.alpha < 0 or self.scale < 0:
            raise ParameterError(
                f"power modulation needs alpha >= 0 and scale >= 0, got {self.alpha}, {self.scale}"
            )

    def __call__(self, x1, x2) -> np.ndarray:
        return self.scale * np.hypot(x1, x2) ** self.alpha


@dataclass(frozen=True, eq=False)
class RadialTable(Modulation):
    """a(x) interpolated linearly in |x| from a table, constant beyond its ends"""

    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if radii.ndim != 1 or radii.shape != values.shape or radii.size < 2:
            raise ParameterError("radial table needs at least two (radius, value) pairs")
        if np.any(np.diff(radii) <= 0):
            raise ParameterError("radial table radii must be strictly increasing")
        if np.any(values < 0):
            raise ParameterError("radial table values must be nonnegative")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)

    def __call__(self, x1, x2) -> np.ndarray:
        return np.interp(np.hypot(x1, x2), self.radii, self.values)


@dataclass(frozen=True)
class RescaledModulation(Modulation):
    """a_{kappa,tau}(x) = (tau / kappa)^{p - q} * a(x0 + tau x)"""

    inner: Modulation
    kappa: float
    tau: float
    x0: tuple[float, float]
    p: float
    q: float

    def __call__(self, x1, x2) -> np.ndarray:
        factor = (self.tau / self.kappa) ** (self.p - self.q)
        moved1 = self.x0[0] + self.tau * np.asarray(x1)
        moved2 = self.x0[1] + self.tau * np.asarray(x2)
        return factor * self.inner(moved1, moved2)


def read_radial_table(path: str) -> RadialTable:
    """Read a radial table from `r,value` lines. Lines starting with # are skipped"""
    radii, values = [], []
    for number, line in enumerate(read_text_lines(path), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            radius, value = (float(v) for v in line.split(","))
        except ValueError as exc:
            raise ParameterError(
                f"{path}, line {number}: expected 'r,value', got '{line}'"
            ) from exc
        radii.append(radius)
        values.append(value)
    return RadialTable(np.array(radii), np.array(values))


def modulation_from_spec(spec: str) -> Modulation:
    """
    Parse `const:<v>`, `power:<alpha>` or `table:<path>`.

    Raises:
        ParameterError: If the string is malformed.
    """
    kind, _, arg = spec.partition(":")
    kind = kind.strip()
    if kind in ("const", "power"):
        try:
            value = float(arg)
        except ValueError as exc:
            raise ParameterError(f"invalid number in modulation spec '{spec}'") from exc
        return ConstantModulation(value) if kind == "const" else PowerModulation(value)
    if kind == "table" and arg.strip():
        return read_radial_table(arg.strip())
    raise ParameterError(f"unknown modulation spec '{spec}', expected const:, power: or table:")


def _split(x) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(x, dtype=float)
    return arr[..., 0], arr[..., 1]


@dataclass(frozen=True, eq=False)
class DegeneracyLaw:
    """
    Degeneracy law H with L1 * K <= H <= L2 * K, where K(x, s) = s^p + a(x) s^q.

    H(x, s) is `weight(x1, x2, s) * K(x, s)` if a weight is given, else L1 * K.
    `eps_reg` floors the gradient magnitude in the regularized evaluations.
    """

    p: float
    q: float
    a: Modulation
    L1: float = 1.0
    L2: float = 1.0
    eps_reg: float = 0.0
    weight: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if not 0 < self.p <= self.q < np.inf:
            raise ParameterError(f"exponents need 0 < p <= q < inf, got p={self.p}, q={self.q}")
        if not 0 < self.L1 <= self.L2:
            raise ParameterError(f"bounds need 0 < L1 <= L2, got L1={self.L1}, L2={self.L2}")
        if self.eps_reg < 0:
            raise ParameterError(f"eps_reg must be nonnegative, got {self.eps_reg}")
        axis = np.linspace(-1.0, 1.0, 21)
        x1, x2 = np.meshgrid(axis, axis, indexing="ij")
        if np.any(np.asarray(self.a(x1, x2)) < 0):
            raise ParameterError("modulating function takes negative values")

    def with_eps(self, eps_reg: float) -> "DegeneracyLaw":
        """Copy with another gradient floor"""
        return DegeneracyLaw(self.p, self.q, self.a, self.L1, self.L2, eps_reg, self.weight)

    def K(self, x, s):
        """
        s^p + a(x) s^q.

        Raises:
            ParameterError: If s < 0 somewhere.
        """
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise ParameterError("gradient magnitude must be nonnegative")
        x1, x2 = _split(x)
        return s**self.p + self.a(x1, x2) * s**self.q

    def K_regularized(self, x, s):
        """K(x, max(s, eps_reg))"""
        return self.K(x, np.maximum(np.asarray(s, dtype=float), self.eps_reg))

    def H(self, x, s, regularized: bool = False):
        """The gradient factor at magnitude s"""
        s = np.asarray(s, dtype=float)
        if regularized:
            s = np.maximum(s, self.eps_reg)
        k = self.K(x, s)
        if self.weight is None:
            return self.L1 * k
        x1, x2 = _split(x)
        return self.weight(x1, x2, s) * k

    def check_bracket(self, x, s) -> None:
        """
        Verify L1 * K <= H <= L2 * K on the given samples.

        Raises:
            ParameterError: On the first violated sample.
        """
        k = np.asarray(self.K(x, s))
        h = np.asarray(self.H(x, s))
        tol = 1e-12 * np.maximum(k, 1.0)
        bad = (h < self.L1 * k - tol) | (h > self.L2 * k + tol)
        if np.any(bad):
            raise ParameterError(
                f"degeneracy law leaves its bracket [L1, L2] = [{self.L1}, {self.L2}] "
                f"at {int(np.count_nonzero(bad))} samples"
            )


def K(law: DegeneracyLaw, x, s):
    """s^p + a(x) s^q"""
    return law.K(x, s)


def K_regularized(law: DegeneracyLaw, x, s):
    """K with the gradient floored at eps_reg"""
    return law.K_regularized(x, s)


def multi_phase_K(laws: Sequence[DegeneracyLaw], x, s):
    """
    s^p + sum_i a_i(x) s^{q_i} for laws sharing p with q_1 <= ... <= q_N.

    Raises:
        ParameterError: If the list is empty, the p differ or the q are disordered.
    """
    if not laws:
        raise ParameterError("multi-phase degeneracy needs at least one phase")
    p = laws[0].p
    if any(law.p != p for law in laws):
        raise ParameterError("all phases must share the exponent p")
    exponents = [law.q for law in laws]
    if any(later < earlier for earlier, later in zip(exponents, exponents[1:])):
        raise ParameterError(f"phase exponents must be ordered, got {exponents}")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ParameterError("gradient magnitude must be nonnegative")
    x1, x2 = _split(x)
    total = s**p
    for law in laws:
        total = total + law.a(x1, x2) * s**law.q
    return total
