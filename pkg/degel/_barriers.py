# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Radial barriers, the exact sharp example and the constants of the non-degeneracy argument"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import bisect

from ._errors import NumericError, ParameterError

ROOT_TOL = 1e-12
DEFAULT_C_FRACTION = 0.9
_MAX_DOUBLINGS = 1000


def _radius(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    return np.hypot(arr[..., 0], arr[..., 1])


@dataclass(frozen=True)
class BarrierConstants:
    """
    Constants of the non-degeneracy barrier c |x|^{(p+2)/(p+1)}.

    Xi2 = L1 (lam / (p+1) + (N-1) Lam) and
    Xi3 = |a|_inf gamma^{q+1} (diam / 2)^{(q-p)/(p+1)} with gamma = (p+2)/(p+1)
    depend on the inputs only, Xi1 is the bracket c^{p+1} (gamma^{p+1} + Xi3 c^{q-p})
    at the chosen c. T0 is the smallest positive root of
    g(t) = Xi2 t^{p+1} (gamma^{p+1} + Xi3 t^{q-p}) - m_inf.
    """

    p: float
    q: float
    lam: float
    Lam: float
    L1: float
    N: int
    diam: float
    norm_a: float
    m_inf: float
    Xi2: float
    Xi3: float
    T0: float = math.nan
    c: float = math.nan

    @property
    def gamma(self) -> float:
        """Growth exponent (p+2)/(p+1)"""
        return (self.p + 2.0) / (self.p + 1.0)

    @property
    def Xi1(self) -> float:
        """The gradient bracket at the chosen constant c"""
        return _bracket(self.c, self.p, self.q, self.gamma, self.Xi3)

    def with_c(self, c: float) -> "BarrierConstants":
        """
        Copy with another barrier constant.

        Raises:
            ParameterError: If c does not lie in (0, T0).
        """
        if not 0 < c < self.T0:
            raise ParameterError(f"barrier constant must lie in (0, T0) = (0, {self.T0}), got {c}")
        return replace(self, c=float(c))


def _bracket(t: float, p: float, q: float, gamma: float, Xi3: float) -> float:
    return t ** (p + 1.0) * (gamma ** (p + 1.0) + Xi3 * t ** (q - p))


def barrier_inputs(
    p: float,
    q: float,
    lam: float,
    Lam: float,
    L1: float,
    N: int,
    diam: float,
    norm_a: float,
    m_inf: float,
) -> BarrierConstants:
    """
    Validate the inputs and compute Xi2 and Xi3; T0 and c are left undefined.

    Raises:
        ParameterError: If an input leaves its range. m_inf <= 0 is accepted
        here and rejected by `smallest_root`.
    """
    if not 0 < p <= q:
        raise ParameterError(f"exponents need 0 < p <= q, got p={p}, q={q}")
    if not 0 < lam <= Lam:
        raise ParameterError(f"ellipticity needs 0 < lambda <= Lambda, got {lam}, {Lam}")
    if L1 <= 0 or diam <= 0 or norm_a < 0:
        raise ParameterError("L1 and diam must be positive and |a|_inf nonnegative")
    if int(N) != N or N < 1:
        raise ParameterError(f"dimension must be a positive integer, got {N}")
    gamma = (p + 2.0) / (p + 1.0)
    Xi2 = L1 * (lam / (p + 1.0) + (N - 1) * Lam)
    Xi3 = norm_a * gamma ** (q + 1.0) * (diam / 2.0) ** ((q - p) / (p + 1.0))
    return BarrierConstants(p, q, lam, Lam, L1, int(N), diam, norm_a, m_inf, Xi2, Xi3)


def g_function(t: float, bc: BarrierConstants) -> float:
    """Xi2 t^{p+1} (gamma^{p+1} + Xi3 t^{q-p}) - m_inf"""
    if t < 0:
        raise ParameterError(f"t must be nonnegative, got {t}")
    return bc.Xi2 * _bracket(t, bc.p, bc.q, bc.gamma, bc.Xi3) - bc.m_inf


def smallest_root(bc: BarrierConstants, c_fraction: float = DEFAULT_C_FRACTION) -> BarrierConstants:
    """
    Locate T0, the smallest positive root of g, and set c = c_fraction * T0.

    An upper bracket is found by doubling from t = 1, then the root is refined by
    bisection until |g(T0)| <= 1e-12.

    Raises:
        ParameterError: If m_inf <= 0 or c_fraction is not in (0, 1).
        NumericError: If no sign change is found before overflow.
    """
    if bc.m_inf <= 0:
        raise ParameterError(f"m_inf > 0 required for the barrier root, got m_inf={bc.m_inf}")
    if not 0 < c_fraction < 1:
        raise ParameterError(f"c_fraction must lie in (0, 1), got {c_fraction}")

    def g(t: float) -> float:
        return g_function(t, bc)

    high = 1.0
    for _ in range(_MAX_DOUBLINGS):
        if g(high) > 0:
            break
        high *= 2.0
    else:
        raise NumericError("no sign change of g found while doubling the bracket")

    root = float(bisect(g, 0.0, high, xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=2000))
    residual = abs(g(root))
    if residual > ROOT_TOL * max(1.0, bc.m_inf):
        raise NumericError(f"bisection stalled with |g(T0)| = {residual}")
    logging.debug("Barrier root T0=%s with |g(T0)|=%.2e", root, residual)
    return replace(bc, T0=root, c=c_fraction * root)


def barrier_constants(
    p: float,
    q: float,
    lam: float,
    Lam: float,
    L1: float,
    N: int,
    diam: float,
    norm_a: float,
    m_inf: float,
    c_fraction: float = DEFAULT_C_FRACTION,
) -> BarrierConstants:
    """`barrier_inputs` followed by `smallest_root`"""
    return smallest_root(barrier_inputs(p, q, lam, Lam, L1, N, diam, norm_a, m_inf), c_fraction)


def theta_barrier(x, c: float, p: float):
    """c |x|^{(p+2)/(p+1)} for points of shape (..., 2)"""
    if c <= 0:
        raise ParameterError(f"barrier constant must be positive, got {c}")
    return c * _radius(x) ** ((p + 2.0) / (p + 1.0))


def xi_barrier(x, C: float, p: float, mu: float):
    """C |x|^{(p+2)/(p+1-mu)} for points of shape (..., 2), the dead-core barrier"""
    if not 0 < mu < p + 1.0:
        raise ParameterError(f"mu < p+1 required, got mu={mu} with p={p}")
    if C <= 0:
        raise ParameterError(f"barrier constant must be positive, got {C}")
    return C * _radius(x) ** ((p + 2.0) / (p + 1.0 - mu))


def barrier_defect(bc: BarrierConstants, radii) -> np.ndarray:
    """
    L1 K(|D Theta|) M+(D^2 Theta) at the given radii for Theta = c |x|^gamma.

    K takes |a|_inf as the modulating value. D^2 Theta has the eigenvalue
    c gamma r^{-p/(p+1)} / (p+1) along x and c gamma r^{-p/(p+1)} across it,
    both positive, so M+ weighs all of them with Lam.
    """
    r = np.asarray(radii, dtype=float)
    if np.any(r <= 0):
        raise ParameterError("radii must be positive")
    if not bc.c > 0:
        raise ParameterError("barrier constant is undefined, call smallest_root first")
    gamma, p, q, c = bc.gamma, bc.p, bc.q, bc.c
    slope = c * gamma * r ** (1.0 / (p + 1.0))
    K = slope**p + bc.norm_a * slope**q
    curvature = c * gamma * r ** (-p / (p + 1.0))
    pucci = bc.Lam * curvature * (1.0 / (p + 1.0) + (bc.N - 1))
    return bc.L1 * K * pucci


def exact_example_solution(x1, x2, p: float) -> np.ndarray:
    """v(x) = |x|^{(p+2)/(p+1)}"""
    return np.hypot(x1, x2) ** ((p + 2.0) / (p + 1.0))


def exact_example_source(
    x1, x2, p: float, q: float, N: int, a: Callable[[np.ndarray, np.ndarray], np.ndarray]
) -> np.ndarray:
    """
    The source for which v = |x|^gamma solves (|Dv|^p + a(x) |Dv|^q) trace(D^2 v) = f.

    f(x) = (1/(p+1) + N - 1) (gamma^{p+1} + a(x) gamma^{q+1} |x|^{(q-p)/(p+1)}),
    continuous at the origin since q >= p.
    """
    if not 0 < p <= q:
        raise ParameterError(f"exponents need 0 < p <= q, got p={p}, q={q}")
    gamma = (p + 2.0) / (p + 1.0)
    r = np.hypot(x1, x2)
    modulated = np.asarray(a(x1, x2), dtype=float) * r ** ((q - p) / (p + 1.0))
    return (1.0 / (p + 1.0) + N - 1) * (gamma ** (p + 1.0) + modulated * gamma ** (q + 1.0))
