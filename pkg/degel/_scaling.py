# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Smallness-regime normalization, rescaled problems and dyadic iteration quantities"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from ._degeneracy import DegeneracyLaw, RescaledModulation
from ._errors import CriticalZoneSignal, NumericError, ParameterError
from ._grid import Point, ScalarField
from ._operators import ModulusDescriptor, Rescaled
from ._solver import ProblemSpec, RescaledSource

OVERFLOW_LIMIT = 1e300


def admissible_rho(alpha_F: float, beta: float, C: float = 1.0) -> float:
    """Largest admissible contraction radius min{1/2, (3 / (4 C))^{1 / (alpha_F - beta)}}"""
    if beta >= alpha_F:
        raise ParameterError(f"beta must be below alpha_F, got beta={beta}, alpha_F={alpha_F}")
    if C <= 0:
        raise ParameterError(f"approximation constant must be positive, got {C}")
    return min(0.5, (3.0 / (4.0 * C)) ** (1.0 / (alpha_F - beta)))


def sharp_exponent(p: float) -> float:
    """The optimal Hoelder exponent 1 / (p + 1) of the gradient"""
    return 1.0 / (p + 1.0)


@dataclass(frozen=True)
class ScalingParams:
    """
    Parameters of the geometric iteration.

    Construction checks that beta lies in (0, alpha_F) and (0, 1/(p+1)], that
    rho does not exceed `admissible_rho` and that iota <= rho^{1+beta} / 8.
    """

    kappa: float
    tau: float
    delta: float
    iota: float
    rho: float
    beta: float
    alpha_F: float
    x0: Point = (0.0, 0.0)
    p: float = 0.0
    C: float = 1.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ParameterError(f"kappa must be positive, got {self.kappa}")
        if not 0 < self.tau < 1:
            raise ParameterError(f"tau must lie in (0, 1), got {self.tau}")
        if not 0 < self.delta < 1:
            raise ParameterError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0 < self.alpha_F <= 1:
            raise ParameterError(f"alpha_F must lie in (0, 1], got {self.alpha_F}")
        if not 0 < self.beta < self.alpha_F:
            raise ParameterError(
                f"beta must lie in (0, alpha_F) = (0, {self.alpha_F}), got {self.beta}"
            )
        if self.beta > sharp_exponent(self.p) + 1e-15:
            raise ParameterError(
                f"beta must not exceed 1/(p+1) = {sharp_exponent(self.p)}, got {self.beta}"
            )
        limit = admissible_rho(self.alpha_F, self.beta, self.C)
        if not 0 < self.rho <= limit:
            raise ParameterError(f"rho must lie in (0, {limit}], got {self.rho}")
        if not 0 < self.iota <= self.rho ** (1.0 + self.beta) / 8.0:
            raise ParameterError(
                f"iota must lie in (0, rho^(1+beta)/8 = {self.rho ** (1.0 + self.beta) / 8.0}], "
                f"got {self.iota}"
            )


def compute_kappa_tau(
    norm_u: float,
    norm_f: float,
    delta: float,
    p: float,
    dist: float,
    omega: ModulusDescriptor,
    C_F: float,
) -> tuple[float, float]:
    """
    Normalizing constants of the smallness regime.

    kappa = |u|_inf + 1 + |f|_inf^{1/(p+1)} / delta and
    tau = min{1/2, dist/4, (delta / (|f|_inf + 1))^{1/(p+2)}, omega^{-1}(delta / (C_F + 1))}.

    Args:
        norm_u (float): Sup norm of the solution.
        norm_f (float): Sup norm of the source.
        delta (float): Smallness target in (0, 1).
        p (float): Degeneracy exponent.
        dist (float): Distance of the centre to the boundary.
        omega (ModulusDescriptor): Modulus of the coefficient oscillation.
        C_F (float): Constant of the coefficient oscillation.

    Returns:
        tuple[float, float]: (kappa, tau)

    Raises:
        ParameterError: If an input is out of range or omega cannot be inverted.
    """
    if norm_u < 0 or norm_f < 0 or dist <= 0 or p < 0 or C_F < 0:
        raise ParameterError("norms, p and C_F must be nonnegative and dist positive")
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    kappa = norm_u + 1.0 + norm_f ** (1.0 / (p + 1.0)) / delta
    tau = min(
        0.5,
        dist / 4.0,
        (delta / (norm_f + 1.0)) ** (1.0 / (p + 2.0)),
        omega.inverse(delta / (C_F + 1.0)),
    )
    logging.debug("Smallness regime: kappa=%s, tau=%s", kappa, tau)
    return kappa, tau


def _rescaled_weight(weight, kappa: float, tau: float, x0: Point):
    if weight is None:
        return None

    def rescaled(x1, x2, s):
        return weight(x0[0] + tau * np.asarray(x1), x0[1] + tau * np.asarray(x2), kappa * s / tau)

    return rescaled


def _rescaled_function(func, kappa: float, tau: float, x0: Point):
    def rescaled(x1, x2):
        return np.asarray(func(x0[0] + tau * np.asarray(x1), x0[1] + tau * np.asarray(x2))) / kappa

    return rescaled


def rescale_problem(problem: ProblemSpec, kappa: float, tau: float, x0: Point) -> ProblemSpec:
    """
    The problem solved by v(x) = u(x0 + tau x) / kappa.

    The operator becomes (tau^2 / kappa) F(x0 + tau x, (kappa / tau^2) X), the
    modulating function (tau / kappa)^{p-q} a(x0 + tau x), the source
    (tau^{p+2} / kappa^{p+1}) f(x0 + tau x, kappa u), and boundary data and
    obstacle are rescaled like u.

    Raises:
        ParameterError: If B_tau(x0) leaves the unit ball, or the boundary data
        are a sampled field that cannot be re-evaluated.
    """
    if kappa <= 0 or tau <= 0:
        raise ParameterError(f"kappa and tau must be positive, got {kappa}, {tau}")
    if math.hypot(x0[0], x0[1]) + tau > 1.0 + 1e-12:
        raise ParameterError(f"B_tau(x0) with tau={tau}, x0={x0} leaves the unit ball")
    if isinstance(problem.boundary, ScalarField):
        raise ParameterError("sampled boundary fields cannot be rescaled, pass a callable")

    x0 = (float(x0[0]), float(x0[1]))
    degeneracy: DegeneracyLaw | None = None
    if problem.degeneracy is not None:
        law = problem.degeneracy
        degeneracy = replace(
            law,
            a=RescaledModulation(inner=law.a, kappa=kappa, tau=tau, x0=x0, p=law.p, q=law.q),
            weight=_rescaled_weight(law.weight, kappa, tau, x0),
        )
    p = problem.p
    factor = tau ** (p + 2.0) / kappa ** (p + 1.0)
    return ProblemSpec(
        operator=Rescaled(kappa=kappa, tau=tau, x0=x0, inner=problem.operator),
        degeneracy=degeneracy,
        source=RescaledSource(inner=problem.source, factor=factor, kappa=kappa, tau=tau, x0=x0),
        boundary=_rescaled_function(problem.boundary, kappa, tau, x0),
        obstacle=(
            None
            if problem.obstacle is None
            else _rescaled_function(problem.obstacle, kappa, tau, x0)
        ),
    )


@dataclass(frozen=True)
class DyadicState:
    """Quantities of step k of the geometric iteration"""

    k: int
    A_k: float
    M0: float


def _check_dyadic(k: int, rho: float, beta: float) -> None:
    if k < 1:
        raise ParameterError(f"k must be at least 1, got {k}")
    if not 0 < rho <= 0.5:
        raise ParameterError(f"rho must lie in (0, 1/2], got {rho}")
    if not 0 < beta < 1:
        raise ParameterError(f"beta must lie in (0, 1), got {beta}")


def dyadic_A(k: int, rho: float, beta: float, grad0: float) -> float:
    """rho^{k(1+beta)} + grad0 * sum_{j<k} rho^{k + j beta}, summed in closed form"""
    _check_dyadic(k, rho, beta)
    geometric = (1.0 - rho ** (k * beta)) / (1.0 - rho**beta)
    return rho ** (k * (1.0 + beta)) + grad0 * rho**k * geometric


def dyadic_A_sum(k: int, rho: float, beta: float, grad0: float) -> float:
    """The same quantity as `dyadic_A`, summed term by term"""
    _check_dyadic(k, rho, beta)
    return rho ** (k * (1.0 + beta)) + grad0 * math.fsum(rho ** (k + j * beta) for j in range(k))


def M0(rho: float, beta: float) -> float:
    """
    1 / (rho^{1+beta} (1 - rho^beta)).

    Raises:
        ParameterError: If rho or beta leave their ranges.
        NumericError: If the value exceeds 1e300.
    """
    if not 0 < rho < 1:
        raise ParameterError(f"rho must lie in (0, 1), got {rho}")
    if not 0 < beta <= 1:
        raise ParameterError(f"beta must lie in (0, 1], got {beta}")
    denominator = rho ** (1.0 + beta) * (1.0 - rho**beta)
    if denominator <= 1.0 / OVERFLOW_LIMIT:
        raise NumericError(f"M0 overflows for rho={rho}, beta={beta}")
    return 1.0 / denominator


def dyadic_states(kmax: int, rho: float, beta: float, grad0: float) -> list[DyadicState]:
    """States k = 1..kmax of the geometric iteration"""
    m0 = M0(rho, beta)
    return [DyadicState(k, dyadic_A(k, rho, beta, grad0), m0) for k in range(1, kmax + 1)]


def critical_radius_r0(grad0: float, beta: float) -> float:
    """
    r0 = grad0^{1/beta}, the radius below which a point leaves the critical zone.

    Raises:
        CriticalZoneSignal: If grad0 = 0, the point lies in every critical zone.
        ParameterError: If grad0 < 0 or beta <= 0.
    """
    if beta <= 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    if grad0 < 0:
        raise ParameterError(f"gradient magnitude must be nonnegative, got {grad0}")
    if grad0 == 0:
        raise CriticalZoneSignal("vanishing gradient, the point belongs to every critical zone")
    return grad0 ** (1.0 / beta)
