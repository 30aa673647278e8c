# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Tests for the smallness regime, rescaling and the dyadic quantities"""

import math

import numpy as np
import pytest

from degel._degeneracy import DegeneracyLaw, PowerModulation
from degel._errors import CriticalZoneSignal, NumericError, ParameterError
from degel._grid import ScalarField
from degel._operators import (
    EllipticityPair,
    LinearTrace,
    ModulusDescriptor,
    ModulusKind,
    PucciPlus,
    SymMat2,
    random_symmetric,
)
from degel._scaling import (
    M0,
    ScalingParams,
    admissible_rho,
    compute_kappa_tau,
    critical_radius_r0,
    dyadic_A,
    dyadic_A_sum,
    dyadic_states,
    rescale_problem,
)
from degel._solver import BoundedSource, ConstantSource, ProblemSpec, problem_defect

LINEAR = ModulusDescriptor(ModulusKind.LINEAR)


def test_kappa_tau_plug_in():
    kappa, tau = compute_kappa_tau(1.0, 1.0, 0.1, 2.0, 2.0, LINEAR, 0.0)
    assert kappa == pytest.approx(12.0)
    assert tau == pytest.approx(0.1)
    kappa, _ = compute_kappa_tau(3.0, 0.0, 0.1, 2.0, 2.0, LINEAR, 0.0)
    assert kappa == pytest.approx(4.0)


def test_kappa_tau_other_limits():
    power = ModulusDescriptor(ModulusKind.POWER, alpha=0.5)
    _, tau = compute_kappa_tau(1.0, 1.0, 0.5, 2.0, 0.4, power, 0.0)
    assert tau == pytest.approx(0.1)
    _, tau = compute_kappa_tau(1.0, 1.0, 0.1, 2.0, 4.0, power, 0.0)
    assert tau == pytest.approx(0.01)


def test_kappa_tau_rejects_generic_modulus_and_bad_delta():
    generic = ModulusDescriptor(ModulusKind.GENERIC, func=math.sqrt)
    with pytest.raises(ParameterError):
        compute_kappa_tau(1.0, 1.0, 0.1, 2.0, 2.0, generic, 0.0)
    with pytest.raises(ParameterError):
        compute_kappa_tau(1.0, 1.0, 1.0, 2.0, 2.0, LINEAR, 0.0)


def test_scaling_params_gate():
    valid = dict(kappa=12.0, tau=0.1, delta=0.1, iota=0.01, rho=0.5, alpha_F=1.0, p=2.0)
    ScalingParams(beta=1.0 / 3.0, **valid)
    with pytest.raises(ParameterError, match="1/\\(p\\+1\\)"):
        ScalingParams(beta=0.4, **valid)
    with pytest.raises(ParameterError):
        ScalingParams(beta=0.3, **dict(valid, alpha_F=0.3))
    with pytest.raises(ParameterError):
        ScalingParams(beta=0.3, **dict(valid, rho=0.6))
    with pytest.raises(ParameterError):
        ScalingParams(beta=0.3, **dict(valid, iota=0.1))


def test_admissible_rho():
    assert admissible_rho(1.0, 1.0 / 3.0) == 0.5
    assert admissible_rho(1.0, 0.5, C=10.0) == pytest.approx(0.075**2)
    with pytest.raises(ParameterError):
        admissible_rho(0.3, 0.3)


def test_dyadic_values():
    assert dyadic_A(2, 0.5, 1.0 / 3.0, 0.0) == pytest.approx(2.0 ** (-8.0 / 3.0))
    assert dyadic_A(1, 0.5, 1.0 / 3.0, 1.0) == pytest.approx(0.896850, abs=1e-6)
    assert dyadic_A(1, 0.25, 0.5, 0.0) == pytest.approx(0.25**1.5)


@pytest.mark.parametrize("grad0", [0.0, 0.3, 2.0])
def test_dyadic_closed_form_matches_sum(grad0):
    for k in range(1, 31):
        closed = dyadic_A(k, 0.5, 1.0 / 3.0, grad0)
        summed = dyadic_A_sum(k, 0.5, 1.0 / 3.0, grad0)
        assert abs(closed - summed) <= 1e-14


def test_dyadic_states():
    states = dyadic_states(4, 0.5, 1.0 / 3.0, 0.2)
    assert [s.k for s in states] == [1, 2, 3, 4]
    assert all(s.M0 == pytest.approx(M0(0.5, 1.0 / 3.0)) for s in states)
    assert all(later.A_k < earlier.A_k for earlier, later in zip(states, states[1:]))
    with pytest.raises(ParameterError):
        dyadic_A(0, 0.5, 0.3, 0.0)


def test_M0():
    assert M0(0.5, 1.0 / 3.0) == pytest.approx(12.214, abs=1e-3)
    assert M0(0.5, 1.0) == pytest.approx(8.0)
    with pytest.raises(NumericError):
        M0(1e-250, 0.5)
    with pytest.raises(ParameterError):
        M0(1.0, 0.5)


def test_critical_radius():
    assert critical_radius_r0(1.0, 0.25) == 1.0
    assert critical_radius_r0(0.5, 1.0 / 3.0) == pytest.approx(0.125)
    r = 0.3
    assert critical_radius_r0(r**0.25, 0.25) == pytest.approx(r)
    with pytest.raises(CriticalZoneSignal):
        critical_radius_r0(0.0, 0.25)
    with pytest.raises(ParameterError):
        critical_radius_r0(-1.0, 0.25)


def degenerate_problem(operator, source):
    """p = 2, q = 3 with a(x) = |x|"""
    return ProblemSpec(
        operator=operator,
        degeneracy=DegeneracyLaw(2.0, 3.0, PowerModulation(1.0)),
        source=source,
        boundary=lambda x1, x2: x1**2 + 0.0 * x2,
    )


def test_rescaled_constant_source():
    problem = degenerate_problem(LinearTrace(), ConstantSource(1.0))
    rescaled = rescale_problem(problem, 12.0, 0.1, (0.0, 0.0))
    value = rescaled.source.evaluate(np.array([0.2]), np.array([0.1]), np.array([0.5]))
    assert value[0] == pytest.approx(1e-4 / 1728.0, rel=1e-12)
    X = SymMat2(0.3, 0.2, -0.4)
    assert float(rescaled.operator.evaluate((0.1, 0.1), (1.0, 0.0), X)) == pytest.approx(-0.1)


def test_identity_rescaling(rng):
    problem = degenerate_problem(LinearTrace(), ConstantSource(1.0))
    rescaled = rescale_problem(problem, 1.0, 1.0, (0.0, 0.0))
    x = rng.uniform(-0.5, 0.5, (20, 2))
    xi = rng.standard_normal((20, 2))
    X = random_symmetric(rng, 20)
    s = rng.uniform(-1.0, 1.0, 20)
    np.testing.assert_allclose(
        problem_defect(rescaled, x, xi, X, s), problem_defect(problem, x, xi, X, s), rtol=1e-12
    )


def test_rescaling_consistency(rng):
    def source(x1, x2, u):
        return 1.0 + x1 * x2 + np.sin(u)

    problem = degenerate_problem(
        PucciPlus(ellipticity=EllipticityPair(1.0, 2.0)), BoundedSource(source)
    )
    kappa, tau, x0 = 12.0, 0.1, (0.2, -0.3)
    rescaled = rescale_problem(problem, kappa, tau, x0)
    x = rng.uniform(-1.0, 1.0, (50, 2))
    xi = rng.standard_normal((50, 2))
    X = random_symmetric(rng, 50)
    s = rng.uniform(-0.2, 0.2, 50)
    factor = tau**4 / kappa**3
    expected = factor * problem_defect(
        problem,
        np.asarray(x0) + tau * x,
        (kappa / tau) * xi,
        X.scaled(kappa / tau**2),
        kappa * s,
    )
    actual = problem_defect(rescaled, x, xi, X, s)
    np.testing.assert_allclose(actual, expected, rtol=1e-10, atol=1e-9)


def test_rescaled_boundary_data():
    problem = degenerate_problem(LinearTrace(), ConstantSource(0.0))
    rescaled = rescale_problem(problem, 2.0, 0.5, (0.2, 0.0))
    assert float(rescaled.boundary(np.array(0.4), np.array(0.0))) == pytest.approx(0.16 / 2.0)


def test_rescale_rejects_bad_arguments(small_grid):
    problem = degenerate_problem(LinearTrace(), ConstantSource(0.0))
    with pytest.raises(ParameterError):
        rescale_problem(problem, 1.0, 0.5, (0.7, 0.0))
    with pytest.raises(ParameterError):
        rescale_problem(problem, 0.0, 0.5, (0.0, 0.0))
    sampled = ProblemSpec(
        LinearTrace(), None, ConstantSource(0.0), ScalarField.constant(small_grid, 0.0)
    )
    with pytest.raises(ParameterError):
        rescale_problem(sampled, 1.0, 0.5, (0.0, 0.0))
