# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Tests for the barrier constants, the barriers and the exact example"""

import numpy as np
import pytest

from degel._barriers import (
    barrier_constants,
    barrier_defect,
    barrier_inputs,
    exact_example_solution,
    exact_example_source,
    g_function,
    smallest_root,
    theta_barrier,
    xi_barrier,
)
from degel._discretization import jet_at
from degel._errors import ParameterError
from degel._grid import ScalarField, make_grid
from degel._operators import EllipticityPair, pucci_plus

# p=2, q=3, lam=Lam=L1=1, N=2, |a|=1, diam=2, m=1
REFERENCE = dict(p=2.0, q=3.0, lam=1.0, Lam=1.0, L1=1.0, N=2, diam=2.0, norm_a=1.0, m_inf=1.0)


def test_inputs_closed_form():
    bc = barrier_inputs(**REFERENCE)
    assert bc.Xi2 == pytest.approx(4.0 / 3.0)
    assert bc.Xi3 == pytest.approx((4.0 / 3.0) ** 4)
    assert bc.gamma == pytest.approx(4.0 / 3.0)


def test_g_function_values():
    bc = barrier_inputs(**REFERENCE)
    assert g_function(0.0, bc) == pytest.approx(-1.0)
    assert abs(g_function(0.565, bc)) < 5e-3
    assert g_function(10.0, bc) > 1e4
    with pytest.raises(ParameterError):
        g_function(-1.0, bc)


def test_smallest_root_reference():
    bc = barrier_constants(**REFERENCE)
    assert bc.T0 == pytest.approx(0.565, abs=1e-3)
    assert abs(g_function(bc.T0, bc)) <= 1e-12
    assert bc.c == pytest.approx(0.9 * bc.T0)
    samples = np.linspace(0.0, bc.T0, 200, endpoint=False)
    assert all(g_function(t, bc) < 0 for t in samples)


def test_smallest_root_pure_power():
    plain = dict(REFERENCE, norm_a=0.0)
    bc = barrier_constants(**plain)
    assert bc.T0 == pytest.approx(0.31640625 ** (1.0 / 3.0), rel=1e-10)
    assert bc.T0 == pytest.approx(0.6814, abs=1e-4)
    doubled = barrier_constants(**dict(plain, m_inf=8.0))
    assert doubled.T0 == pytest.approx(2.0 * bc.T0, rel=1e-10)


@pytest.mark.parametrize("m_inf", [0.0, -1.0])
def test_smallest_root_requires_positive_m(m_inf):
    with pytest.raises(ParameterError, match="m_inf > 0"):
        barrier_constants(**dict(REFERENCE, m_inf=m_inf))


def test_inputs_validation():
    with pytest.raises(ParameterError):
        barrier_inputs(**dict(REFERENCE, q=1.0))
    with pytest.raises(ParameterError):
        barrier_inputs(**dict(REFERENCE, lam=2.0))
    with pytest.raises(ParameterError):
        smallest_root(barrier_inputs(**REFERENCE), c_fraction=1.0)


def test_with_c_range():
    bc = barrier_constants(**REFERENCE)
    assert bc.with_c(0.5 * bc.T0).c == pytest.approx(0.5 * bc.T0)
    with pytest.raises(ParameterError):
        bc.with_c(bc.T0)


@pytest.mark.parametrize("fraction", [0.1, 0.5, 0.9, 0.999])
def test_barrier_defect_below_m(fraction):
    bc = barrier_constants(**REFERENCE)
    bc = bc.with_c(fraction * bc.T0)
    radii = np.linspace(1e-3, bc.diam / 2.0, 500)
    assert np.max(barrier_defect(bc, radii)) < bc.m_inf


def test_barrier_defect_reaches_bound_at_the_rim():
    bc = barrier_constants(**REFERENCE)
    at_rim = float(barrier_defect(bc, [bc.diam / 2.0])[0])
    assert at_rim == pytest.approx(bc.Xi2 * bc.Xi1, rel=1e-12)


def test_theta_barrier():
    assert theta_barrier((0.0, 0.0), 1.0, 2.0) == 0.0
    assert theta_barrier((0.5, 0.0), 1.0, 2.0) == pytest.approx(0.5 ** (4.0 / 3.0))
    r = np.linspace(0.0, 1.0, 50)
    values = theta_barrier(np.stack([r, 0.0 * r], axis=-1), 0.7, 2.0)
    assert np.all(np.diff(values) > 0)
    with pytest.raises(ParameterError):
        theta_barrier((0.5, 0.0), 0.0, 2.0)


def test_theta_barrier_pucci_bound_on_grid():
    c, p = 0.5, 2.0
    e = EllipticityPair(1.0, 1.0)
    grid = make_grid(129)
    theta = ScalarField.from_function(
        grid, lambda x1, x2: theta_barrier(np.stack([x1, x2], axis=-1), c, p)
    )
    jet = jet_at(theta, grid.nearest_node((0.5, 0.0)))
    bound = c * (4.0 / 3.0) * (e.lam / 3.0 + e.Lam) * 0.5 ** (-2.0 / 3.0)
    assert float(pucci_plus(jet.hess, e)) <= bound * (1.0 + 1e-3)


def test_xi_barrier():
    assert xi_barrier((0.0, 0.0), 1.0, 2.0, 1.0) == 0.0
    assert xi_barrier((0.5, 0.0), 1.0, 2.0, 1.0) == pytest.approx(0.25)
    near_theta = xi_barrier((0.5, 0.0), 1.0, 2.0, 1e-9)
    assert near_theta == pytest.approx(theta_barrier((0.5, 0.0), 1.0, 2.0), rel=1e-6)
    with pytest.raises(ParameterError, match="mu < p\\+1"):
        xi_barrier((0.5, 0.0), 1.0, 2.0, 3.0)


def test_exact_example_source_values():
    value = exact_example_source(0.5, 0.0, 2.0, 3.0, 2, lambda x1, x2: np.hypot(x1, x2))
    assert value == pytest.approx(4.8328, abs=1e-3)
    flat = exact_example_source(0.3, 0.1, 2.0, 3.0, 2, lambda x1, x2: 0.0 * x1)
    assert flat == pytest.approx((4.0 / 3.0) ** 3 * (1.0 / 3.0 + 1.0))


def test_exact_example_satisfies_its_equation():
    # (|Dv|^p + a |Dv|^q) trace(D^2 v) computed by hand for v = |x|^gamma
    p, q, gamma = 2.0, 3.0, 4.0 / 3.0
    r = np.linspace(0.05, 1.0, 40)
    slope = gamma * r ** (gamma - 1.0)
    laplacian = gamma * (gamma - 1.0) * r ** (gamma - 2.0) + gamma * r ** (gamma - 2.0)
    lhs = (slope**p + r * slope**q) * laplacian
    rhs = exact_example_source(r, 0.0 * r, p, q, 2, lambda x1, x2: np.hypot(x1, x2))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12)
    assert exact_example_solution(0.5, 0.0, p) == pytest.approx(0.5**gamma)
