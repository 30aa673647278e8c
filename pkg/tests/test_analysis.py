# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Tests for the measurements on solution fields"""

import math

import numpy as np
import pytest

from degel._analysis import (
    approximation_distance,
    critical_zone,
    fit_exponent,
    free_boundary,
    free_boundary_node,
    gradient_growth,
    gradient_growth_profile,
    gradient_profile,
    log_spaced_radii,
    nondegeneracy_ratio,
    oscillation,
    oscillation_profile,
    positive_density,
    sup_profile,
    write_fit_csv,
)
from degel._errors import GridMismatchError, ParameterError
from degel._grid import ScalarField, make_grid

ORIGIN = (0.0, 0.0)


def sharp(x1, x2):
    """|x|^{4/3}"""
    return np.hypot(x1, x2) ** (4.0 / 3.0)


def half_space(x1, x2):
    """max(x1, 0)"""
    return np.maximum(x1, 0.0) + 0.0 * x2


def test_fit_exact_power_laws():
    radii = log_spaced_radii(0.01, 0.5)
    fit = fit_exponent([(r, r ** (4.0 / 3.0)) for r in radii])
    assert abs(fit.slope - 4.0 / 3.0) < 1e-12
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    fit = fit_exponent([(r, 3.0 * r**2) for r in reversed(radii)])
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert list(fit.radii) == sorted(fit.radii)


def test_fit_rejects_bad_samples():
    with pytest.raises(ParameterError):
        fit_exponent([(0.1, 1.0), (0.2, 2.0), (0.3, 3.0)])
    with pytest.raises(ParameterError):
        fit_exponent([(0.1, 1.0), (0.2, 0.0), (0.3, 3.0), (0.4, 4.0)])
    with pytest.raises(ParameterError):
        fit_exponent([(0.1, 1.0), (0.1, 2.0), (0.3, 3.0), (0.4, 4.0)])
    with pytest.raises(ParameterError):
        fit_exponent([(0.1, 1.0), (0.2, 2.0), (0.3, 3.0), (0.4, 4.0)], min_radius=0.2)


def test_fit_csv(tmp_path):
    fit = fit_exponent([(r, r**2) for r in (0.1, 0.2, 0.3, 0.4)])
    path = tmp_path / "fit.csv"
    write_fit_csv(fit, str(path))
    lines = path.read_text(encoding="UTF-8").splitlines()
    assert lines[0] == "r,value"
    assert len(lines) == 6
    assert lines[-1].startswith("slope=") and ",r2=" in lines[-1]


def test_log_spaced_radii():
    radii = log_spaced_radii(0.01, 1.0)
    assert len(radii) == 17
    assert radii[0] == pytest.approx(0.01) and radii[-1] == pytest.approx(1.0)
    ratios = np.diff(np.log(radii))
    np.testing.assert_allclose(ratios, ratios[0])
    assert len(log_spaced_radii(0.2, 0.25)) == 4
    with pytest.raises(ParameterError):
        log_spaced_radii(0.3, 0.2)


def test_oscillation_of_simple_fields(medium_grid):
    affine = ScalarField.from_function(medium_grid, lambda x1, x2: 0.3 + 2.0 * x1 - x2)
    assert oscillation(affine, (0.1, 0.2), 0.25) <= 1e-10
    paraboloid = ScalarField.from_function(medium_grid, lambda x1, x2: 0.5 * (x1**2 + x2**2))
    assert oscillation(paraboloid, ORIGIN, 0.25) == pytest.approx(0.03125)
    assert oscillation(paraboloid, ORIGIN, 0.25) <= oscillation(paraboloid, ORIGIN, 0.5)


def test_oscillation_preconditions(medium_grid):
    u = ScalarField.constant(medium_grid, 1.0)
    with pytest.raises(ParameterError):
        oscillation(u, ORIGIN, 0.2)
    with pytest.raises(ParameterError):
        oscillation(u, (0.95, 0.95), 0.25)


def test_oscillation_slope_of_the_sharp_profile():
    grid = make_grid(257)
    u = ScalarField.from_function(grid, sharp)
    radii = log_spaced_radii(4.0 * grid.h, 0.25)
    fit = fit_exponent(oscillation_profile(u, ORIGIN, radii), min_radius=2.0 * grid.h)
    assert fit.slope == pytest.approx(4.0 / 3.0, abs=0.02)


def test_gradient_growth(medium_grid):
    affine = ScalarField.from_function(medium_grid, lambda x1, x2: 2.0 * x1 - x2)
    assert gradient_growth(affine, ORIGIN, 0.25) <= 1e-10
    paraboloid = ScalarField.from_function(medium_grid, lambda x1, x2: 0.5 * (x1**2 + x2**2))
    assert gradient_growth(paraboloid, ORIGIN, 0.25) == pytest.approx(0.25)


def test_gradient_growth_slope_of_the_sharp_profile():
    grid = make_grid(129)
    u = ScalarField.from_function(grid, sharp)
    radii = log_spaced_radii(4.0 * grid.h, 0.25)
    fit = fit_exponent(gradient_growth_profile(u, ORIGIN, radii))
    assert fit.slope == pytest.approx(1.0 / 3.0, abs=0.05)


def test_sup_and_gradient_profiles(medium_grid):
    paraboloid = ScalarField.from_function(medium_grid, lambda x1, x2: 0.5 * (x1**2 + x2**2))
    assert sup_profile(paraboloid, ORIGIN, [0.25, 0.5]) == [
        (0.25, pytest.approx(0.03125)),
        (0.5, pytest.approx(0.125)),
    ]
    assert gradient_profile(paraboloid, ORIGIN, [0.25])[0][1] == pytest.approx(0.25)
    with pytest.raises(ParameterError):
        sup_profile(paraboloid, ORIGIN, [0.1])


def test_critical_zone(medium_grid):
    constant = ScalarField.constant(medium_grid, 2.0)
    np.testing.assert_array_equal(critical_zone(constant, 0.1, 1.0 / 3.0), medium_grid.interior)
    affine = ScalarField.from_function(medium_grid, lambda x1, x2: x1)
    assert not critical_zone(affine, 0.1, 1.0 / 3.0).any()


def test_critical_zone_of_the_sharp_profile():
    grid = make_grid(129)
    u = ScalarField.from_function(grid, sharp)
    zone = critical_zone(u, 0.5, 1.0 / 3.0)
    dist = grid.distance_from(ORIGIN)
    # Analytic radius (3/4)^3 * 0.5 = 0.2109
    assert zone[grid.interior & (dist <= 0.18)].all()
    assert not zone[grid.interior & (dist >= 0.24)].any()
    with pytest.raises(ParameterError):
        critical_zone(u, 0.0, 1.0 / 3.0)


def test_nondegeneracy_ratio(medium_grid):
    u = ScalarField.from_function(medium_grid, lambda x1, x2: 2.0 * sharp(x1, x2))
    lowest, ratios = nondegeneracy_ratio(u, ORIGIN, [0.25, 0.5], 4.0 / 3.0)
    assert ratios == [pytest.approx(2.0), pytest.approx(2.0)]
    assert lowest == pytest.approx(2.0)
    flat = ScalarField.constant(medium_grid, 0.4)
    lowest, _ = nondegeneracy_ratio(flat, ORIGIN, [0.25, 0.5], 4.0 / 3.0)
    assert lowest == 0.0
    lowest, _ = nondegeneracy_ratio(flat, ORIGIN, [0.25], 4.0 / 3.0, reference=0.3)
    assert lowest == pytest.approx(0.1 / 0.25 ** (4.0 / 3.0))


def test_free_boundary(small_grid):
    positive = ScalarField.constant(small_grid, 1.0)
    assert not free_boundary(positive, 0.0).any()
    with pytest.raises(ParameterError):
        free_boundary_node(positive, 0.0)
    u = ScalarField.from_function(small_grid, half_space)
    mask = free_boundary(u, 0.0)
    expected = np.zeros_like(mask)
    expected[8, :] = True
    np.testing.assert_array_equal(mask, expected & small_grid.interior)
    assert free_boundary_node(u, 0.0) == (8, 8)


def test_free_boundary_node_prefers_the_steepest_neighbour(small_grid):
    u = ScalarField.from_function(small_grid, lambda x1, x2: np.maximum(x1, 0.0) * (1.0 + x2))
    assert free_boundary_node(u, 0.0) == (8, 8)
    # Within two nodes of the centre the value above the interface is largest at x2 = 2h
    assert free_boundary_node(u, 0.0, window=2.0 * small_grid.h) == (8, 10)
    with pytest.raises(ParameterError, match="window"):
        free_boundary_node(u, 0.0, window=-1.0)


def test_positive_density_of_a_half_space(medium_grid):
    u = ScalarField.from_function(medium_grid, half_space)
    radii = [0.25, 0.5]
    report = positive_density(u, ORIGIN, radii, 0.0)
    for r, ratio in zip(report.radii, report.ratios):
        assert abs(ratio - 0.5) <= 2.0 * medium_grid.h / r
    assert report.theta_min == min(report.ratios)


def test_positive_density_needs_a_free_boundary_point(medium_grid):
    u = ScalarField.from_function(medium_grid, half_space)
    with pytest.raises(ParameterError):
        positive_density(u, (0.5, 0.0), [0.25], 0.0)
    with pytest.raises(ParameterError):
        positive_density(ScalarField.constant(medium_grid, 1.0), ORIGIN, [0.25], 0.0)


def test_approximation_distance(medium_grid):
    u = ScalarField.from_function(medium_grid, lambda x1, x2: np.sin(x1) * x2)
    assert approximation_distance(u, u, 0.5) == 0.0
    eps = 1e-3
    shifted = u + ScalarField.from_function(medium_grid, lambda x1, x2: eps * x1)
    assert approximation_distance(u, shifted, 0.5) == pytest.approx(eps, rel=1e-8)
    with pytest.raises(GridMismatchError):
        approximation_distance(u, ScalarField.constant(make_grid(17), 0.0), 0.5)
