# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Tests for viscosity probing and comparison audits"""

import numpy as np
import pytest

from degel._degeneracy import ConstantModulation, DegeneracyLaw
from degel._errors import ParameterError
from degel._grid import ScalarField
from degel._operators import EllipticityPair, LinearTrace, PucciPlus
from degel._solver import ConstantSource, ProblemSpec, SolverConfig, solve
from degel._validation import check_viscosity, comparison_audit, write_viscosity_csv


def constant(value):
    """Constant boundary data"""
    return lambda x1, x2: value + 0.0 * x1


def laplace(boundary, source=0.0):
    """tr D^2 u = source"""
    return ProblemSpec(LinearTrace(), None, ConstantSource(source), boundary)


def test_computed_solution_passes(small_grid):
    problem = laplace(lambda x1, x2: x1**2 - x2**2)
    u, report = solve(problem, small_grid, SolverConfig(tol=1e-8))
    assert report.converged
    result = check_viscosity(u, problem, tol=1e-6)
    assert result.passed
    assert result.checked == int(np.count_nonzero(small_grid.interior))


def test_degenerate_solution_passes(small_grid):
    law = DegeneracyLaw(2.0, 3.0, ConstantModulation(0.5))
    problem = ProblemSpec(LinearTrace(), law, ConstantSource(-1.0), constant(0.0))
    u, report = solve(problem, small_grid, SolverConfig(tol=1e-8))
    assert report.converged
    assert check_viscosity(u, problem, tol=1e-6).passed


def test_convex_paraboloid_is_not_harmonic(small_grid):
    u = ScalarField.from_function(small_grid, lambda x1, x2: 0.5 * (x1**2 + x2**2))
    report = check_viscosity(u, laplace(constant(0.0)), tol=1e-6)
    assert not report.passed
    assert len(report.super_violations) == report.checked
    assert not report.sub_violations
    for _, margin in report.super_violations:
        assert margin == pytest.approx(2.0, abs=1e-6)


def test_concave_paraboloid_is_not_harmonic(small_grid):
    u = ScalarField.from_function(small_grid, lambda x1, x2: -0.5 * (x1**2 + x2**2))
    report = check_viscosity(u, laplace(constant(0.0)), tol=1e-6)
    assert len(report.sub_violations) == report.checked
    assert not report.super_violations


def test_cone_violates_only_the_sub_inequality(small_grid):
    # Quadratics touching -|x| from above at the origin have trace -2 sqrt(2) / h
    u = ScalarField.from_function(small_grid, lambda x1, x2: -np.hypot(x1, x2))
    report = check_viscosity(u, laplace(constant(0.0)), tol=1e-6)
    assert not report.super_violations
    margins = dict(report.sub_violations)
    assert margins[(8, 8)] == pytest.approx(2.0 * np.sqrt(2.0) / small_grid.h)


def test_paraboloid_solves_its_own_equation(small_grid):
    pucci = PucciPlus(ellipticity=EllipticityPair(1.0, 2.0))
    problem = ProblemSpec(pucci, None, ConstantSource(8.0), constant(0.0))
    u = ScalarField.from_function(small_grid, lambda x1, x2: x1**2 + x2**2)
    assert check_viscosity(u, problem, tol=1e-8).passed


def test_perturbed_gradients_only_add_violations(small_grid):
    u = ScalarField.from_function(small_grid, lambda x1, x2: np.sin(2.0 * x1) * x2)
    problem = laplace(constant(0.0))
    plain = check_viscosity(u, problem, tol=1e-3)
    perturbed = check_viscosity(u, problem, tol=1e-3, jet_perturbations=4)
    plain_nodes = {node for node, _ in plain.super_violations + plain.sub_violations}
    perturbed_nodes = {node for node, _ in perturbed.super_violations + perturbed.sub_violations}
    assert plain_nodes <= perturbed_nodes


def test_viscosity_arguments(small_grid):
    u = ScalarField.constant(small_grid, 0.0)
    with pytest.raises(ParameterError):
        check_viscosity(u, laplace(constant(0.0)), tol=-1.0)
    with pytest.raises(ParameterError):
        check_viscosity(u, laplace(constant(0.0)), tol=1e-6, jet_perturbations=-1)


def test_viscosity_csv(tmp_path, small_grid):
    u = ScalarField.from_function(small_grid, lambda x1, x2: 0.5 * (x1**2 + x2**2))
    report = check_viscosity(u, laplace(constant(0.0)), tol=1e-6)
    path = tmp_path / "viscosity.csv"
    write_viscosity_csv(report, str(path))
    lines = path.read_text(encoding="UTF-8").splitlines()
    assert lines[0] == "ix,iy,kind,margin"
    assert len(lines) == report.checked + 1
    assert lines[1].split(",")[2] == "super"


def test_ordered_boundary_data_give_ordered_solutions(small_grid):
    report = comparison_audit(laplace(constant(0.0)), laplace(constant(0.2)), small_grid)
    assert report.passed
    assert report.min_difference == pytest.approx(0.2, abs=1e-6)
    assert report.converged == (True, True)
    assert report.grid_h == small_grid.h


def test_strictness_can_fail_the_audit(small_grid):
    report = comparison_audit(
        laplace(constant(0.0)), laplace(constant(0.2)), small_grid, strictness=0.5
    )
    assert not report.passed


def test_comparison_with_shared_degeneracy(small_grid):
    law = DegeneracyLaw(2.0, 3.0, ConstantModulation(0.5))
    low = ProblemSpec(LinearTrace(), law, ConstantSource(-1.0), constant(0.0))
    high = ProblemSpec(LinearTrace(), law, ConstantSource(-1.0), constant(0.2))
    report = comparison_audit(low, high, small_grid, SolverConfig(tol=1e-6))
    assert report.passed
    assert report.min_difference >= -1e-8


def test_comparison_preconditions(small_grid):
    with pytest.raises(ParameterError, match="not ordered"):
        comparison_audit(laplace(constant(0.2)), laplace(constant(0.0)), small_grid)
    pucci = ProblemSpec(
        PucciPlus(ellipticity=EllipticityPair(1.0, 2.0)), None, ConstantSource(0.0), constant(0.2)
    )
    with pytest.raises(ParameterError, match="operators"):
        comparison_audit(laplace(constant(0.0)), pucci, small_grid)
    first = ProblemSpec(
        LinearTrace(), DegeneracyLaw(2.0, 3.0, ConstantModulation(0.5)), ConstantSource(0.0),
        constant(0.0),
    )
    second = ProblemSpec(
        LinearTrace(), DegeneracyLaw(2.0, 3.0, ConstantModulation(0.5)), ConstantSource(0.0),
        constant(0.2),
    )
    with pytest.raises(ParameterError, match="degeneracy"):
        comparison_audit(first, second, small_grid)
