# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Tests for the experiment pipelines"""

import pytest

from degel._config import parse_config
from degel._experiments import Measurement, run_experiment


def run(tmp_path, text, **kwargs):
    """Run a configuration with artifacts below tmp_path"""
    return run_experiment(parse_config(text), out=str(tmp_path / "out"), **kwargs)


def measured(result, name):
    """The measurement of a quantity"""
    return next(m for m in result.measurements if m.name == name)


def read_lines(path):
    """Lines of an artifact"""
    return path.read_text(encoding="UTF-8").splitlines()


@pytest.mark.parametrize(
    "measurement, passed",
    [
        (Measurement("a", 1.0, 0.0, 2.0), True),
        (Measurement("a", 3.0, 0.0, 2.0), False),
        (Measurement("a", -1.0, 0.0, None), False),
        (Measurement("a", 1e9, 0.0, None), True),
        (Measurement("a", float("nan")), True),
        (Measurement("a", float("nan"), 0.0, 1.0), False),
    ],
)
def test_measurement_bands(measurement, passed):
    assert measurement.passed is passed


def test_barrier_root(tmp_path):
    result = run(tmp_path, "experiment = barrier-root\ndegeneracy.a = const:1")
    assert result.passed
    assert measured(result, "T0").value == pytest.approx(0.565, abs=1e-3)
    out = tmp_path / "out"
    assert read_lines(out / "barrier.csv")[0] == "name,value"
    summary = read_lines(out / "summary.csv")
    assert summary[0] == "quantity,value,low,high,passed"
    assert len(summary) == len(result.measurements) + 1
    assert "experiment = barrier-root" in read_lines(out / "config.txt")


def test_exponent_of_the_sharp_profile(tmp_path):
    result = run(tmp_path, "experiment = exponent\ngrid.n = 257")
    assert result.passed
    assert measured(result, "slope").value == pytest.approx(4.0 / 3.0, abs=0.02)
    assert read_lines(tmp_path / "out" / "fit_oscillation.csv")[0] == "r,value"


def test_recession_of_homogeneous_and_momentum_operators(tmp_path):
    text = "experiment = recession\noperator.name = pucci_plus\noperator.Lambda = 2"
    result = run(tmp_path, text)
    assert result.passed
    result = run(tmp_path, "experiment = recession\noperator.name = m_momentum", seed=7)
    assert measured(result, "max_error").passed
    rows = read_lines(tmp_path / "out" / "recession.csv")
    assert rows[0] == "sample,tau,error"
    assert len(rows) == 1 + 20 * 4


def test_solve_writes_solution_and_viscosity_report(tmp_path):
    result = run(
        tmp_path,
        "experiment = solve\ngrid.n = 17\ndegeneracy.enabled = false\nboundary = saddle",
    )
    assert result.passed
    assert measured(result, "viscosity_violations").value == 0.0
    out = tmp_path / "out"
    for name in ("solution.csv", "residual.csv", "viscosity.csv", "summary.csv"):
        assert (out / name).exists()
    assert read_lines(out / "solution.csv")[0].startswith("n=17,")


def test_comparison_pairs_keep_their_order(tmp_path):
    result = run(
        tmp_path,
        "experiment = comparison\ngrid.n = 17\ndegeneracy.enabled = false\nsource.value = -1",
    )
    assert result.passed
    assert len(read_lines(tmp_path / "out" / "comparison.csv")) == 4


def test_approximation_distances_shrink_with_the_forcing(tmp_path):
    result = run(tmp_path, "experiment = approximation\ngrid.n = 33\ndegeneracy.enabled = false")
    assert result.passed
    assert measured(result, "monotone").value == 1.0


def test_obstacle_stays_above_the_obstacle(tmp_path):
    result = run(
        tmp_path,
        "experiment = obstacle\ngrid.n = 33\ndegeneracy.enabled = false\n"
        "obstacle = paraboloid:0.3,1\nanalysis.x0 = 0.7,0\nanalysis.r_max = 0.3",
    )
    assert measured(result, "min_gap").passed
    assert measured(result, "residual").passed
    assert 0.0 < measured(result, "contact_fraction").value < 1.0


def test_pucci_solve_reports_the_stencil_gap(tmp_path):
    result = run(
        tmp_path,
        "experiment = solve\ngrid.n = 17\noperator.name = pucci_plus\noperator.Lambda = 2\n"
        "degeneracy.enabled = false\nboundary = linear:1,0.5",
    )
    assert result.passed
    # Both discretizations vanish on affine fields
    assert measured(result, "stencil_gap").value <= 1e-10


@pytest.mark.slow
@pytest.mark.parametrize(
    "text",
    [
        "experiment = exact-check\ngrid.n = 129\ndegeneracy.a = power:1",
        "experiment = deadcore\ngrid.n = 161\nsource.kind = deadcore\nsource.value = 100\n"
        "degeneracy.a = const:0.5\nboundary = const:1\nanalysis.r_max = 0.2",
        "experiment = nondegeneracy\ndegeneracy.a = const:1\nsource.value = 1\n"
        "boundary = power:1.3333333333333333",
    ],
)
def test_acceptance_runs_pass(tmp_path, text):
    result = run(tmp_path, text)
    failed = [m.name for m in result.measurements if not m.passed]
    assert result.passed, failed
    assert (tmp_path / "out" / "summary.csv").exists()
