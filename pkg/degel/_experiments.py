# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Experiment pipelines: solve, measure and write CSV artifacts"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path

import numpy as np

from ._analysis import (
    ExponentFit,
    approximation_distance,
    fit_exponent,
    free_boundary,
    free_boundary_node,
    gradient_growth_profile,
    gradient_profile,
    log_spaced_radii,
    nondegeneracy_ratio,
    oscillation_profile,
    positive_density,
    sup_profile,
    write_fit_csv,
)
from ._barriers import (
    BarrierConstants,
    barrier_constants,
    barrier_defect,
    exact_example_solution,
    g_function,
)
from ._config import ExperimentConfig
from ._discretization import hessian_field, jet_at, pucci_monotone_field
from ._errors import ParameterError
from ._grid import Point, ScalarField, make_grid, restrict, write_field_csv
from ._helpers import format_number, map_parallel, write_text_lines
from ._operators import (
    MMomentum,
    PucciMinus,
    PucciPlus,
    SymMat2,
    pucci_minus,
    pucci_plus,
    random_with_spectrum,
    recession_sequence,
)
from ._solver import (
    ConstantSource,
    ProblemSpec,
    ShiftedSource,
    residual_field,
    solve,
    solve_frozen_homogeneous,
)
from ._validation import check_viscosity, comparison_audit, write_viscosity_csv

RECESSION_SAMPLES = 20
RECESSION_WINDOW = (0.35, 0.7)
APPROXIMATION_RADIUS = 0.5
APPROXIMATION_BOUND = 0.05
COMPARISON_SHIFT = 0.1
FORCING_SHIFT = 0.5
NONDEGENERACY_SAFETY = 0.5
FREE_BOUNDARY_WINDOW = 4.0


@dataclass(frozen=True)
class Measurement:
    """A measured quantity and its tolerance band; open ends are None"""

    name: str
    value: float
    low: float | None = None
    high: float | None = None

    @property
    def passed(self) -> bool:
        """Whether the value lies inside the band"""
        if math.isnan(self.value):
            return self.low is None and self.high is None
        if self.low is not None and self.value < self.low:
            return False
        return self.high is None or self.value <= self.high


@dataclass
class ExperimentResult:
    """All measurements of one experiment run"""

    experiment: str
    measurements: list[Measurement] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """Whether every measurement lies inside its band"""
        return all(m.passed for m in self.measurements)

    def summary_lines(self) -> list[str]:
        """One `name=value` line per measured quantity"""
        return [f"{m.name}={format_number(m.value)}" for m in self.measurements]

    def to_csv_lines(self) -> list[str]:
        """`quantity,value,low,high,passed` rows"""
        lines = ["quantity,value,low,high,passed"]
        for m in self.measurements:
            low = "" if m.low is None else format_number(m.low)
            high = "" if m.high is None else format_number(m.high)
            lines.append(f"{m.name},{format_number(m.value)},{low},{high},{str(m.passed).lower()}")
        return lines


class _Run:
    """State of one experiment run: configuration, output directory and results"""

    def __init__(self, cfg: ExperimentConfig, out: Path, seed: int):
        self.cfg = cfg
        self.out = out
        self.seed = seed
        self.result = ExperimentResult(cfg.experiment)

    def record(self, name: str, value: float, low=None, high=None) -> Measurement:
        """Add a measurement"""
        measurement = Measurement(name, float(value), low, high)
        self.result.measurements.append(measurement)
        if not measurement.passed:
            logging.warning("%s = %s outside [%s, %s]", name, value, low, high)
        return measurement

    def record_band(self, name: str, value: float, target: float, tol: float) -> Measurement:
        """Add a measurement with the band target +- tol"""
        return self.record(name, value, target - tol, target + tol)

    def write(self, name: str, lines: list[str]) -> None:
        """Write a CSV artifact into the output directory"""
        write_text_lines(lines, str(self.out / name))

    def write_field(self, name: str, u: ScalarField) -> None:
        """Write a field CSV into the output directory"""
        write_field_csv(u, str(self.out / name))

    def write_fit(self, name: str, fit: ExponentFit) -> None:
        """Write an exponent fit into the output directory"""
        write_fit_csv(fit, str(self.out / name))

    def slope_tol(self, default: float) -> float:
        """Configured slope tolerance, or the experiment default"""
        tol = self.cfg.analysis.slope_tol
        return default if tol is None else tol

    def radii(self, h: float, multiple: float) -> list[float]:
        """Log-spaced radii from r_min (default multiple * h) to r_max"""
        a = self.cfg.analysis
        r_min = multiple * h if a.r_min is None else a.r_min
        return log_spaced_radii(r_min, a.r_max, a.per_decade)


def _coarse_n(n: int) -> int:
    coarse = (n + 1) // 2
    return coarse if coarse % 2 == 1 else coarse + 1


def _record_slopes(run: _Run, u: ScalarField, x0: Point, gamma: float, tol: float) -> None:
    h = u.grid.h
    radii = run.radii(h, 4.0)
    oscillation_fit = fit_exponent(oscillation_profile(u, x0, radii), min_radius=2.0 * h)
    gradient_fit = fit_exponent(gradient_growth_profile(u, x0, radii), min_radius=2.0 * h)
    run.write_fit("fit_oscillation.csv", oscillation_fit)
    run.write_fit("fit_gradient.csv", gradient_fit)
    run.record_band("slope", oscillation_fit.slope, gamma, tol)
    run.record("r2", oscillation_fit.r2)
    run.record_band("gradient_slope", gradient_fit.slope, gamma - 1.0, 0.07)


def _barrier_from_config(cfg: ExperimentConfig) -> BarrierConstants:
    deg = cfg.degeneracy
    norm_a = cfg.barrier.norm_a
    if norm_a is None:
        norm_a = cfg.build_modulation().sup_norm(cfg.barrier.diam / 2.0)
    return barrier_constants(
        p=deg.p,
        q=deg.q,
        lam=cfg.operator.lam,
        Lam=cfg.operator.Lam,
        L1=deg.L1,
        N=cfg.barrier.N,
        diam=cfg.barrier.diam,
        norm_a=norm_a,
        m_inf=cfg.barrier.m_inf,
    )


def run_solve(run: _Run) -> None:
    """Solve the configured problem and check the solution for viscosity violations"""
    cfg = run.cfg
    grid = cfg.make_grid()
    problem = cfg.build_problem()
    u, report = solve(problem, grid, cfg.solver_config())
    run.write_field("solution.csv", u)
    run.write_field("residual.csv", residual_field(u, problem))
    run.record("residual", report.residual, 0.0, cfg.solver.tol)
    run.record("iterations", report.iterations)

    viscosity = check_viscosity(u, problem, 10.0 * cfg.solver.tol)
    write_viscosity_csv(viscosity, str(run.out / "viscosity.csv"))
    # the wide stencil is not the jet the viscosity check evaluates F on
    wide = isinstance(problem.operator, (PucciPlus, PucciMinus)) and problem.operator.monotone
    bound = None if wide else 0.0
    violations = len(viscosity.super_violations) + len(viscosity.sub_violations)
    run.record("viscosity_violations", violations, bound, bound)
    if isinstance(problem.operator, (PucciPlus, PucciMinus)):
        run.record("stencil_gap", _stencil_gap(u, problem.operator))


def _stencil_gap(u: ScalarField, op: PucciPlus | PucciMinus) -> float:
    """sup over interior nodes of |eigenvalue Pucci - wide-stencil Pucci| on a field"""
    sign, extremal = (1, pucci_plus) if isinstance(op, PucciPlus) else (-1, pucci_minus)
    interior = u.grid.interior
    hess = hessian_field(u)
    inner = SymMat2(hess.a11[interior], hess.a12[interior], hess.a22[interior])
    eigen = np.asarray(extremal(inner, op.ellipticity), dtype=float)
    wide = pucci_monotone_field(u, op.ellipticity, sign)[interior]
    return float(np.max(np.abs(eigen - wide), initial=0.0))


def run_exact_check(run: _Run) -> None:
    """Recover the sharp profile |x|^{(p+2)/(p+1)} and its growth exponents"""
    cfg = replace(run.cfg, source=replace(run.cfg.source, kind="exact"), boundary="exact")
    problem = cfg.build_problem()
    solver_cfg = cfg.solver_config()
    grids = [cfg.make_grid(_coarse_n(cfg.grid.n)), cfg.make_grid()]
    (coarse, _), (fine, report) = map_parallel(lambda g: solve(problem, g, solver_cfg), grids)

    def error(u: ScalarField) -> float:
        exact = ScalarField.from_function(u.grid, partial(exact_example_solution, p=cfg.p))
        return float(np.nanmax(np.abs(u.values - exact.values)))

    fine_error, coarse_error = error(fine), error(coarse)
    run.write_field("solution.csv", fine)
    run.record("residual", report.residual, 0.0, cfg.solver.tol)
    run.record("sup_error", fine_error, 0.0, 2e-2)
    run.record("coarse_error", coarse_error)
    ratio = coarse_error / fine_error if fine_error > 0 else math.inf
    run.record("refinement_ratio", ratio, 1.25, None)
    gamma = (cfg.p + 2.0) / (cfg.p + 1.0)
    _record_slopes(run, fine, cfg.grid.center, gamma, run.slope_tol(0.07))


def run_exponent(run: _Run) -> None:
    """Fit the growth exponents of the analytically sampled sharp profile"""
    cfg = run.cfg
    grid = cfg.make_grid()
    u = ScalarField.from_function(grid, partial(exact_example_solution, p=cfg.p))
    run.write_field("profile.csv", u)
    gamma = (cfg.p + 2.0) / (cfg.p + 1.0)
    _record_slopes(run, u, cfg.analysis.x0, gamma, run.slope_tol(0.02))


def run_deadcore(run: _Run) -> None:
    """Measure dead-core size, growth and gradient decay at the free boundary, and density"""
    cfg = run.cfg
    grid = cfg.make_grid()
    u, report = solve(cfg.build_problem(), grid, cfg.solver_config())
    run.write_field("solution.csv", u)
    run.record("residual", report.residual, 0.0, cfg.solver.tol)

    threshold = cfg.threshold()
    defined = grid.defined
    zero = np.count_nonzero(u.values[defined] <= threshold) / np.count_nonzero(defined)
    run.record("zero_fraction", zero, 0.01, 1.0)
    boundary = free_boundary(u, threshold)
    run.write("free_boundary.csv", ["ix,iy", *(f"{i},{j}" for i, j in np.argwhere(boundary))])

    window = FREE_BOUNDARY_WINDOW * grid.h
    z0 = grid.point_of(free_boundary_node(u, threshold, near=cfg.analysis.x0, window=window))
    p, mu = cfg.p, cfg.reaction_order()
    tol = run.slope_tol(0.2)
    radii = run.radii(grid.h, 6.0)
    min_radius = min(6.0 * grid.h, radii[0])
    growth = fit_exponent(sup_profile(u, z0, radii), min_radius=min_radius)
    decay = fit_exponent(gradient_profile(u, z0, radii), min_radius=min_radius)
    run.write_fit("fit_growth.csv", growth)
    run.write_fit("fit_gradient_decay.csv", decay)
    run.record_band("growth_slope", growth.slope, (p + 2.0) / (p + 1.0 - mu), tol)
    run.record_band("decay_slope", decay.slope, (1.0 + mu) / (p + 1.0 - mu), tol)

    density = positive_density(u, z0, run.radii(grid.h, 8.0), threshold)
    run.write(
        "density.csv",
        ["r,ratio"]
        + [f"{format_number(r)},{format_number(v)}" for r, v in zip(density.radii, density.ratios)]
        + [f"theta_min={format_number(density.theta_min)}"],
    )
    run.record("theta_min", density.theta_min, 0.3, 1.0)


def run_obstacle(run: _Run) -> None:
    """Solve the obstacle problem and measure growth away from the obstacle"""
    cfg = run.cfg
    grid = cfg.make_grid()
    problem = cfg.build_problem()
    if problem.obstacle is None:
        raise ParameterError("the obstacle experiment needs an obstacle")
    u, report = solve(problem, grid, cfg.solver_config())
    run.write_field("solution.csv", u)
    obstacle = ScalarField.from_function(grid, problem.obstacle)
    gap = u - obstacle
    defined = grid.defined
    run.record("residual", report.residual, 0.0, cfg.solver.tol)
    run.record("min_gap", float(np.min(gap.values[defined])), -1e-12, None)
    contact = np.count_nonzero(gap.values[defined] <= cfg.threshold()) / np.count_nonzero(defined)
    run.record("contact_fraction", contact)

    x0 = cfg.analysis.x0
    node = grid.nearest_node(x0)
    if gap.at(node) <= cfg.threshold():
        raise ParameterError(f"analysis.x0 = {x0} lies in the contact set")
    gamma = (cfg.p + 2.0) / (cfg.p + 1.0)
    radii = run.radii(grid.h, 4.0)
    lowest, ratios = nondegeneracy_ratio(u, x0, radii, gamma, reference=obstacle.at(node))
    bc = _barrier_from_config(cfg)
    run.write(
        "nondegeneracy.csv",
        ["r,ratio"] + [f"{format_number(r)},{format_number(v)}" for r, v in zip(radii, ratios)],
    )
    run.record("nondegeneracy_min", lowest, NONDEGENERACY_SAFETY * bc.c, None)


def run_barrier_root(run: _Run) -> None:
    """Compute the barrier constants and check the defining property of c"""
    cfg = run.cfg
    bc = _barrier_from_config(cfg)
    radii = np.linspace(bc.diam / 200.0, bc.diam / 2.0, 100)
    defect = float(np.max(barrier_defect(bc, radii)))
    values = {"T0": bc.T0, "c": bc.c, "Xi1": bc.Xi1, "Xi2": bc.Xi2, "Xi3": bc.Xi3}
    rows = [f"{name},{format_number(value)}" for name, value in values.items()]
    run.write("barrier.csv", ["name,value", *rows])
    for name, value in values.items():
        run.record(name, value)
    root_tol = 1e-12 * max(1.0, bc.m_inf)
    run.record("g_T0", g_function(bc.T0, bc), -root_tol, root_tol)
    run.record("defect_max", defect, 0.0, bc.m_inf if bc.lam == bc.Lam else None)


def _distance_for(run: _Run, base: ProblemSpec, delta: float) -> float:
    cfg = run.cfg
    grid = cfg.make_grid()
    center = cfg.grid.center
    u, _ = solve(replace(base, source=ConstantSource(delta)), grid, cfg.solver_config())
    inner = restrict(u, center, APPROXIMATION_RADIUS)
    half = make_grid(cfg.grid.n, center, APPROXIMATION_RADIUS)
    companion = solve_frozen_homogeneous(base.operator, center, inner, half, cfg.solver_config())
    return approximation_distance(inner, companion, APPROXIMATION_RADIUS)


def run_approximation(run: _Run) -> None:
    """Distance of solutions with small forcing to their frozen homogeneous companions"""
    base = run.cfg.build_problem()
    deltas = sorted(run.cfg.deltas, reverse=True)
    distances = map_parallel(lambda delta: _distance_for(run, base, delta), deltas)
    run.write(
        "approximation.csv",
        ["delta,distance"]
        + [f"{format_number(d)},{format_number(v)}" for d, v in zip(deltas, distances)],
    )
    for delta, distance in zip(deltas, distances):
        run.record(f"distance_{delta:g}", distance)
    decreasing = all(later < earlier for earlier, later in zip(distances, distances[1:]))
    run.record("monotone", float(decreasing), 1.0, 1.0)
    run.record("distance_min_delta", distances[-1], 0.0, APPROXIMATION_BOUND)


def run_recession(run: _Run) -> None:
    """Approach of tau F(X / tau) to the recession operator"""
    cfg = run.cfg
    op = cfg.build_operator()
    taus = sorted(cfg.taus, reverse=True)
    rng = np.random.default_rng(run.seed)
    X = random_with_spectrum(rng, RECESSION_SAMPLES, RECESSION_WINDOW, signed=True)
    rows = ["sample,tau,error"]
    worst = 0.0
    decreasing = 0
    for k in range(RECESSION_SAMPLES):
        sample = X.take(k)
        if isinstance(op, MMomentum):
            reference = float(sample.trace)
        else:
            reference = float(op.evaluate((0.0, 0.0), (1.0, 0.0), sample))
        errors = recession_sequence(op, sample, taus, reference)
        rows.extend(f"{k},{format_number(t)},{format_number(e)}" for t, e in zip(taus, errors))
        worst = max(worst, errors[-1])
        decreasing += all(b < a for a, b in zip(errors, errors[1:]))
    run.write("recession.csv", rows)
    if isinstance(op, MMomentum):
        run.record("max_error", worst, 0.0, 1e-3)
        run.record("decreasing", decreasing, RECESSION_SAMPLES, RECESSION_SAMPLES)
    else:
        # positively homogeneous operators are their own recession operator
        run.record("max_error", worst, 0.0, 1e-10)


def run_nondegeneracy(run: _Run) -> None:
    """Growth of the solution away from a critical point against the barrier constant"""
    cfg = run.cfg
    grid = cfg.make_grid()
    u, report = solve(cfg.build_problem(), grid, cfg.solver_config())
    run.write_field("solution.csv", u)
    run.record("residual", report.residual, 0.0, cfg.solver.tol)

    x0 = cfg.analysis.x0
    jet = jet_at(u, grid.nearest_node(x0))
    radii = run.radii(grid.h, 4.0)
    gamma = (cfg.p + 2.0) / (cfg.p + 1.0)
    lowest, ratios = nondegeneracy_ratio(u, x0, radii, gamma)
    run.write(
        "nondegeneracy.csv",
        ["r,ratio"] + [f"{format_number(r)},{format_number(v)}" for r, v in zip(radii, ratios)],
    )
    run.record("grad_x0", math.hypot(*jet.grad), 0.0, cfg.analysis.r_max ** cfg.beta())
    bc = _barrier_from_config(cfg)
    run.record("barrier_c", bc.c)
    run.record("nondegeneracy_min", lowest, NONDEGENERACY_SAFETY * bc.c, None)


def _raised(g, shift: float, x1, x2):
    return np.asarray(g(x1, x2)) + shift


def run_comparison(run: _Run) -> None:
    """Three ordered problem pairs that must keep their order after solving"""
    cfg = run.cfg
    grid = cfg.make_grid()
    base = cfg.build_problem()
    scenarios = {
        "identical": (base, base, None),
        "raised_boundary": (
            base,
            replace(base, boundary=partial(_raised, base.boundary, COMPARISON_SHIFT)),
            COMPARISON_SHIFT,
        ),
        "reduced_forcing": (
            base,
            replace(base, source=ShiftedSource(base.source, FORCING_SHIFT)),
            None,
        ),
    }
    rows = ["scenario,min_difference,h,passed"]
    for name, (sub, sup, upper) in scenarios.items():
        report = comparison_audit(sub, sup, grid, cfg.solver_config())
        rows.append(
            f"{name},{format_number(report.min_difference)},{format_number(report.grid_h)},"
            f"{str(report.passed).lower()}"
        )
        high = None if upper is None else upper + 1e-8
        run.record(f"min_difference_{name}", report.min_difference, -1e-8, high)
    run.write("comparison.csv", rows)


PIPELINES: dict[str, Callable[[_Run], None]] = {
    "solve": run_solve,
    "exact-check": run_exact_check,
    "exponent": run_exponent,
    "deadcore": run_deadcore,
    "obstacle": run_obstacle,
    "barrier-root": run_barrier_root,
    "approximation": run_approximation,
    "recession": run_recession,
    "nondegeneracy": run_nondegeneracy,
    "comparison": run_comparison,
}


def run_experiment(
    cfg: ExperimentConfig, out: str | None = None, seed: int | None = None
) -> ExperimentResult:
    """
    Execute the pipeline named by the configuration.

    Artifacts go to `out` (default: the configured output path): the resolved
    configuration, field and fit CSVs, and `summary.csv` holding every
    measured quantity with its tolerance band.

    Args:
        cfg (ExperimentConfig): The validated configuration.
        out (str): Output directory overriding `output.path`.
        seed (int): Seed overriding the configured one.

    Returns:
        ExperimentResult: The measurements.
    """
    directory = Path(out or cfg.output_path)
    directory.mkdir(parents=True, exist_ok=True)
    run = _Run(cfg, directory, cfg.seed if seed is None else seed)
    logging.info("Running experiment '%s', artifacts in %s", cfg.experiment, directory)
    run.write("config.txt", cfg.to_lines())
    PIPELINES[cfg.experiment](run)
    run.write("summary.csv", run.result.to_csv_lines())
    return run.result
