# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Viscosity probing with touching quadratics, and comparison-principle audits"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._discretization import interior_jets
from ._errors import ParameterError
from ._grid import Grid2D, Node, ScalarField
from ._helpers import format_number, map_parallel, write_text_lines
from ._operators import SymMat2
from ._solver import CONTACT_TOL, ProblemSpec, SolverConfig, boundary_values, solve

COMPARISON_TOL = 1e-8
# Offsets of the 9-point neighbourhood, centre excluded
_NEIGHBOURS = tuple((di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1) if (di, dj) != (0, 0))


@dataclass(frozen=True)
class ViscosityReport:
    """Nodes where a touching quadratic violates the equation by more than `tol`"""

    checked: int
    super_violations: tuple[tuple[Node, float], ...]
    sub_violations: tuple[tuple[Node, float], ...]
    tol: float

    @property
    def passed(self) -> bool:
        """No violation beyond tolerance"""
        return not self.super_violations and not self.sub_violations

    def to_csv_lines(self) -> list[str]:
        """`ix,iy,kind,margin` rows"""
        lines = ["ix,iy,kind,margin"]
        for kind, violations in (("super", self.super_violations), ("sub", self.sub_violations)):
            lines.extend(f"{i},{j},{kind},{format_number(m)}" for (i, j), m in violations)
        return lines


def write_viscosity_csv(report: ViscosityReport, path: str) -> None:
    """Write a viscosity report as CSV to a file, or to stdout for `-`"""
    write_text_lines(report.to_csv_lines(), path)


@dataclass(frozen=True)
class _Jets:
    """Interior data shared by all gradient perturbations"""

    grid: Grid2D
    x: np.ndarray
    u0: np.ndarray
    grad: np.ndarray
    hess: SymMat2
    # neighbour values minus u0, shape (8, k)
    rise: np.ndarray
    source: np.ndarray
    free: np.ndarray


def _node_jets(u: ScalarField, problem: ProblemSpec) -> _Jets:
    grid = u.grid
    interior = grid.interior
    x1, x2 = grid.coordinates
    values = np.asarray(u.values)
    discrete = interior_jets(grid, values)
    u0 = values[interior]
    n = grid.n
    rise = []
    for di, dj in _NEIGHBOURS:
        shifted = values[1 + di : n - 1 + di, 1 + dj : n - 1 + dj][interior[1:-1, 1:-1]]
        rise.append(shifted - u0)
    source = problem.source.evaluate(x1[interior], x2[interior], u0)
    if problem.obstacle is None:
        free = np.ones_like(u0, dtype=bool)
    else:
        obstacle = np.asarray(problem.obstacle(x1[interior], x2[interior]), dtype=float)
        free = u0 > obstacle + CONTACT_TOL
    return _Jets(
        grid=grid,
        x=np.stack([x1[interior], x2[interior]], axis=-1),
        u0=u0,
        grad=discrete.grad,
        hess=discrete.hess,
        rise=np.stack(rise),
        source=np.where(free, source, 0.0),
        free=free,
    )


def _margins(jets: _Jets, problem: ProblemSpec, shift: tuple[float, float]):
    """
    Super and sub margins of the quadratics with gradient grad + shift.

    The quadratic is lowered (raised) by the smallest multiple s of |y - x|^2 / 2
    that makes it touch u from below (above) on the 9-point neighbourhood.
    """
    h = jets.grid.h
    grad = jets.grad + np.asarray(shift, dtype=float)
    M = jets.hess
    spread = []
    for (di, dj), rise in zip(_NEIGHBOURS, jets.rise):
        planar = h * (grad[:, 0] * di + grad[:, 1] * dj)
        curved = 0.5 * h**2 * M.quadratic_form(di, dj)
        spread.append(2.0 * (rise - planar - curved) / (h**2 * (di * di + dj * dj)))
    spread_arr = np.stack(spread)
    s_below = np.maximum(-np.min(spread_arr, axis=0), 0.0)
    s_above = np.maximum(np.max(spread_arr, axis=0), 0.0)

    norm = np.sqrt(np.sum(grad**2, axis=-1) + 0.25 * h**2 * (M.a11**2 + M.a22**2))
    if problem.degeneracy is None:
        factor = np.ones_like(norm)
    else:
        factor = np.asarray(problem.degeneracy.H(jets.x, norm), dtype=float)
    lowered = M - SymMat2.identity(1.0).scaled(s_below)
    raised = M + SymMat2.identity(1.0).scaled(s_above)
    op = problem.operator
    super_margin = factor * np.asarray(op.evaluate(jets.x, grad, lowered)) - jets.source
    sub_margin = jets.source - factor * np.asarray(op.evaluate(jets.x, grad, raised))
    # contact nodes of an obstacle problem only carry the supersolution inequality
    sub_margin = np.where(jets.free, sub_margin, -np.inf)
    return super_margin, sub_margin


def _violations(jets: _Jets, margins: np.ndarray, tol: float) -> tuple[tuple[Node, float], ...]:
    nodes = np.argwhere(jets.grid.interior)
    bad = np.nonzero(margins > tol)[0]
    return tuple(((int(nodes[k][0]), int(nodes[k][1])), float(margins[k])) for k in bad)


def check_viscosity(
    u: ScalarField, problem: ProblemSpec, tol: float, jet_perturbations: int = 0
) -> ViscosityReport:
    """
    Test u with quadratic test functions built from its discrete jets.

    At every interior node the discrete jet (gradient, Hessian) is lowered by
    s Id until the quadratic touches u from below on the 9-point neighbourhood,
    and H F <= f + tol is checked; dually the raised quadratic touching from
    above must satisfy H F >= f - tol. Besides the unperturbed gradient,
    `jet_perturbations` gradients shifted by h in equally spaced directions are
    tried, and the worst margin per node is kept. H is taken at the grid
    gradient norm, F at the jet, so a field with residual below tau passes
    at tolerance tau when no perturbation is requested.

    Args:
        u (ScalarField): The candidate solution.
        problem (ProblemSpec): The equation to test against.
        tol (float): Allowed violation.
        jet_perturbations (int): Number of shifted gradients per node.

    Returns:
        ViscosityReport: Violating nodes with their margins.
    """
    if tol < 0 or jet_perturbations < 0:
        raise ParameterError("tol and jet_perturbations must be nonnegative")
    jets = _node_jets(u, problem)
    h = u.grid.h
    shifts = [(0.0, 0.0)]
    for k in range(jet_perturbations):
        angle = 2.0 * math.pi * k / jet_perturbations
        shifts.append((h * math.cos(angle), h * math.sin(angle)))

    results = map_parallel(lambda shift: _margins(jets, problem, shift), shifts)
    super_margin = np.max(np.stack([r[0] for r in results]), axis=0)
    sub_margin = np.max(np.stack([r[1] for r in results]), axis=0)
    report = ViscosityReport(
        checked=int(jets.u0.size),
        super_violations=_violations(jets, super_margin, tol),
        sub_violations=_violations(jets, sub_margin, tol),
        tol=tol,
    )
    logging.info(
        "Viscosity check on %s nodes: %s super and %s sub violations at tol %.1e",
        report.checked,
        len(report.super_violations),
        len(report.sub_violations),
        tol,
    )
    return report


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of solving an ordered pair of problems"""

    min_difference: float
    passed: bool
    grid_h: float
    converged: tuple[bool, bool] = field(default=(True, True))


def comparison_audit(
    problem_sub: ProblemSpec,
    problem_super: ProblemSpec,
    grid: Grid2D,
    cfg: SolverConfig | None = None,
    strictness: float = 0.0,
) -> ComparisonReport:
    """
    Solve both problems and check u_super >= u_sub + strictness - 1e-8 everywhere.

    The two problems must share operator and degeneracy law, and the boundary
    data must be ordered on the boundary ring. Both solves run through the
    worker pool.

    Raises:
        ParameterError: If the preconditions do not hold.
    """
    if problem_sub.operator != problem_super.operator:
        raise ParameterError("comparison needs identical operators")
    if problem_sub.degeneracy is not problem_super.degeneracy:
        raise ParameterError("comparison needs an identical degeneracy law")
    ring = grid.ring
    g_sub = boundary_values(problem_sub.boundary, grid)[ring]
    g_super = boundary_values(problem_super.boundary, grid)[ring]
    if np.any(g_super < g_sub - COMPARISON_TOL):
        raise ParameterError("boundary data are not ordered, g_super >= g_sub is required")

    (u_sub, rep_sub), (u_super, rep_super) = map_parallel(
        lambda problem: solve(problem, grid, cfg), [problem_sub, problem_super]
    )
    defined = grid.defined
    difference = float(np.min(u_super.values[defined] - u_sub.values[defined]))
    passed = difference >= strictness - COMPARISON_TOL
    if not passed:
        logging.warning("Comparison fails with min difference %.3e at h=%s", difference, grid.h)
    return ComparisonReport(
        min_difference=difference,
        passed=passed,
        grid_h=grid.h,
        converged=(rep_sub.converged, rep_super.converged),
    )
