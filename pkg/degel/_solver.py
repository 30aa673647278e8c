# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Pseudo-time relaxation for H(x, Du) F(x, D^2 u) = f(x, u) with Dirichlet data"""

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ._degeneracy import DegeneracyLaw
from ._discretization import (
    InteriorJets,
    interior_directional_differences,
    interior_jets,
    monotone_combination,
)
from ._errors import BlowUpError, GridMismatchError, ParameterError
from ._grid import Grid2D, Point, PointFunction, ScalarField
from ._operators import FrozenAt, OperatorSpec, PucciMinus, PucciPlus, SymMat2

DIMENSION = 2
BLOW_UP_FACTOR = 1e3
# Where the source is active, local steps exceed those of the problem with H = 1 by at most 1e4
MIN_STEP_FACTOR = 1e-4
SOLVER_EPS_REG = 1e-8
CONTACT_TOL = 1e-14


@dataclass(frozen=True)
class BoundedSource:
    """f(x, u) given as a callable of (x1, x2, u). `lipschitz_u` bounds |df/du|"""

    f: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    lipschitz_u: float = 0.0

    def evaluate(self, x1, x2, u) -> np.ndarray:
        """Source values"""
        values = np.broadcast_to(np.asarray(self.f(x1, x2, u), dtype=float), np.shape(u))
        if not np.all(np.isfinite(values)):
            raise ParameterError("bounded source takes non-finite values")
        return values

    def rate_bound(self, x1, x2, u) -> float:
        """Bound on |df/du| for step size control"""
        return self.lipschitz_u

    @property
    def absorbing(self) -> bool:
        """Whether the source is a nonnegative absorption term vanishing for u <= 0"""
        return False


@dataclass(frozen=True)
class DeadCoreSource:
    """Absorption f(x) * max(u, 0)^mu with a nonnegative Thiele modulus f"""

    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    mu: float

    def __post_init__(self):
        if self.mu <= 0:
            raise ParameterError(f"reaction order mu must be positive, got {self.mu}")

    def modulus(self, x1, x2) -> np.ndarray:
        """Thiele modulus f(x)"""
        values = np.broadcast_to(np.asarray(self.f(x1, x2), dtype=float), np.shape(x1))
        if np.any(values < 0):
            raise ParameterError("dead-core modulus must be nonnegative")
        return values

    def evaluate(self, x1, x2, u) -> np.ndarray:
        """Source values"""
        return self.modulus(x1, x2) * np.maximum(u, 0.0) ** self.mu

    def rate_bound(self, x1, x2, u) -> float:
        """Bound on the reaction rate for step size control"""
        top = float(np.max(self.modulus(x1, x2), initial=0.0))
        if self.mu >= 1:
            return top * self.mu * max(float(np.max(u, initial=0.0)), 1.0) ** (self.mu - 1.0)
        return top

    @property
    def absorbing(self) -> bool:
        """Whether the source is a nonnegative absorption term vanishing for u <= 0"""
        return True


@dataclass(frozen=True)
class ConstantSource:
    """f(x, u) = c"""

    c: float

    def evaluate(self, x1, x2, u) -> np.ndarray:
        """Source values"""
        return np.full(np.shape(u), float(self.c))

    def rate_bound(self, x1, x2, u) -> float:
        """Bound on |df/du| for step size control"""
        return 0.0

    @property
    def absorbing(self) -> bool:
        """Whether the source is a nonnegative absorption term vanishing for u <= 0"""
        return False


@dataclass(frozen=True)
class RescaledSource:
    """factor * f(x0 + tau x, kappa u), the source of a rescaled problem"""

    inner: "SourceSpec"
    factor: float
    kappa: float
    tau: float
    x0: Point

    def _moved(self, x1, x2):
        return self.x0[0] + self.tau * np.asarray(x1), self.x0[1] + self.tau * np.asarray(x2)

    def evaluate(self, x1, x2, u) -> np.ndarray:
        """Source values"""
        m1, m2 = self._moved(x1, x2)
        return self.factor * self.inner.evaluate(m1, m2, self.kappa * np.asarray(u))

    def rate_bound(self, x1, x2, u) -> float:
        """Bound on |df/du| for step size control"""
        m1, m2 = self._moved(x1, x2)
        return self.factor * self.kappa * self.inner.rate_bound(m1, m2, self.kappa * np.asarray(u))

    @property
    def absorbing(self) -> bool:
        """Whether the source is a nonnegative absorption term vanishing for u <= 0"""
        return self.inner.absorbing


@dataclass(frozen=True)
class ShiftedSource:
    """f(x, u) - shift"""

    inner: "SourceSpec"
    shift: float

    def evaluate(self, x1, x2, u) -> np.ndarray:
        """Source values"""
        return self.inner.evaluate(x1, x2, u) - self.shift

    def rate_bound(self, x1, x2, u) -> float:
        """Bound on |df/du| for step size control"""
        return self.inner.rate_bound(x1, x2, u)

    @property
    def absorbing(self) -> bool:
        """Whether the source is a nonnegative absorption term vanishing for u <= 0"""
        return self.inner.absorbing and self.shift == 0


SourceSpec = BoundedSource | DeadCoreSource | ConstantSource | RescaledSource | ShiftedSource
BoundaryData = PointFunction | ScalarField


@dataclass(frozen=True)
class ProblemSpec:
    """
    H(x, Du) F(x, D^2 u) = f(x, u) with u = g on the boundary ring and the
    optional constraint u >= obstacle. Without a degeneracy law H is 1.
    """

    operator: OperatorSpec
    degeneracy: DegeneracyLaw | None
    source: SourceSpec
    boundary: BoundaryData
    obstacle: PointFunction | None = None

    def __post_init__(self):
        if isinstance(self.source, DeadCoreSource):
            p = self.degeneracy.p if self.degeneracy is not None else 0.0
            if not 0 < self.source.mu < p + 1:
                raise ParameterError(f"mu < p+1 required, got mu={self.source.mu} with p={p}")

    @property
    def p(self) -> float:
        """Degeneracy exponent p, 0 without degeneracy"""
        return self.degeneracy.p if self.degeneracy is not None else 0.0


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the pseudo-time iteration"""

    dt_safety: float = 0.4
    tol: float = 1e-7
    max_iter: int = 500_000
    report_every: int = 10_000
    eps_reg: float = SOLVER_EPS_REG
    project_sign: bool = True

    def __post_init__(self):
        if not 0 < self.dt_safety < 0.5:
            raise ParameterError(f"dt_safety must be in (0, 0.5), got {self.dt_safety}")
        if self.tol <= 0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1 or self.report_every < 1:
            raise ParameterError("max_iter and report_every must be at least 1")
        if self.eps_reg < 0:
            raise ParameterError(f"eps_reg must be nonnegative, got {self.eps_reg}")


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a solve"""

    iterations: int
    residual: float
    update: float
    converged: bool
    wall_time: float
    grid_h: float


def boundary_values(boundary: BoundaryData, grid: Grid2D) -> np.ndarray:
    """
    Values of the boundary data on all defined nodes of a grid, NaN elsewhere.

    A field given as boundary data must share the node lattice of the grid and
    be defined wherever the grid is.
    """
    if isinstance(boundary, ScalarField):
        if boundary.grid.n != grid.n:
            raise GridMismatchError(
                f"boundary field has n={boundary.grid.n}, the grid has n={grid.n}"
            )
        if np.any(grid.defined & ~boundary.grid.defined):
            raise ParameterError("boundary field is not defined on the whole domain")
        return np.where(grid.defined, boundary.values, np.nan)
    return ScalarField.from_function(grid, boundary).values


def _obstacle_values(problem: ProblemSpec, grid: Grid2D) -> np.ndarray | None:
    if problem.obstacle is None:
        return None
    return ScalarField.from_function(grid, problem.obstacle).values


def _operator_values(op: OperatorSpec, grid: Grid2D, values: np.ndarray, jets: InteriorJets, x):
    """F at the interior nodes, through the monotone stencil where requested"""
    target = op.inner if isinstance(op, FrozenAt) else op
    if isinstance(target, (PucciPlus, PucciMinus)) and target.monotone:
        deltas = interior_directional_differences(grid, values)
        sign = 1 if isinstance(target, PucciPlus) else -1
        return monotone_combination(deltas, target.ellipticity, sign)
    return np.asarray(op.evaluate(x, jets.grad, jets.hess), dtype=float)


class _Evaluator:
    """Interior quantities of one problem on one grid, reused across iterations"""

    def __init__(self, problem: ProblemSpec, grid: Grid2D, eps_reg: float):
        self.problem = problem
        self.grid = grid
        x1, x2 = grid.coordinates
        self.x1 = x1[grid.interior]
        self.x2 = x2[grid.interior]
        self.x = np.stack([self.x1, self.x2], axis=-1)
        self.law = problem.degeneracy.with_eps(eps_reg) if problem.degeneracy else None
        obstacle = _obstacle_values(problem, grid)
        self.obstacle = None if obstacle is None else obstacle[grid.interior]
        if self.law is None:
            self.step_floor = np.ones_like(self.x1)
        else:
            # gradients below one grid unit are not resolved
            unresolved = self.law.H(self.x, np.full_like(self.x1, grid.h))
            self.step_floor = np.maximum(np.asarray(unresolved, dtype=float), MIN_STEP_FACTOR)

    def gradient_factor(self, jets: InteriorJets) -> np.ndarray:
        """H at the grid gradient norm, floored at eps_reg"""
        if self.law is None:
            return np.ones_like(jets.norm)
        return np.asarray(self.law.H(self.x, jets.norm, regularized=True), dtype=float)

    def residual(
        self, values: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, InteriorJets, np.ndarray]:
        """
        Pseudo-time velocity H F - f, the residual measured for convergence,
        the jets and H per interior node.

        Velocity and residual differ only at contact nodes of an obstacle
        problem, where the residual is max(H F - f, 0).
        """
        jets = interior_jets(self.grid, values)
        factor = self.gradient_factor(jets)
        operator = _operator_values(self.problem.operator, self.grid, values, jets, self.x)
        u = values[self.grid.interior]
        source = self.problem.source.evaluate(self.x1, self.x2, u)
        if self.obstacle is None:
            velocity = factor * operator - source
            return velocity, velocity, jets, factor
        free = u > self.obstacle + CONTACT_TOL
        velocity = factor * operator - np.where(free, source, 0.0)
        residual = np.where(free, velocity, np.maximum(velocity, 0.0))
        return velocity, residual, jets, factor

    def step_sizes(
        self, values: np.ndarray, jets: InteriorJets, factor: np.ndarray, dt_safety: float
    ) -> np.ndarray:
        """
        Local steps dt = dt_safety h^2 / (N Lam max(H, H_min) + h^2 * reaction rate).

        Where the source is active, H_min is H at a gradient of one grid unit,
        and at least 1e-4. Where it vanishes, dt H F is the step of the problem
        with H = 1 and no floor is needed.
        """
        h2 = self.grid.h**2
        u = values[self.grid.interior]
        lam_upper = self.problem.operator.ellipticity_bound(jets.grad)
        rate = self.problem.source.rate_bound(self.x1, self.x2, u)
        source = np.asarray(self.problem.source.evaluate(self.x1, self.x2, u), dtype=float)
        floor = np.where(source != 0.0, self.step_floor, np.finfo(float).tiny)
        scale = np.maximum(factor, floor)
        return dt_safety * h2 / (DIMENSION * lam_upper * scale + h2 * rate)


def _initial_values(problem: ProblemSpec, grid: Grid2D) -> np.ndarray:
    g = boundary_values(problem.boundary, grid)
    obstacle = _obstacle_values(problem, grid)
    if obstacle is not None:
        ring = grid.ring
        if np.any(g[ring] < obstacle[ring] - CONTACT_TOL):
            raise ParameterError("boundary data must lie above the obstacle on the boundary ring")
        g = np.where(grid.defined, np.maximum(g, obstacle), np.nan)
    return g


def solve(
    problem: ProblemSpec,
    grid: Grid2D,
    cfg: SolverConfig | None = None,
    initial: ScalarField | None = None,
) -> tuple[ScalarField, SolveReport]:
    """
    Relax u_t = H_eps(x, Du) F(x, D^2 u) - f(x, u) to its steady state.

    Interior nodes start from the boundary data (or `initial`), boundary-ring
    nodes stay pinned to g. Every node advances with its own step, inversely
    proportional to the local H_eps, so that regions where the gradient
    degenerates relax as fast as the problem with H = 1. The steady state is
    the same as with a uniform step.

    With an obstacle, every step is followed by the projection
    u <- max(u, obstacle). With an absorbing dead-core source and nonnegative
    data, every step is followed by u <- max(u, 0) unless
    `cfg.project_sign` is off. With the trace operator and reaction orders
    mu >= 1 the update is a nonnegative combination of the old values and
    the projection never acts. For mu < 1 the reaction rate is unbounded at
    u = 0 and the projection is what keeps the iterates nonnegative.

    Args:
        problem (ProblemSpec): The equation with its data.
        grid (Grid2D): The grid to solve on.
        cfg (SolverConfig): Iteration parameters, defaults if omitted.
        initial (ScalarField): Optional starting field on the same grid.

    Returns:
        tuple[ScalarField, SolveReport]: The solution and the iteration report.

    Raises:
        BlowUpError: If the iteration diverges.
        ParameterError: If the data are inconsistent with the grid.
    """
    cfg = cfg or SolverConfig()
    started = time.perf_counter()
    evaluator = _Evaluator(problem, grid, cfg.eps_reg)
    boundary = _initial_values(problem, grid)
    current = boundary.copy()
    if initial is not None:
        if not initial.grid.same_as(grid):
            raise GridMismatchError("initial field lives on another grid")
        current[grid.interior] = initial.values[grid.interior]
    scratch = current.copy()
    interior = grid.interior
    bound = BLOW_UP_FACTOR * (float(np.max(np.abs(boundary[grid.ring]), initial=0.0)) + 1.0)
    clamp_at_zero = (
        cfg.project_sign and problem.source.absorbing and np.all(boundary[grid.ring] >= 0)
    )

    dt = np.zeros(0)
    residual_norm = update_norm = np.inf
    converged = False
    iterations = 0
    for iterations in range(cfg.max_iter + 1):
        velocity, residual, jets, factor = evaluator.residual(current)
        residual_norm = float(np.max(np.abs(residual), initial=0.0))
        if residual_norm <= cfg.tol:
            converged = True
            break
        if iterations == cfg.max_iter:
            break
        dt = evaluator.step_sizes(current, jets, factor, cfg.dt_safety)

        updated = current[interior] + dt * velocity
        if evaluator.obstacle is not None:
            updated = np.maximum(updated, evaluator.obstacle)
        if clamp_at_zero:
            updated = np.maximum(updated, 0.0)
        update_norm = float(np.max(np.abs(updated - current[interior]), initial=0.0))
        scratch[interior] = updated
        current, scratch = scratch, current

        top = float(np.max(np.abs(updated), initial=0.0))
        if not np.isfinite(top) or top > bound:
            raise BlowUpError(
                f"pseudo-time iteration diverged after {iterations + 1} steps "
                f"(sup |u| = {top}, limit {bound})"
            )
        if (iterations + 1) % cfg.report_every == 0:
            logging.debug(
                "Iteration %s: residual %.3e, update %.3e, dt in [%.3e, %.3e]",
                iterations + 1,
                residual_norm,
                update_norm,
                float(np.min(dt, initial=np.inf)),
                float(np.max(dt, initial=0.0)),
            )

    report = SolveReport(
        iterations=iterations,
        residual=residual_norm,
        update=update_norm,
        converged=converged,
        wall_time=time.perf_counter() - started,
        grid_h=grid.h,
    )
    if converged:
        logging.info(
            "Solved on n=%s in %s iterations, residual %.3e (%.1fs)",
            grid.n,
            report.iterations,
            report.residual,
            report.wall_time,
        )
    else:
        logging.warning(
            "No convergence on n=%s after %s iterations, residual %.3e > tol %.1e",
            grid.n,
            report.iterations,
            report.residual,
            cfg.tol,
        )
    return ScalarField(grid, current), report


def solve_frozen_homogeneous(
    op: OperatorSpec,
    x0: Point,
    boundary: ScalarField,
    grid: Grid2D,
    cfg: SolverConfig | None = None,
) -> ScalarField:
    """
    Solve F(x0, D^2 h) = 0 with coefficients frozen at x0, H = 1 and f = 0,
    taking h = boundary on the ring of `grid` (usually B_{1/2}(x0)).
    """
    problem = ProblemSpec(
        operator=FrozenAt(x0=tuple(x0), inner=op),
        degeneracy=None,
        source=ConstantSource(0.0),
        boundary=boundary,
    )
    solution, _ = solve(problem, grid, cfg)
    return solution


def residual_field(
    u: ScalarField, problem: ProblemSpec, grid: Grid2D | None = None
) -> ScalarField:
    """
    H(x, |grad_h u|) F(x, D_h^2 u) - f(x, u) at interior nodes, 0 on the ring.

    No gradient floor is applied. With an obstacle, contact nodes report
    max(H F, 0).
    """
    grid = grid or u.grid
    if not grid.same_as(u.grid):
        raise GridMismatchError("field and grid differ")
    evaluator = _Evaluator(problem, grid, eps_reg=0.0)
    _, residual, _, _ = evaluator.residual(np.asarray(u.values))
    values = np.where(grid.defined, 0.0, np.nan)
    values[grid.interior] = residual
    return ScalarField(grid, values)


def problem_defect(problem: ProblemSpec, x, xi, X: SymMat2, s) -> np.ndarray:
    """
    H(x, |xi|) F(x, xi, X) - f(x, s) for arbitrary arguments.

    Points and gradients are arrays of shape (..., 2), `s` holds the value of
    the unknown.
    """
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    operator = np.asarray(problem.operator.evaluate(x, xi, X), dtype=float)
    if problem.degeneracy is None:
        factor = np.ones_like(operator)
    else:
        factor = np.asarray(problem.degeneracy.H(x, np.hypot(xi[..., 0], xi[..., 1])))
    s = np.broadcast_to(np.asarray(s, dtype=float), operator.shape)
    return factor * operator - problem.source.evaluate(x[..., 0], x[..., 1], s)
