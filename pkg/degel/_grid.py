# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Uniform grid over [-1, 1]^2 with a ball mask, and fields living on it"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property

import numpy as np

from ._errors import GridMismatchError, ParameterError
from ._helpers import format_number, read_text_lines, write_text_lines

Point = tuple[float, float]
Node = tuple[int, int]
# Callables on grids receive the two coordinate arrays and return an array
PointFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

_SPACING_TOL = 1e-14
MIN_SHELL_NODES = 8


class NodeKind(IntEnum):
    """Classification of a grid node with respect to the ball mask"""

    EXTERIOR = 0
    BOUNDARY = 1
    INTERIOR = 2


@dataclass(frozen=True, eq=False)
class Grid2D:
    """
    Node grid of the square [-1, 1]^2 with n nodes per axis, masked to the
    closed ball B_radius(center).

    Node (i, j) sits at (-1 + i*h, -1 + j*h). Use `make_grid` to construct a
    validated instance.
    """

    n: int
    center: Point
    radius: float

    @property
    def h(self) -> float:
        """Grid spacing"""
        return 2.0 / (self.n - 1)

    @property
    def key(self) -> tuple[int, float, float, float]:
        """Identity of the grid; fields may only be combined when keys agree"""
        return (self.n, float(self.center[0]), float(self.center[1]), float(self.radius))

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays (x1, x2), both indexed [i, j]"""
        axis = np.linspace(-1.0, 1.0, self.n)
        x1, x2 = np.meshgrid(axis, axis, indexing="ij")
        x1.setflags(write=False)
        x2.setflags(write=False)
        return x1, x2

    @cached_property
    def kinds(self) -> np.ndarray:
        """NodeKind per node"""
        masked = self.distance_from(self.center) <= self.radius + 1e-9 * self.h
        padded = np.pad(masked, 1, constant_values=False)
        interior = masked.copy()
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                interior &= padded[1 + di : 1 + di + self.n, 1 + dj : 1 + dj + self.n]
        kinds = np.full((self.n, self.n), NodeKind.EXTERIOR, dtype=np.int8)
        kinds[masked] = NodeKind.BOUNDARY
        kinds[interior] = NodeKind.INTERIOR
        kinds.setflags(write=False)
        return kinds

    @property
    def interior(self) -> np.ndarray:
        """Boolean mask of interior nodes"""
        return self.kinds == NodeKind.INTERIOR

    @property
    def ring(self) -> np.ndarray:
        """Boolean mask of boundary-ring nodes"""
        return self.kinds == NodeKind.BOUNDARY

    @property
    def defined(self) -> np.ndarray:
        """Boolean mask of all non-exterior nodes"""
        return self.kinds != NodeKind.EXTERIOR

    def same_as(self, other: "Grid2D") -> bool:
        """Whether another grid is identical to this one"""
        return self.key == other.key

    def distance_from(self, point: Point) -> np.ndarray:
        """Euclidean distance of every node from a point"""
        x1, x2 = self.coordinates
        return np.hypot(x1 - point[0], x2 - point[1])

    def point_of(self, node: Node) -> Point:
        """Coordinates of a node"""
        return (-1.0 + node[0] * self.h, -1.0 + node[1] * self.h)

    def nearest_node(self, point: Point) -> Node:
        """Index of the node closest to a point (clipped to the square)"""
        i = int(np.clip(np.rint((point[0] + 1.0) / self.h), 0, self.n - 1))
        j = int(np.clip(np.rint((point[1] + 1.0) / self.h), 0, self.n - 1))
        return (i, j)

    def kind_of(self, node: Node) -> NodeKind:
        """Classification of a single node"""
        return NodeKind(int(self.kinds[node]))


def make_grid(n: int, center: Point = (0.0, 0.0), radius: float = 1.0) -> Grid2D:
    """
    Create a classified grid over [-1, 1]^2 masked to B_radius(center).

    Args:
        n (int): Nodes per axis. Must be odd (so the origin is a node) and at
        least 9.
        center (Point): Center of the ball mask.
        radius (float): Radius of the ball mask, in (0, 1].

    Returns:
        Grid2D: The grid.

    Raises:
        ParameterError: If n is even or too small, the radius is out of range,
        or the ball is not contained in the square.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ParameterError(f"n must be an integer, got {n!r}")
    if n % 2 == 0:
        raise ParameterError(f"n must be odd, got {n}")
    if n < 9:
        raise ParameterError(f"n must be at least 9, got {n}")
    if not 0.0 < radius <= 1.0:
        raise ParameterError(f"radius must be in (0, 1], got {radius}")
    cx, cy = float(center[0]), float(center[1])
    if max(abs(cx), abs(cy)) + radius > 1.0 + 1e-12:
        raise ParameterError(
            f"ball of radius {radius} around ({cx}, {cy}) is not contained in [-1, 1]^2"
        )

    grid = Grid2D(n=int(n), center=(cx, cy), radius=float(radius))
    if abs(grid.h * (grid.n - 1) - 2.0) > _SPACING_TOL:
        raise ParameterError(f"grid spacing {grid.h} is inconsistent with n={n}")
    logging.debug(
        "Created grid n=%s h=%s with %s interior nodes",
        grid.n,
        grid.h,
        int(np.count_nonzero(grid.interior)),
    )
    return grid


@dataclass(frozen=True, eq=False)
class ScalarField:
    """
    Real values on the nodes of a grid. Exterior nodes hold NaN.

    Fields are read-only; updates produce new fields.
    """

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.shape != (self.grid.n, self.grid.n):
            raise ParameterError(
                f"field shape {values.shape} does not match grid with n={self.grid.n}"
            )
        defined = self.grid.defined
        if not np.all(np.isfinite(values[defined])):
            raise ParameterError("field values must be finite at all non-exterior nodes")
        values[~defined] = np.nan
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def kinds(self) -> np.ndarray:
        """NodeKind per node, shared with the grid"""
        return self.grid.kinds

    @classmethod
    def from_function(cls, grid: Grid2D, func: PointFunction) -> "ScalarField":
        """Sample a function of (x1, x2) on all non-exterior nodes of a grid"""
        x1, x2 = grid.coordinates
        values = np.full((grid.n, grid.n), np.nan)
        defined = grid.defined
        sampled = np.asarray(func(x1[defined], x2[defined]), dtype=float)
        values[defined] = np.broadcast_to(sampled, x1[defined].shape)
        return cls(grid, values)

    @classmethod
    def constant(cls, grid: Grid2D, value: float) -> "ScalarField":
        """A field with the same value on every defined node"""
        return cls(grid, np.full((grid.n, grid.n), float(value)))

    def with_values(self, values: np.ndarray) -> "ScalarField":
        """A new field on the same grid with other values"""
        return ScalarField(self.grid, values)

    def at(self, node: Node) -> float:
        """Value at a node"""
        return float(self.values[node])

    def _check_compatible(self, other: "ScalarField") -> None:
        if not self.grid.same_as(other.grid):
            raise GridMismatchError(
                f"cannot combine fields on grids {self.grid.key} and {other.grid.key}"
            )

    def __add__(self, other: "ScalarField | float") -> "ScalarField":
        if isinstance(other, ScalarField):
            self._check_compatible(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + float(other))

    def __sub__(self, other: "ScalarField | float") -> "ScalarField":
        if isinstance(other, ScalarField):
            self._check_compatible(other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - float(other))

    def __mul__(self, factor: float) -> "ScalarField":
        return self.with_values(self.values * float(factor))

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField":
        return self.with_values(-self.values)


def restrict(u: ScalarField, center: Point, radius: float) -> ScalarField:
    """
    Re-mask a field onto the grid with the same nodes but the ball
    B_radius(center). Nodes of the new ball must be defined in the old one.
    """
    sub = make_grid(u.grid.n, center, radius)
    if np.any(sub.defined & ~u.grid.defined):
        raise ParameterError("sub-ball is not contained in the field's domain")
    values = np.where(sub.defined, u.values, np.nan)
    return ScalarField(sub, values)


def _ball_nodes(grid: Grid2D, x0: Point, r: float) -> np.ndarray:
    return grid.defined & (grid.distance_from(x0) <= r + 1e-9 * grid.h)


def sup_over_ball(u: ScalarField, x0: Point, r: float) -> float:
    """
    Maximum of |u| over the defined nodes in the closed ball B_r(x0).

    Raises:
        ParameterError: If r < 2h or no node lies in the ball.
    """
    h = u.grid.h
    if r < 2.0 * h - 1e-12:
        raise ParameterError(f"radius {r} is below 2h = {2.0 * h}")
    nodes = _ball_nodes(u.grid, x0, r)
    if not np.any(nodes):
        raise ParameterError(f"no grid node in the ball of radius {r} around {x0}")
    return float(np.max(np.abs(u.values[nodes])))


def sup_over_sphere(u: ScalarField, x0: Point, r: float) -> float:
    """
    Maximum of u over the defined nodes in the shell r - h < |x - x0| <= r.

    Raises:
        ParameterError: If r < 2h or the shell holds fewer than 8 nodes.
    """
    h = u.grid.h
    if r < 2.0 * h - 1e-12:
        raise ParameterError(f"radius {r} is below 2h = {2.0 * h}")
    dist = u.grid.distance_from(x0)
    tol = 1e-9 * h
    shell = u.grid.defined & (dist > r - h + tol) & (dist <= r + tol)
    count = int(np.count_nonzero(shell))
    if count < MIN_SHELL_NODES:
        raise ParameterError(
            f"shell of radius {r} around {x0} holds {count} nodes, "
            f"at least {MIN_SHELL_NODES} are required"
        )
    return float(np.max(u.values[shell]))


def field_to_csv_lines(u: ScalarField) -> list[str]:
    """Serialize a field: header line, then one row of values per index i"""
    grid = u.grid
    header = (
        f"n={grid.n},h={format_number(grid.h)},cx={format_number(grid.center[0])},"
        f"cy={format_number(grid.center[1])},R={format_number(grid.radius)}"
    )
    rows = [",".join(format_number(v) for v in row) for row in u.values]
    return [header, *rows]


def write_field_csv(u: ScalarField, path: str) -> None:
    """Write a field as CSV to a file, or to stdout for `-`"""
    write_text_lines(field_to_csv_lines(u), path)
    if path != "-":
        logging.debug("Field written to %s", path)


def read_field_csv(path: str) -> ScalarField:
    """
    Read a field written by `write_field_csv`.

    Raises:
        ParameterError: If the header or the body is malformed.
    """
    lines = [line for line in read_text_lines(path) if line.strip()]
    if not lines:
        raise ParameterError(f"empty field file {path}")
    try:
        header = dict(item.split("=", 1) for item in lines[0].split(","))
        n = int(header["n"])
        grid = make_grid(n, (float(header["cx"]), float(header["cy"])), float(header["R"]))
    except (KeyError, ValueError) as exc:
        raise ParameterError(f"malformed field header in {path}: {exc}") from exc
    if abs(float(header["h"]) - grid.h) > 1e-12:
        raise ParameterError(f"header spacing {header['h']} does not match n={n}")
    if len(lines) - 1 != n:
        raise ParameterError(f"expected {n} rows in {path}, found {len(lines) - 1}")
    values = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return ScalarField(grid, values)
