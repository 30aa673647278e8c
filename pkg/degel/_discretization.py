# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Finite-difference jets and the monotone wide-stencil Pucci evaluation"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._errors import StencilError
from ._grid import Grid2D, Node, NodeKind, ScalarField
from ._operators import EllipticityPair, SymMat2


class Direction(Enum):
    """Stencil directions of the monotone scheme, as integer node offsets"""

    AXIS1 = (1, 0)
    AXIS2 = (0, 1)
    DIAG_PLUS = (1, 1)
    DIAG_MINUS = (1, -1)


# Each direction carries the same weight; the weights sum to the dimension
MONOTONE_WEIGHT = 0.5


@dataclass(frozen=True)
class DiscreteJet:
    """Centred gradient and 9-point Hessian at a node"""

    grad: tuple[float, float]
    hess: SymMat2
    node: Node


@dataclass(frozen=True, eq=False)
class InteriorJets:
    """
    Jets at all interior nodes, as flat arrays in the order of
    `np.nonzero(grid.interior)`.
    """

    grad1: np.ndarray
    grad2: np.ndarray
    hess: SymMat2
    # root-mean-square of the one-sided axis slopes
    norm: np.ndarray

    @property
    def grad(self) -> np.ndarray:
        """Gradients stacked to shape (k, 2)"""
        return np.stack([self.grad1, self.grad2], axis=-1)


def _neighbour(values: np.ndarray, di: int, dj: int) -> np.ndarray:
    """values[i + di, j + dj] for every (i, j) of the inner block [1:-1, 1:-1]"""
    n = values.shape[0]
    return values[1 + di : n - 1 + di, 1 + dj : n - 1 + dj]


def interior_jets(grid: Grid2D, values: np.ndarray) -> InteriorJets:
    """
    Centred gradient, 9-point Hessian and grid gradient norm at the interior
    nodes of a grid, from a raw value array.

    Interior nodes never touch the edge of the square, so all neighbours are
    read from the inner block without padding.
    """
    mask = grid.interior[1:-1, 1:-1]
    h = grid.h
    centre = _neighbour(values, 0, 0)[mask]
    east, west = _neighbour(values, 1, 0)[mask], _neighbour(values, -1, 0)[mask]
    north, south = _neighbour(values, 0, 1)[mask], _neighbour(values, 0, -1)[mask]
    cross = (
        _neighbour(values, 1, 1)[mask]
        - _neighbour(values, 1, -1)[mask]
        - _neighbour(values, -1, 1)[mask]
        + _neighbour(values, -1, -1)[mask]
    )
    grad1 = (east - west) / (2.0 * h)
    grad2 = (north - south) / (2.0 * h)
    a11 = (east - 2.0 * centre + west) / h**2
    a22 = (north - 2.0 * centre + south) / h**2
    hess = SymMat2(a11, cross / (4.0 * h**2), a22)
    norm = np.sqrt(grad1**2 + grad2**2 + 0.25 * h**2 * (a11**2 + a22**2))
    return InteriorJets(grad1=grad1, grad2=grad2, hess=hess, norm=norm)


def interior_directional_differences(grid: Grid2D, values: np.ndarray) -> np.ndarray:
    """The four directional second differences at interior nodes, shape (4, k)"""
    mask = grid.interior[1:-1, 1:-1]
    centre = _neighbour(values, 0, 0)[mask]
    deltas = []
    for direction in Direction:
        di, dj = direction.value
        forward = _neighbour(values, di, dj)[mask]
        backward = _neighbour(values, -di, -dj)[mask]
        deltas.append((forward - 2.0 * centre + backward) / (grid.h**2 * (di * di + dj * dj)))
    return np.stack(deltas)


def scatter_interior(grid: Grid2D, interior_values: np.ndarray, fill: float = np.nan):
    """Full (n, n) array holding interior values and `fill` elsewhere"""
    out = np.full((grid.n, grid.n), fill, dtype=float)
    out[grid.interior] = interior_values
    return out


def gradient_field(u: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    """Centred differences at every interior node, NaN elsewhere"""
    jets = interior_jets(u.grid, u.values)
    return scatter_interior(u.grid, jets.grad1), scatter_interior(u.grid, jets.grad2)


def hessian_field(u: ScalarField) -> SymMat2:
    """9-point Hessian at every interior node, NaN elsewhere"""
    hess = interior_jets(u.grid, u.values).hess
    return SymMat2(*(scatter_interior(u.grid, entry) for entry in hess.entries))


def grid_gradient_norm(u: ScalarField) -> np.ndarray:
    """
    Root-mean-square of the one-sided slopes along both axes, NaN off the interior.

    Equals sqrt(|grad|^2 + (h^2 / 4) (M11^2 + M22^2)) with the centred gradient
    and the 9-point Hessian M. It agrees with |Du| up to O(h^2) where u is
    smooth and stays positive at cusps where the centred gradient vanishes.
    """
    return scatter_interior(u.grid, interior_jets(u.grid, u.values).norm)


def _require_interior(u: ScalarField, node: Node) -> None:
    i, j = node
    n = u.grid.n
    if not (0 <= i < n and 0 <= j < n) or u.grid.kinds[i, j] != NodeKind.INTERIOR:
        raise StencilError(f"node {node} is not an interior node")


def jet_at(u: ScalarField, node: Node) -> DiscreteJet:
    """
    Discrete gradient and Hessian at an interior node.

    Raises:
        StencilError: If the node is not interior.
    """
    _require_interior(u, node)
    i, j = node
    h = u.grid.h
    v = u.values
    grad = ((v[i + 1, j] - v[i - 1, j]) / (2.0 * h), (v[i, j + 1] - v[i, j - 1]) / (2.0 * h))
    cross = v[i + 1, j + 1] - v[i + 1, j - 1] - v[i - 1, j + 1] + v[i - 1, j - 1]
    hess = SymMat2(
        float((v[i + 1, j] - 2.0 * v[i, j] + v[i - 1, j]) / h**2),
        float(cross / (4.0 * h**2)),
        float((v[i, j + 1] - 2.0 * v[i, j] + v[i, j - 1]) / h**2),
    )
    return DiscreteJet(grad=(float(grad[0]), float(grad[1])), hess=hess, node=(i, j))


def directional_second_difference(u: ScalarField, node: Node, direction: Direction) -> float:
    """
    (u(x + h v) - 2 u(x) + u(x - h v)) / (h^2 |v|^2) for a stencil direction v.

    Raises:
        StencilError: If the node is not interior.
    """
    _require_interior(u, node)
    i, j = node
    di, dj = direction.value
    v = u.values
    second = v[i + di, j + dj] - 2.0 * v[i, j] + v[i - di, j - dj]
    return float(second / (u.grid.h**2 * (di * di + dj * dj)))


def monotone_combination(deltas, e: EllipticityPair, sign: int):
    """Weighted sum of directional differences, Lam on the favoured sign and lam on the other"""
    high, low = (e.Lam, e.lam) if sign > 0 else (e.lam, e.Lam)
    positive = np.maximum(deltas, 0.0)
    negative = np.minimum(deltas, 0.0)
    return MONOTONE_WEIGHT * np.sum(high * positive + low * negative, axis=0)


def pucci_monotone(u: ScalarField, node: Node, e: EllipticityPair, sign: int) -> float:
    """
    Monotone wide-stencil Pucci operator at an interior node.

    For sign +1 this is Lam * sum_{delta_d > 0} w delta_d + lam * sum_{delta_d < 0} w delta_d
    over the four directional second differences, for sign -1 the roles of
    lam and Lam are swapped.

    Raises:
        StencilError: If the node is not interior.
    """
    deltas = np.array([directional_second_difference(u, node, d) for d in Direction])
    return float(monotone_combination(deltas, e, sign))


def pucci_monotone_field(u: ScalarField, e: EllipticityPair, sign: int) -> np.ndarray:
    """Monotone Pucci operator at every interior node, NaN elsewhere"""
    deltas = interior_directional_differences(u.grid, u.values)
    return scatter_interior(u.grid, monotone_combination(deltas, e, sign))
